"""Automated proof search over the natural fragment.

The strategy exploits invertibility: the terminating simplifiers (epet,
poll_down, srep) are applied greedily to a fixpoint without backtracking,
and only the instantiation and insertion rules (ipet, ipis, poll_up) branch,
explored by iterative deepening with digest-based loop detection.  Cultural
rules are admissible, so excluding them loses no theorems.

Termination is not guaranteed by the calculus; the budget makes every search
end in Proved, Refuted (a bounded countermodel search certifies
non-provability) or an honest Unknown.

Search runs single-threaded and fully deterministically: identical goal and
budget always yield the same outcome and the same derivation.  Independent
searches are safe to run concurrently (terms are immutable values).
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

from .derivations import Derivation, check_derivation, deduction_flower, derive, digest
from .rules import RuleInstance, RuleName, applicable_instances, apply_rule
from .semantics import Countermodel, find_countermodel
from .syntax import Bouquet, FloretError

_SIMPLIFIERS = frozenset({RuleName.epet, RuleName.poll_down, RuleName.srep})
_CHOICES = frozenset({RuleName.ipet, RuleName.ipis, RuleName.poll_up})


@dataclass(frozen=True)
class SearchBudget:
    """All positive; the defaults suit the desk-scale corpus."""

    max_steps: int = 20000
    max_depth: int = 8
    max_instantiations_per_binder: int = 4
    timeout_ms: int = 10000

    def __post_init__(self) -> None:
        if min(self.max_steps, self.max_depth,
               self.max_instantiations_per_binder, self.timeout_ms) <= 0:
            raise FloretError("budget fields must be positive")


class Outcome(enum.Enum):
    PROVED = "proved"
    REFUTED = "refuted"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SearchOutcome:
    outcome: Outcome
    derivation: Derivation | None = None
    countermodel: Countermodel | None = None

    @property
    def proved(self) -> bool:
        return self.outcome is Outcome.PROVED


class _Exhausted(Exception):
    pass


class _Search:
    def __init__(self, budget: SearchBudget):
        self.budget = budget
        self.deadline = time.monotonic() + budget.timeout_ms / 1000.0
        self.expansions = 0

    def tick(self) -> None:
        self.expansions += 1
        if self.expansions > self.budget.max_steps or time.monotonic() > self.deadline:
            raise _Exhausted

    def simplify(self, b: Bouquet, visited: set[str],
                 trail: list[RuleInstance]) -> Bouquet:
        """Greedy fixpoint of the invertible shrinking rules.  Never steps
        into an already-visited state: a poll_down must not silently undo the
        poll_up choice that led here."""
        seen = {digest(b)}
        while True:
            insts = applicable_instances(b, fragment=_SIMPLIFIERS)
            progressed = False
            for inst in insts:
                self.tick()
                try:
                    nxt = apply_rule(b, inst)
                except FloretError:
                    continue
                dig = digest(nxt)
                if dig in seen or dig in visited:
                    continue
                seen.add(dig)
                trail.append(inst)
                b = nxt
                progressed = True
                break
            if not progressed:
                return b

    def prove(self, b: Bouquet, depth: int, visited: set[str],
              fresh_rank: int, trail: list[RuleInstance]) -> bool:
        b = self.simplify(b, visited, trail)
        if b == ():
            return True
        dig = digest(b)
        if dig in visited:
            return False
        visited.add(dig)
        if depth == 0:
            return False
        extra = tuple(f"v{fresh_rank}_{i}" for i in range(1))
        insts = applicable_instances(b, fragment=_CHOICES, extra_images=extra)
        insts = self.cap_instantiations(insts)
        for inst in insts:
            self.tick()
            try:
                nxt = apply_rule(b, inst)
            except FloretError:
                continue
            mark = len(trail)
            trail.append(inst)
            if self.prove(nxt, depth - 1, visited, fresh_rank + 1, trail):
                return True
            del trail[mark:]
        visited.discard(dig)
        return False

    def cap_instantiations(self, insts: list[RuleInstance]) -> list[RuleInstance]:
        cap = self.budget.max_instantiations_per_binder
        counts: dict[tuple, int] = {}
        out = []
        for inst in insts:
            if inst.rule in (RuleName.ipis, RuleName.ipet):
                key = (inst.rule, inst.path, inst.petal, inst.binders)
                counts[key] = counts.get(key, 0) + 1
                if counts[key] > cap:
                    continue
            out.append(inst)
        return out


def prove(goal: Bouquet, budget: SearchBudget = SearchBudget(),
          *, refute: bool = True) -> SearchOutcome:
    """Search for a natural proof of the goal; every Proved derivation is
    replayed through the checker before being returned."""
    search = _Search(budget)
    try:
        for depth in range(budget.max_depth + 1):
            trail: list[RuleInstance] = []
            if search.prove(goal, depth, set(), 0, trail):
                d = derive(goal, trail)
                res = check_derivation(d)
                if not res.ok or res.final != ():
                    raise FloretError(f"prover produced an uncheckable derivation: {res.reason}")
                return SearchOutcome(Outcome.PROVED, derivation=d)
    except _Exhausted:
        pass
    if refute:
        cm = find_countermodel(goal, max_worlds=2, max_domain=1)
        if cm is None:
            cm = find_countermodel(goal, max_worlds=3, max_domain=2, limit=4000)
        if cm is not None:
            return SearchOutcome(Outcome.REFUTED, countermodel=cm)
    return SearchOutcome(Outcome.UNKNOWN)


def prove_hypothetical(hyps: Bouquet, goal: Bouquet,
                       budget: SearchBudget = SearchBudget()) -> SearchOutcome:
    """Prove the goal under hypotheses via the single deduction flower."""
    return prove(deduction_flower(hyps, goal), budget)
