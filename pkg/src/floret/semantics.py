"""Finite Kripke structures and the forcing relation.

Worlds are indices 0..n-1 with a reflexive-transitive accessibility matrix.
Per-world domains are prefix-nested token ranges 0..k-1 (monotone inclusion
by construction) and interpretations are monotone families of tuple sets.

Forcing quantifies evaluations only over binder coordinates: all other
coordinates are inherited through the update operation, which turns the
textbook quantification over total functions into a finite product.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .syntax import (
    Atom, Bouquet, FloretError, Flower, VarId,
    bouquet_text, free_vars,
)

Element = int


@dataclass(frozen=True)
class Evaluation:
    """Total map from variables to elements: finite overrides over a default.

    Overrides equal to the default are normalized away, so structural
    equality coincides with pointwise equality as functions.
    """

    assignment: tuple[tuple[VarId, Element], ...] = ()
    default: Element = 0

    def __post_init__(self) -> None:
        cleaned = tuple(sorted(((k, v) for k, v in dict(self.assignment).items()
                                if v != self.default), key=lambda kv: kv[0].id))
        object.__setattr__(self, "assignment", cleaned)
        object.__setattr__(self, "_map", dict(cleaned))

    def __call__(self, v: VarId) -> Element:
        return self._map.get(v, self.default)  # type: ignore[attr-defined]

    def mapping(self) -> dict[VarId, Element]:
        return dict(self.assignment)


def update(e: Evaluation, vars: frozenset[VarId] | set[VarId] | tuple[VarId, ...],
           g: Evaluation) -> Evaluation:
    """Pointwise update: ``g`` on ``vars``, ``e`` elsewhere (left-associative)."""
    if not vars:
        return e
    vs = set(vars)
    merged = {k: v for k, v in e.assignment if k not in vs}
    merged.update({v: g(v) for v in vs})
    return Evaluation(tuple(merged.items()), e.default)


@dataclass(frozen=True)
class KripkeModel:
    n_worlds: int
    le: tuple[tuple[bool, ...], ...]            # accessibility, le[w][w'] iff w <= w'
    domain_sizes: tuple[int, ...]               # domain of w = range(domain_sizes[w])
    interp: tuple[tuple[str, tuple[tuple[tuple[Element, ...], ...], ...]], ...]
    # interp: per predicate, per world, the set (sorted tuple) of element tuples

    def __post_init__(self) -> None:
        object.__setattr__(self, "_interp", {p: ws for p, ws in self.interp})

    def worlds(self) -> range:
        return range(self.n_worlds)

    def domain(self, w: int) -> range:
        return range(self.domain_sizes[w])

    def holds(self, pred: str, w: int, args: tuple[Element, ...]) -> bool:
        ws = self._interp.get(pred)  # type: ignore[attr-defined]
        return ws is not None and args in ws[w]

    def successors(self, w: int) -> list[int]:
        return [v for v in self.worlds() if self.le[w][v]]

    def validate(self) -> None:
        for w in self.worlds():
            if not self.le[w][w]:
                raise FloretError("accessibility is not reflexive")
            for v in self.worlds():
                for u in self.worlds():
                    if self.le[w][v] and self.le[v][u] and not self.le[w][u]:
                        raise FloretError("accessibility is not transitive")
                if self.le[w][v]:
                    if self.domain_sizes[w] > self.domain_sizes[v]:
                        raise FloretError("domains are not monotone")
        for pred, ws in self.interp:
            for w in self.worlds():
                for v in self.worlds():
                    if self.le[w][v] and not set(ws[w]) <= set(ws[v]):
                        raise FloretError(f"interpretation of {pred!r} is not monotone")
                for tup in ws[w]:
                    if any(x not in self.domain(w) for x in tup):
                        raise FloretError(f"{pred!r} interpreted outside the domain at world {w}")

    # serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "worlds": self.n_worlds,
            "le": [[v for v in self.worlds() if self.le[w][v]] for w in self.worlds()],
            "domains": list(self.domain_sizes),
            "interp": {p: [[list(t) for t in ws[w]] for w in self.worlds()]
                       for p, ws in self.interp},
        }

    @classmethod
    def from_json(cls, data: dict) -> "KripkeModel":
        n = data["worlds"]
        le = tuple(tuple(v in set(row) for v in range(n)) for row in
                   ([set(s) for s in data["le"]]))
        interp = tuple(sorted(
            (p, tuple(tuple(sorted(tuple(x) for x in per_w)) for per_w in ws))
            for p, ws in data["interp"].items()))
        return cls(n, le, tuple(data["domains"]), interp)

    def describe(self) -> str:
        lines = [f"worlds: {self.n_worlds}"]
        order = [f"{w}<={v}" for w in self.worlds() for v in self.worlds()
                 if self.le[w][v] and w != v]
        lines.append("order: " + (", ".join(order) if order else "discrete"))
        for w in self.worlds():
            atoms = []
            for p, ws in self.interp:
                for tup in ws[w]:
                    atoms.append(p if not tup else f"{p}({','.join(map(str, tup))})")
            dom = ",".join(map(str, self.domain(w)))
            lines.append(f"world {w}: domain {{{dom}}} atoms {{{', '.join(sorted(atoms))}}}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Forcing

def forces(m: KripkeModel, w: int, e: Evaluation, b: Bouquet,
           cache: dict | None = None) -> bool:
    """A bouquet is forced when every flower is (empty = vacuous truth).

    ``cache`` memoizes per (world, flower) within this model; only pass one
    for closed subjects (no free variables), where the evaluation cannot
    influence the verdict.
    """
    return all(_forces_flower(m, w, e, f, cache) for f in b)


def _forces_flower(m: KripkeModel, w: int, e: Evaluation, f: Flower,
                   cache: dict | None = None) -> bool:
    if cache is not None:
        key = (w, f)
        hit = cache.get(key)
        if hit is not None:
            return hit
    out = _forces_flower_raw(m, w, e, f, cache)
    if cache is not None:
        cache[(w, f)] = out
    return out


def _forces_flower_raw(m: KripkeModel, w: int, e: Evaluation, f: Flower,
                       cache: dict | None) -> bool:
    if isinstance(f, Atom):
        return m.holds(f.pred, w, tuple(e(a) for a in f.args))
    xs = f.pistil.binders
    for w2 in m.successors(w):
        for assign in _assignments(m, w2, xs):
            e2 = update(e, xs, Evaluation(assign, e.default))
            if not forces(m, w2, e2, f.pistil.flowers, cache if not xs else None):
                continue
            if not any(
                forces(m, w2, update(e2, p.binders, Evaluation(assign2, e.default)),
                       p.flowers, cache if not (xs or p.binders) else None)
                for p in f.petals
                for assign2 in _assignments(m, w2, p.binders)
            ):
                return False
    return True


def _assignments(m: KripkeModel, w: int, xs: tuple[VarId, ...]):
    if not xs:
        yield ()
        return
    for combo in itertools.product(m.domain(w), repeat=len(xs)):
        yield tuple(zip(xs, combo))


def entails(m: KripkeModel, premiss: Bouquet, conclusion: Bouquet) -> bool:
    """Forcing of the premiss implies forcing of the conclusion, at every
    world and every evaluation of the free variables."""
    fv = sorted(free_vars(premiss) | free_vars(conclusion), key=lambda v: v.id)
    for w in m.worlds():
        for combo in itertools.product(m.domain(w), repeat=len(fv)):
            e = Evaluation(tuple(zip(fv, combo)))
            if forces(m, w, e, premiss) and not forces(m, w, e, conclusion):
                return False
    return True


def equivalent(m: KripkeModel, a: Bouquet, b: Bouquet) -> bool:
    return entails(m, a, b) and entails(m, b, a)


# ---------------------------------------------------------------------------
# Model enumeration and random models

def _preorders(n: int):
    """All reflexive-transitive boolean matrices over n worlds, deduplicated
    by a sorted-matrix heuristic (not a complete isomorphism check)."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    seen = set()
    for bits in itertools.product((False, True), repeat=len(pairs)):
        le = [[i == j for j in range(n)] for i in range(n)]
        for (i, j), bit in zip(pairs, bits):
            le[i][j] = bit
        ok = all(not (le[i][j] and le[j][k]) or le[i][k]
                 for i in range(n) for j in range(n) for k in range(n))
        if not ok:
            continue
        canon = tuple(sorted(tuple(row) for row in le))
        if canon in seen:
            continue
        seen.add(canon)
        yield tuple(tuple(row) for row in le)


def _monotone_families(le, n: int, choices_per_world):
    """All per-world selections monotone along the order: selection[w] must be
    a subset of selection[v] whenever w <= v."""
    def backtrack(w: int, picked: list):
        if w == n:
            yield tuple(picked)
            return
        for choice in choices_per_world[w]:
            if all(not le[v][w] or set(picked[v]) <= set(choice) for v in range(w)):
                if all(not le[w][v] or set(choice) <= set(picked[v]) for v in range(w)):
                    picked.append(choice)
                    yield from backtrack(w + 1, picked)
                    picked.pop()
    yield from backtrack(0, [])


def enumerate_models(max_worlds: int, max_domain: int,
                     predicates: tuple[tuple[str, int], ...]):
    """Exhaustive stream of models within the bounds (up to the heuristic
    accessibility pruning); every emitted model satisfies both monotonicity
    conditions by construction."""
    if max_worlds < 1 or max_domain < 1:
        raise FloretError("bounds must be at least 1")
    for n in range(1, max_worlds + 1):
        for le in _preorders(n):
            for sizes in itertools.product(*[range(1, max_domain + 1)] * n):
                if any(le[w][v] and sizes[w] > sizes[v]
                       for w in range(n) for v in range(n)):
                    continue
                pred_families = []
                per_pred_choices = []
                for pred, arity in predicates:
                    choices_per_world = []
                    for w in range(n):
                        tuples = list(itertools.product(range(sizes[w]), repeat=arity))
                        subsets = []
                        for r in range(len(tuples) + 1):
                            subsets.extend(itertools.combinations(tuples, r))
                        choices_per_world.append([tuple(sorted(s)) for s in subsets])
                    per_pred_choices.append((pred, choices_per_world))
                for assignment in _product_families(le, n, per_pred_choices):
                    yield KripkeModel(n, le, tuple(sizes), assignment)


def _product_families(le, n, per_pred_choices):
    if not per_pred_choices:
        yield ()
        return
    (pred, choices), rest = per_pred_choices[0], per_pred_choices[1:]
    for fam in _monotone_families(le, n, choices):
        for tail in _product_families(le, n, rest):
            yield ((pred, fam),) + tail


def random_model(rng: random.Random, max_worlds: int, max_domain: int,
                 predicates: tuple[tuple[str, int], ...]) -> KripkeModel:
    """A random model within bounds; monotonicity enforced by closure."""
    n = rng.randint(1, max_worlds)
    le = [[i == j for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.5:
                le[i][j] = True
    # transitive closure
    for k in range(n):
        for i in range(n):
            for j in range(n):
                le[i][j] = le[i][j] or (le[i][k] and le[k][j])
    sizes = [rng.randint(1, max_domain) for _ in range(n)]
    for w in range(n):
        for v in range(n):
            if le[w][v]:
                sizes[v] = max(sizes[v], sizes[w])
    interp = []
    for pred, arity in sorted(predicates):
        per_world: list[set[tuple[int, ...]]] = []
        for w in range(n):
            tuples = list(itertools.product(range(sizes[w]), repeat=arity))
            per_world.append({t for t in tuples if rng.random() < 0.4})
        for w in range(n):
            for v in range(n):
                if le[w][v]:
                    per_world[v] |= per_world[w]
        interp.append((pred, tuple(tuple(sorted(s)) for s in per_world)))
    m = KripkeModel(n, tuple(tuple(r) for r in le), tuple(sizes), tuple(interp))
    m.validate()
    return m


# ---------------------------------------------------------------------------
# Countermodel search

@dataclass(frozen=True)
class Countermodel:
    model: KripkeModel
    world: int
    evaluation: Evaluation
    subject: Bouquet

    def verify(self) -> bool:
        return not forces(self.model, self.world, self.evaluation, self.subject)

    def to_json(self) -> dict:
        return {
            "model": self.model.to_json(),
            "world": self.world,
            "evaluation": {v.display: x for v, x in self.evaluation.assignment},
            "subject": bouquet_text(self.subject),
        }

    def describe(self) -> str:
        ev = ", ".join(f"{v.display}={x}" for v, x in self.evaluation.assignment)
        head = f"countermodel at world {self.world}" + (f" with {ev}" if ev else "")
        return head + "\n" + self.model.describe()


def predicates_of(b: Bouquet) -> tuple[tuple[str, int], ...]:
    preds: dict[str, int] = {}
    stack = list(b)
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            preds[f.pred] = len(f.args)
        else:
            for g in (f.pistil, *f.petals):
                stack.extend(g.flowers)
    return tuple(sorted(preds.items()))


def find_countermodel(b: Bouquet, max_worlds: int = 2, max_domain: int = 1,
                      limit: int | None = None) -> Countermodel | None:
    """Exhaustive bounded search for a world and evaluation not forcing b."""
    preds = predicates_of(b)
    fv = sorted(free_vars(b), key=lambda v: v.id)
    count = 0
    for m in enumerate_models(max_worlds, max_domain, preds):
        count += 1
        if limit is not None and count > limit:
            return None
        for w in m.worlds():
            for combo in itertools.product(m.domain(w), repeat=len(fv)):
                e = Evaluation(tuple(zip(fv, combo)))
                if not forces(m, w, e, b):
                    cm = Countermodel(m, w, e, b)
                    assert cm.verify()
                    return cm
    return None
