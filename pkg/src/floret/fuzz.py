"""Randomized soundness oracle: rule steps checked against the semantics.

Natural steps must relate semantically equivalent bouquets in every sampled
model; cultural steps must make the premiss entail the conclusion.  The
harness reports violations with reproduction seeds; a deliberately corrupted
erasure mode (the pollination side-condition skipped) demonstrates harness
sensitivity.

The report is written as a TSV table plus a matplotlib bar chart (rendered
lazily with the Agg backend so the kernel never needs a display).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .paths import Path, iter_areas, split
from .rules import (
    NATURAL, RuleInstance, RuleName, applicable_instances, apply_rule,
)
from .semantics import entails, random_model
from .syntax import (
    Atom, Bloom, Bouquet, FloretError, Flower, Garden, Signature, VarId,
    all_displays, bouquet_text, canonicalize, coin_display, free_var,
    free_vars, fresh_var,
)

FUZZ_SIGNATURE = Signature.of(a=0, b=0, p=1, q=1, r=2)
_FREE_POOL = ("u", "v", "w")


def random_bouquet(rng: random.Random, sig: Signature = FUZZ_SIGNATURE,
                   size: int = 6, max_depth: int = 3,
                   binder_chance: float = 0.5) -> Bouquet:
    """A canonical random bouquet; atoms draw variables from enclosing
    binders plus a small free pool."""
    preds = sig.predicates()

    def flower(budget: int, depth: int, scope: list[VarId]) -> tuple[Flower, int]:
        if depth == 0 or budget <= 1 or rng.random() < 0.45:
            pred, arity = preds[rng.randrange(len(preds))]
            args = tuple(_pick_var(rng, scope) for _ in range(arity))
            return Atom(pred, args), budget - 1
        budget -= 1
        pistil, budget = garden(budget, depth - 1, scope, allow_binders=True)
        petals = []
        for _ in range(rng.randint(0, 2)):
            p, budget = garden(budget, depth - 1, scope + list(pistil.binders), allow_binders=True)
            petals.append(p)
        return Bloom(pistil, tuple(petals)), budget

    def garden(budget: int, depth: int, scope: list[VarId],
               allow_binders: bool) -> tuple[Garden, int]:
        binders = []
        if allow_binders and rng.random() < binder_chance:
            binders.append(fresh_var(rng.choice("xyz")))
        inner = scope + binders
        flowers = []
        for _ in range(rng.randint(0, 2)):
            if budget <= 0:
                break
            f, budget = flower(budget, depth, inner)
            flowers.append(f)
        return Garden(tuple(binders), tuple(flowers)), budget

    out = []
    budget = size
    while budget > 0:
        f, budget = flower(budget, max_depth, [])
        out.append(f)
        if rng.random() < 0.3:
            break
    return canonicalize(tuple(out))


def _pick_var(rng: random.Random, scope: list[VarId]) -> VarId:
    if scope and rng.random() < 0.7:
        return rng.choice(scope)
    return free_var(rng.choice(_FREE_POOL))


# ---------------------------------------------------------------------------
# Random legal instances

def random_natural_instance(rng: random.Random, b: Bouquet) -> RuleInstance | None:
    insts = applicable_instances(b, fragment=NATURAL, extra_images=("u",))
    return rng.choice(insts) if insts else None


def random_cultural_instance(rng: random.Random, b: Bouquet,
                             sig: Signature = FUZZ_SIGNATURE) -> RuleInstance | None:
    """Draw a legal cultural instance, synthesizing parameters for the rules
    with unbounded parameter spaces (grow, glue, apis, apet)."""
    options: list[RuleInstance] = []
    options += applicable_instances(b, fragment={RuleName.pull, RuleName.crop})
    for steps, area in iter_areas(b):
        positive = sum(1 for _, p in steps if p == -1) % 2 == 0
        if positive:
            payload = random_bouquet(rng, sig, size=2, max_depth=1)
            options.append(RuleInstance(RuleName.grow, Path(steps, None), payload=payload))
        for i, f in enumerate(area):
            if not isinstance(f, Bloom):
                continue
            path = Path(steps, frozenset({i}))
            if not positive:
                petal = Garden((), random_bouquet(rng, sig, size=2, max_depth=1))
                options.append(RuleInstance(RuleName.glue, path, glue_petals=(petal,)))
            inst = _abstraction_instance(rng, b, steps, i, f, positive)
            if inst is not None:
                options.append(inst)
    return rng.choice(options) if options else None


def _abstraction_instance(rng: random.Random, b: Bouquet, steps, i: int,
                          f: Bloom, positive: bool) -> RuleInstance | None:
    """apis/apet built inversely: abstract the free occurrences of one
    variable behind a new binder, with the substitution witnessing the way
    back onto the current term."""
    path = Path(steps, frozenset({i}))
    if positive:
        fv = sorted(free_vars((f,)), key=lambda v: v.id)
        if not fv:
            return None
        v = rng.choice(fv)
        y = fresh_var(coin_display(v.display + "g", all_displays(b)))
        gen = Bloom(Garden(f.pistil.binders + (y,), _replace_bouquet(f.pistil.flowers, v, y)),
                    tuple(Garden(p.binders, _replace_bouquet(p.flowers, v, y)) for p in f.petals))
        return RuleInstance(RuleName.apis, path, general=gen,
                            binders=(y.display,), subst=((y.display, v.display),))
    if not f.petals:
        return None
    k = rng.randrange(len(f.petals))
    pet = f.petals[k]
    fv = sorted(free_vars(pet.flowers) - set(f.pistil.binders), key=lambda v: v.id)
    fv = [v for v in fv if v not in set(pet.binders)]
    if not fv:
        return None
    v = rng.choice(fv)
    y = fresh_var(coin_display(v.display + "g", all_displays(b)))
    gen = Garden(pet.binders + (y,), _replace_bouquet(pet.flowers, v, y))
    return RuleInstance(RuleName.apet, path, petal=k, general_petal=gen,
                        binders=(y.display,), subst=((y.display, v.display),))


def _replace_bouquet(b: Bouquet, old: VarId, new: VarId) -> Bouquet:
    def fl(f: Flower) -> Flower:
        if isinstance(f, Atom):
            return Atom(f.pred, tuple(new if a == old else a for a in f.args))
        return Bloom(Garden(f.pistil.binders, tuple(fl(x) for x in f.pistil.flowers)),
                     tuple(Garden(p.binders, tuple(fl(x) for x in p.flowers)) for p in f.petals))
    return tuple(fl(f) for f in b)


# ---------------------------------------------------------------------------
# The harness

@dataclass
class Violation:
    seed: int
    kind: str
    rule: str
    subject: str
    instance: str
    model: dict


@dataclass
class FuzzReport:
    seed: int
    natural_steps: int = 0
    cultural_steps: int = 0
    models_checked: int = 0
    per_rule: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_tsv(self) -> str:
        lines = ["rule\tsteps\tviolations"]
        for rule in sorted(self.per_rule):
            steps, bad = self.per_rule[rule]
            lines.append(f"{rule}\t{steps}\t{bad}")
        lines.append(f"total\t{self.natural_steps + self.cultural_steps}\t{len(self.violations)}")
        return "\n".join(lines) + "\n"

    def save_figure(self, path: str) -> None:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        rules = sorted(self.per_rule)
        steps = [self.per_rule[r][0] for r in rules]
        bad = [self.per_rule[r][1] for r in rules]
        fig, ax = plt.subplots(figsize=(8, 4))
        ax.bar(rules, steps, color="#7aa874", label="checked steps")
        ax.bar(rules, bad, color="#c23b22", label="violations")
        ax.set_ylabel("steps")
        ax.set_title(f"soundness fuzz (seed {self.seed})")
        ax.legend()
        plt.setp(ax.get_xticklabels(), rotation=30, ha="right")
        fig.tight_layout()
        fig.savefig(path, dpi=110)
        plt.close(fig)


def _bump(report: FuzzReport, rule: str, bad: bool) -> None:
    steps, old = report.per_rule.get(rule, (0, 0))
    report.per_rule[rule] = (steps + 1, old + (1 if bad else 0))


def fuzz_soundness(seed: int, n_natural: int = 1000, n_cultural: int = 500,
                   n_models: int = 10, bounds: tuple[int, int] = (3, 2),
                   sig: Signature = FUZZ_SIGNATURE,
                   mutate: str | None = None) -> FuzzReport:
    """Random legal steps checked against random finite models.

    ``mutate='skip_pollination'`` replaces poll_down by an unchecked erasure
    (performed directly on the context, bypassing the kernel) to show the
    harness catches unsound steps.
    """
    rng = random.Random(seed)
    report = FuzzReport(seed)
    max_w, max_d = bounds
    preds = sig.predicates()

    def check(kind: str, rule: str, before: Bouquet, after: Bouquet, inst_text: str) -> None:
        for _ in range(n_models):
            m = random_model(rng, max_w, max_d, preds)
            report.models_checked += 1
            ok = entails(m, after, before)  # premiss entails conclusion
            if ok and kind == "natural":
                ok = entails(m, before, after)  # invertibility
            if not ok:
                report.violations.append(Violation(
                    seed, kind, rule, bouquet_text(before), inst_text, m.to_json()))
                _bump(report, rule, True)
                return
        _bump(report, rule, False)

    while report.natural_steps < n_natural:
        b = random_bouquet(rng, sig)
        if mutate == "skip_pollination":
            inst_b, after = _mutant_erasure(rng, b)
            if inst_b is None:
                continue
            report.natural_steps += 1
            check("natural", "poll_down(mutated)", b, after, inst_b)
            continue
        inst = random_natural_instance(rng, b)
        if inst is None:
            continue
        try:
            after = apply_rule(b, inst)
        except FloretError:
            continue
        report.natural_steps += 1
        check("natural", inst.rule.value, b, after, inst.describe())

    while report.cultural_steps < n_cultural:
        b = random_bouquet(rng, sig)
        inst = random_cultural_instance(rng, b, sig)
        if inst is None:
            continue
        try:
            after = apply_rule(b, inst)
        except FloretError:
            continue
        report.cultural_steps += 1
        check("cultural", inst.rule.value, b, after, inst.describe())

    return report


def _mutant_erasure(rng: random.Random, b: Bouquet) -> tuple[str | None, Bouquet]:
    """An erasure with the pollination check disabled: pick any flower
    anywhere and delete it via the context, kernel not consulted."""
    spots = [(steps, i) for steps, area in iter_areas(b) for i in range(len(area))]
    if not spots:
        return None, b
    steps, i = rng.choice(spots)
    ctx, _picked = split(b, Path(steps, frozenset({i})))
    return f"erase @ {Path(steps, frozenset({i})).serialize()}", canonicalize(ctx.fill(()))
