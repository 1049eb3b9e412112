"""The thirteen rewrite rules, instance resolution and application.

Every rule is executed in its backward, bottom-up reading: ``apply_rule``
takes the current goal and returns the sufficient premiss.  Rule instances
carry their location as a :class:`~floret.paths.Path` plus name-based
parameters, resolved against the subject at application time, so that stored
instances replay against the canonical ordering.

Freshening policy: only newly created material (inserted payloads,
rule-induced duplicates) gets fresh binders; display names are primed only on
collision.  Retained material is never renamed, which keeps name-based
parameters of later steps valid.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from . import syntax
from .syntax import (
    Atom, Bloom, Bouquet, CaptureError, EMPTY_GARDEN, FloretError, Flower,
    Garden, VarId, all_displays, alpha_eq_flower, barendregt_ok,
    bouquet_text, canonical_sort, flower_text, free_var, free_vars,
    freshen, garden_text, is_empty_garden,
)
from .paths import (
    Context, Path, PISTIL, binder_scope, inversions, is_pollinated, iter_areas,
    pollination_candidates, split,
)


class SideConditionViolated(FloretError):
    def __init__(self, rule: str, reason: str):
        super().__init__(f"{rule}: {reason}")
        self.rule = rule
        self.reason = reason


class PolarityMismatch(SideConditionViolated):
    pass


class NotPollinated(SideConditionViolated):
    pass


class RuleName(str, enum.Enum):
    poll_down = "poll_down"
    poll_up = "poll_up"
    epis = "epis"
    epet = "epet"
    srep = "srep"
    ipis = "ipis"
    ipet = "ipet"
    grow = "grow"
    crop = "crop"
    pull = "pull"
    glue = "glue"
    apis = "apis"
    apet = "apet"

    def __str__(self) -> str:  # file tokens
        return self.value


NATURAL = frozenset({RuleName.poll_down, RuleName.poll_up, RuleName.epis,
                     RuleName.epet, RuleName.srep, RuleName.ipis, RuleName.ipet})
CULTURAL = frozenset({RuleName.grow, RuleName.crop, RuleName.pull,
                      RuleName.glue, RuleName.apis, RuleName.apet})
ALL_RULES = NATURAL | CULTURAL

# rules whose site must be positive / negative (backward reading)
_POSITIVE_ONLY = {RuleName.grow, RuleName.pull, RuleName.apis}
_NEGATIVE_ONLY = {RuleName.crop, RuleName.glue, RuleName.apet}


@dataclass(frozen=True)
class RuleInstance:
    rule: RuleName
    path: Path
    payload: Bouquet | None = None              # poll_up, grow
    glue_petals: tuple[Garden, ...] | None = None
    binders: tuple[str, ...] = ()               # names in the target sprinkler
    subst: tuple[tuple[str, str], ...] = ()     # (binder name, image name)
    petal: int | None = None                    # ipet, apet
    petals: tuple[int, ...] = ()                # pull
    case_index: int | None = None               # srep
    general: Flower | None = None               # apis
    general_petal: Garden | None = None         # apet
    nondup: bool = False                        # ipis, ipet

    def describe(self) -> str:
        bits = [f"{self.rule} @ {self.path.serialize()}"]
        if self.payload is not None:
            bits.append(f'payload="{bouquet_text(self.payload)}"')
        if self.glue_petals is not None:
            bits.append(f'payload="{" ; ".join(garden_text(g) or "." for g in self.glue_petals)}"')
        if self.case_index is not None:
            bits.append(f"case={self.case_index}")
        if self.petal is not None:
            bits.append(f"petal={self.petal}")
        if self.petals:
            bits.append("petals=%s" % ",".join(str(i) for i in self.petals))
        if self.general is not None:
            bits.append(f'general="{flower_text(self.general)}"')
        if self.general_petal is not None:
            bits.append(f'general="{garden_text(self.general_petal)}"')
        if self.binders:
            bits.append('binders="%s"' % ",".join(self.binders))
        if self.subst:
            bits.append('subst="%s"' % ", ".join(f"{k}:={v}" for k, v in self.subst))
        if self.nondup:
            bits.append("nondup")
        return " ".join(bits)


# ---------------------------------------------------------------------------
# Parameter resolution helpers

def _single_bloom(rule: RuleName, picked: Bouquet) -> Bloom:
    if len(picked) != 1 or not isinstance(picked[0], Bloom):
        raise SideConditionViolated(rule.value, "path must select exactly one non-atomic flower")
    return picked[0]


def _resolve_binders(rule: RuleName, g: Garden, names: tuple[str, ...]) -> tuple[VarId, ...]:
    by_name = {v.display: v for v in g.binders}
    out = []
    for n in names:
        if n not in by_name:
            raise SideConditionViolated(rule.value, f"no binder named {n!r} in the target sprinkler")
        out.append(by_name[n])
    if len(set(out)) != len(out):
        raise SideConditionViolated(rule.value, "repeated binder in parameter list")
    return tuple(out)


def _resolve_image(name: str, scope: list[VarId]) -> VarId:
    for v in reversed(scope):
        if v.display == name:
            return v
    return free_var(name)


def _resolve_subst(rule: RuleName, inst: RuleInstance, ys: tuple[VarId, ...],
                   scope: list[VarId]) -> dict[VarId, VarId]:
    declared = dict(inst.subst)
    if set(declared) != {v.display for v in ys}:
        raise SideConditionViolated(rule.value, "substitution support must equal the declared binders")
    sigma: dict[VarId, VarId] = {}
    yset = set(ys)
    for y in ys:
        img = _resolve_image(declared[y.display], scope)
        if img in yset:
            raise SideConditionViolated(rule.value, f"image {img.display!r} is itself being instantiated")
        sigma[y] = img
    return sigma


def _instance_of(rule: RuleName, pistil_rest: tuple[VarId, ...], body: Bouquet,
                 petals: tuple[Garden, ...], sigma: dict[VarId, VarId]) -> Bloom:
    """sigma applied to a flower stripped of the instantiated binders.

    The capture side-condition is exactly the one of the substitution
    extension: the image may not meet a binder of the stripped flower.
    """
    stripped = Bloom(Garden((), body), petals)
    try:
        out = syntax.apply_subst(sigma, (stripped,))[0]
    except CaptureError as e:
        raise SideConditionViolated(rule.value, str(e)) from None
    assert isinstance(out, Bloom)
    return Bloom(Garden(pistil_rest, out.pistil.flowers), out.petals)


def _freshen_payload(payload: Bouquet, subject: Bouquet) -> Bouquet:
    taken = all_displays(subject) | {v.display for v in free_vars(payload)}
    return freshen(payload, taken)


def _rebind(payload: Bouquet, scope: list[VarId]) -> Bouquet:
    """Re-anchor a payload's free variables by display name: to the innermost
    in-scope binder when one is spelled alike, to the interned free variable
    otherwise.  Rule payloads are name-based data (like proof-file text), so
    replaying a stored instance must not depend on the binder identities of
    the run that recorded it."""
    by_name: dict[str, VarId] = {}
    for v in scope:
        by_name[v.display] = v  # later entries are innermost

    def flower(f: Flower, bound: frozenset[int]) -> Flower:
        if isinstance(f, Atom):
            return Atom(f.pred, tuple(
                a if a.id in bound else by_name.get(a.display, free_var(a.display))
                for a in f.args))
        b2 = bound | {v.id for v in f.pistil.binders}
        pist = Garden(f.pistil.binders, tuple(flower(x, b2) for x in f.pistil.flowers))
        petals = tuple(
            Garden(p.binders, tuple(flower(x, b2 | {v.id for v in p.binders})
                                    for x in p.flowers))
            for p in f.petals)
        return Bloom(pist, petals)

    return tuple(flower(f, frozenset()) for f in payload)


def _rebind_garden(g: Garden, scope: list[VarId]) -> Garden:
    wrapped = _rebind((Bloom(g, ()),), scope)
    assert isinstance(wrapped[0], Bloom)
    return wrapped[0].pistil


def _freshen_garden(g: Garden, subject: Bouquet) -> Garden:
    wrapped = _freshen_payload((Bloom(g, ()),), subject)
    assert isinstance(wrapped[0], Bloom)
    return wrapped[0].pistil


def _require_polarity(inst: RuleInstance, ctx: Context) -> None:
    inv = inversions(ctx)
    if inst.rule in _POSITIVE_ONLY and inv % 2 != 0:
        raise PolarityMismatch(inst.rule.value, "requires a positive context")
    if inst.rule in _NEGATIVE_ONLY and inv % 2 != 1:
        raise PolarityMismatch(inst.rule.value, "requires a negative context")


# ---------------------------------------------------------------------------
# Application

def apply_rule(b: Bouquet, inst: RuleInstance, *, trusted_nondup: bool = False) -> Bouquet:
    """Rewrite the goal ``b`` to the premiss of the instance.

    Raises SideConditionViolated (or its PolarityMismatch / NotPollinated
    refinements), CaptureError wrapped as a side condition, or BadPath.
    """
    if inst.nondup and inst.rule not in (RuleName.ipis, RuleName.ipet):
        raise SideConditionViolated(inst.rule.value, "only ipis/ipet have a non-duplicating variant")
    ctx, picked = split(b, inst.path)
    _require_polarity(inst, ctx)
    handler = _HANDLERS[inst.rule]
    result = handler(b, inst, ctx, picked, trusted_nondup)
    result = canonical_sort(result)
    assert barendregt_ok(result), "rule application broke the binder convention"
    return result


def _apply_poll_down(b, inst, ctx, picked, _t):
    if not is_pollinated(picked, ctx):
        raise NotPollinated(inst.rule.value, "erased bouquet is not pollinated here")
    return ctx.fill(())


def _apply_poll_up(b, inst, ctx, picked, _t):
    if picked:
        raise SideConditionViolated(inst.rule.value, "insertion point must be a bare area")
    payload = _rebind(inst.payload or (), binder_scope(b, inst.path.steps))
    if not is_pollinated(payload, ctx):
        raise NotPollinated(inst.rule.value, "inserted bouquet is not pollinated here")
    return ctx.fill(_freshen_payload(payload, b))


def _apply_epis(b, inst, ctx, picked, _t):
    return ctx.fill((Bloom(EMPTY_GARDEN, (Garden((), picked),)),))


def _apply_epet(b, inst, ctx, picked, _t):
    f = _single_bloom(inst.rule, picked)
    if not any(is_empty_garden(p) for p in f.petals):
        raise SideConditionViolated(inst.rule.value, "flower has no empty petal")
    return ctx.fill(())


def _apply_srep(b, inst, ctx, picked, _t):
    f = _single_bloom(inst.rule, picked)
    c = inst.case_index
    if c is None or not (0 <= c < len(f.pistil.flowers)):
        raise SideConditionViolated(inst.rule.value, "case index out of range")
    case = f.pistil.flowers[c]
    if not isinstance(case, Bloom) or not is_empty_garden(case.pistil):
        raise SideConditionViolated(inst.rule.value, "selected pistil flower is not a case split")
    rest = f.pistil.flowers[:c] + f.pistil.flowers[c + 1:]
    branches = []
    for i, gamma in enumerate(case.petals):
        petals = f.petals if i == 0 else _freshen_petals(f.petals, b)
        branches.append(Bloom(gamma, petals))
    new = Bloom(Garden(f.pistil.binders, rest), (Garden((), tuple(branches)),))
    return ctx.fill((new,))


def _freshen_petals(petals: tuple[Garden, ...], subject: Bouquet) -> tuple[Garden, ...]:
    wrapped = _freshen_payload((Bloom(EMPTY_GARDEN, petals),), subject)
    assert isinstance(wrapped[0], Bloom)
    return wrapped[0].petals


def _apply_ipis(b, inst, ctx, picked, trusted):
    f = _single_bloom(inst.rule, picked)
    ys = _resolve_binders(inst.rule, f.pistil, inst.binders)
    if not ys:
        raise SideConditionViolated(inst.rule.value, "no binders to instantiate")
    xs = tuple(v for v in f.pistil.binders if v not in set(ys))
    scope = binder_scope(b, inst.path.steps) + list(f.pistil.binders)
    sigma = _resolve_subst(inst.rule, inst, ys, scope)
    instance = _instance_of(inst.rule, xs, f.pistil.flowers, f.petals, sigma)
    if inst.nondup:
        _check_nondup_erase(inst, ctx, negative_needed=True, trusted=trusted)
        return ctx.fill((instance,))
    copy = _freshen_payload((f,), b)
    return ctx.fill((instance,) + copy)


def _apply_ipet(b, inst, ctx, picked, trusted):
    f = _single_bloom(inst.rule, picked)
    k = inst.petal
    if k is None or not (0 <= k < len(f.petals)):
        raise SideConditionViolated(inst.rule.value, "petal index out of range")
    pet = f.petals[k]
    ys = _resolve_binders(inst.rule, pet, inst.binders)
    if not ys:
        raise SideConditionViolated(inst.rule.value, "no binders to instantiate")
    xs = tuple(v for v in pet.binders if v not in set(ys))
    scope = binder_scope(b, inst.path.steps) + list(f.pistil.binders) + list(pet.binders)
    sigma = _resolve_subst(inst.rule, inst, ys, scope)
    # capture-avoidance is demanded in the petal content only
    if not syntax.is_capture_avoiding(sigma, pet.flowers):
        raise SideConditionViolated(inst.rule.value, "substitution image meets a binder of the petal")
    body = syntax._subst_bouquet({k2: v for k2, v in sigma.items()}, pet.flowers)
    new_petal = _freshen_garden(Garden(xs, body), b)
    if inst.nondup:
        _check_nondup_erase(inst, ctx, negative_needed=False, trusted=trusted)
        petals = f.petals[:k] + (new_petal,) + f.petals[k + 1:]
    else:
        petals = f.petals[:k] + (new_petal, pet) + f.petals[k + 1:]
    return ctx.fill((Bloom(f.pistil, petals),))


def _check_nondup_erase(inst: RuleInstance, ctx: Context, *, negative_needed: bool,
                        trusted: bool) -> None:
    """The non-duplicating variants are the duplicating rule followed by an
    erasure (crop of the copy, pull of the petal), legal only at the matching
    polarity unless the explicitly trusted mode is on."""
    if trusted:
        return
    inv = inversions(ctx)
    ok = (inv % 2 == 1) if negative_needed else (inv % 2 == 0)
    if not ok:
        which = "crop" if negative_needed else "pull"
        raise PolarityMismatch(
            inst.rule.value,
            f"non-duplicating variant needs a {'negative' if negative_needed else 'positive'} "
            f"context for the implicit {which}")


def _apply_grow(b, inst, ctx, picked, _t):
    if picked:
        raise SideConditionViolated(inst.rule.value, "insertion point must be a bare area")
    payload = _rebind(inst.payload or (), binder_scope(b, inst.path.steps))
    return ctx.fill(_freshen_payload(payload, b))


def _apply_crop(b, inst, ctx, picked, _t):
    return ctx.fill(())


def _apply_pull(b, inst, ctx, picked, _t):
    f = _single_bloom(inst.rule, picked)
    drop = set(inst.petals)
    if not drop or any(not (0 <= i < len(f.petals)) for i in drop):
        raise SideConditionViolated(inst.rule.value, "petal indices out of range")
    petals = tuple(p for i, p in enumerate(f.petals) if i not in drop)
    return ctx.fill((Bloom(f.pistil, petals),))


def _apply_glue(b, inst, ctx, picked, _t):
    f = _single_bloom(inst.rule, picked)
    scope = binder_scope(b, inst.path.steps) + list(f.pistil.binders)
    new = tuple(_freshen_garden(_rebind_garden(g, scope), b)
                for g in (inst.glue_petals or ()))
    if not new:
        raise SideConditionViolated(inst.rule.value, "nothing to glue")
    return ctx.fill((Bloom(f.pistil, f.petals + new),))


def _apply_apis(b, inst, ctx, picked, _t):
    f = _single_bloom(inst.rule, picked)
    gen = inst.general
    if not isinstance(gen, Bloom):
        raise SideConditionViolated(inst.rule.value, "missing generalization")
    gen = _rebind((gen,), binder_scope(b, inst.path.steps))[0]
    assert isinstance(gen, Bloom)
    ys = _resolve_binders(inst.rule, gen.pistil, inst.binders)
    xs = tuple(v for v in gen.pistil.binders if v not in set(ys))
    scope = binder_scope(b, inst.path.steps) + list(gen.pistil.binders)
    sigma = _resolve_subst(inst.rule, inst, ys, scope)
    witness = _instance_of(inst.rule, xs, gen.pistil.flowers, gen.petals, sigma)
    if not alpha_eq_flower(witness, f):
        raise SideConditionViolated(inst.rule.value, "generalization does not map onto the current flower")
    return ctx.fill(_freshen_payload((gen,), b))


def _apply_apet(b, inst, ctx, picked, _t):
    f = _single_bloom(inst.rule, picked)
    k = inst.petal
    if k is None or not (0 <= k < len(f.petals)):
        raise SideConditionViolated(inst.rule.value, "petal index out of range")
    gen = inst.general_petal
    if gen is None:
        raise SideConditionViolated(inst.rule.value, "missing generalization")
    gen = _rebind_garden(gen, binder_scope(b, inst.path.steps) + list(f.pistil.binders))
    ys = _resolve_binders(inst.rule, gen, inst.binders)
    xs = tuple(v for v in gen.binders if v not in set(ys))
    scope = binder_scope(b, inst.path.steps) + list(f.pistil.binders) + list(gen.binders)
    sigma = _resolve_subst(inst.rule, inst, ys, scope)
    if not syntax.is_capture_avoiding(sigma, gen.flowers):
        raise SideConditionViolated(inst.rule.value, "substitution image meets a binder of the petal")
    witness = Garden(xs, syntax._subst_bouquet(dict(sigma), gen.flowers))
    if not _garden_alpha_eq(witness, f.petals[k]):
        raise SideConditionViolated(inst.rule.value, "generalization does not map onto the current petal")
    petals = f.petals[:k] + (_freshen_garden(gen, b),) + f.petals[k + 1:]
    return ctx.fill((Bloom(f.pistil, petals),))


def _garden_alpha_eq(g: Garden, h: Garden) -> bool:
    return alpha_eq_flower(Bloom(EMPTY_GARDEN, (g,)), Bloom(EMPTY_GARDEN, (h,)))


_HANDLERS = {
    RuleName.poll_down: _apply_poll_down,
    RuleName.poll_up: _apply_poll_up,
    RuleName.epis: _apply_epis,
    RuleName.epet: _apply_epet,
    RuleName.srep: _apply_srep,
    RuleName.ipis: _apply_ipis,
    RuleName.ipet: _apply_ipet,
    RuleName.grow: _apply_grow,
    RuleName.crop: _apply_crop,
    RuleName.pull: _apply_pull,
    RuleName.glue: _apply_glue,
    RuleName.apis: _apply_apis,
    RuleName.apet: _apply_apet,
}


# ---------------------------------------------------------------------------
# Instance enumeration

_PRIORITY = [RuleName.epet, RuleName.poll_down, RuleName.srep, RuleName.ipet,
             RuleName.ipis, RuleName.poll_up, RuleName.epis, RuleName.pull,
             RuleName.crop, RuleName.grow, RuleName.glue, RuleName.apis, RuleName.apet]


def applicable_instances(b: Bouquet, at: Path | None = None,
                         fragment: frozenset[RuleName] | set[RuleName] = ALL_RULES,
                         *, extra_images: tuple[str, ...] = (),
                         include_nondup: bool = False,
                         max_pull: int = 1) -> list[RuleInstance]:
    """Enumerate applicable instances, deterministically ordered.

    Complete for parameter-free applications; poll_up draws payloads from the
    pollination candidates of each area; ipis/ipet map one binder at a time to
    a variable visible in scope (plus ``extra_images``).  grow, glue, apis and
    apet have unbounded parameter spaces and are never enumerated.
    """
    fragment = frozenset(fragment)
    insts: list[RuleInstance] = []
    global_free = sorted({v.display for v in free_vars(b)})
    for steps, area in iter_areas(b):
        if at is not None and steps != at.steps:
            continue
        positive = sum(1 for _, p in steps if p == PISTIL) % 2 == 0
        scope_names = [v.display for v in binder_scope(b, steps)]
        for i, f in enumerate(area):
            path = Path(steps, frozenset({i}))
            if isinstance(f, Bloom):
                if RuleName.epet in fragment and any(is_empty_garden(p) for p in f.petals):
                    insts.append(RuleInstance(RuleName.epet, path))
                if RuleName.srep in fragment:
                    for c, cf in enumerate(f.pistil.flowers):
                        if isinstance(cf, Bloom) and is_empty_garden(cf.pistil):
                            insts.append(RuleInstance(RuleName.srep, path, case_index=c))
                if RuleName.ipis in fragment and f.pistil.binders:
                    images = _image_names(scope_names, [v.display for v in f.pistil.binders],
                                          global_free, extra_images)
                    for y in f.pistil.binders:
                        for img in images:
                            if img != y.display:
                                insts.append(RuleInstance(
                                    RuleName.ipis, path, binders=(y.display,),
                                    subst=((y.display, img),)))
                                if include_nondup and not positive:
                                    insts.append(replace(insts[-1], nondup=True))
                if RuleName.ipet in fragment:
                    for k, pet in enumerate(f.petals):
                        if not pet.binders:
                            continue
                        images = _image_names(
                            scope_names + [v.display for v in f.pistil.binders],
                            [v.display for v in pet.binders], global_free, extra_images)
                        for y in pet.binders:
                            for img in images:
                                if img != y.display:
                                    insts.append(RuleInstance(
                                        RuleName.ipet, path, petal=k, binders=(y.display,),
                                        subst=((y.display, img),)))
                                    if include_nondup and positive:
                                        insts.append(replace(insts[-1], nondup=True))
                if RuleName.pull in fragment and positive and f.petals:
                    for k in range(len(f.petals)):
                        insts.append(RuleInstance(RuleName.pull, path, petals=(k,)))
                if RuleName.crop in fragment and not positive:
                    insts.append(RuleInstance(RuleName.crop, path))
            if RuleName.epis in fragment:
                insts.append(RuleInstance(RuleName.epis, path))
            if RuleName.poll_down in fragment:
                ctx, picked = split(b, path)
                if is_pollinated(picked, ctx):
                    insts.append(RuleInstance(RuleName.poll_down, path))
        if RuleName.poll_up in fragment:
            area_path = Path(steps, None)
            ctx, _ = split(b, Path(steps, frozenset()))
            seen: set[str] = set()
            for cand in pollination_candidates(ctx):
                text = flower_text(cand)
                if text in seen:
                    continue
                seen.add(text)
                if any(alpha_eq_flower(cand, g) for g in area):
                    continue  # an alpha-copy is already present here
                insts.append(RuleInstance(RuleName.poll_up, area_path, payload=(cand,)))
    order = {r: i for i, r in enumerate(_PRIORITY)}
    insts.sort(key=lambda m: (order[m.rule], m.path.serialize(), m.describe()))
    return insts


def _image_names(scope: list[str], own: list[str], global_free: list[str],
                 extra: tuple[str, ...]) -> list[str]:
    out: list[str] = []
    for name in scope + own + global_free + list(extra):
        if name not in out:
            out.append(name)
    return out
