"""Derivations, proof checking, proof files, lifting, deduction builders.

A derivation is a start bouquet plus a sequence of rule instances, each
stamped with the digest (first 8 hex chars of SHA-256 over the canonical
serialization) of its result.  Checking replays every step through
``apply_rule`` and compares digests; a proof is a derivation ending at the
empty bouquet.

Proof file format (line oriented)::

    # comment
    goal: <bouquet-text>
    <rule> @ <path> [key=value | key="value" | flag]... => <digest-hex8>
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, replace

from .parse import parse_bouquet, parse_garden, parse_petals
from .paths import (
    Context, Path, PISTIL, binder_scope, inversions, is_pollinated,
    iter_flowers, resolve_area, split,
)
from .rules import (
    CULTURAL, PolarityMismatch, RuleInstance, RuleName, apply_rule,
)
from .syntax import (
    Atom, Bloom, Bouquet, EMPTY_GARDEN, FloretError, Garden, Signature, VarId,
    all_displays, bound_vars, bouquet_text, canonical_sort, canonicalize,
    flower_key, flower_text, fresh_var, free_vars, garden_key, sort_area,
)


def digest(b: Bouquet) -> str:
    return hashlib.sha256(bouquet_text(b).encode()).hexdigest()[:8]


EMPTY_DIGEST = hashlib.sha256(b"").hexdigest()[:8]


@dataclass(frozen=True)
class Derivation:
    start: Bouquet
    steps: tuple[tuple[RuleInstance, str], ...]

    def instances(self) -> tuple[RuleInstance, ...]:
        return tuple(inst for inst, _ in self.steps)

    def final_digest(self) -> str:
        return self.steps[-1][1] if self.steps else digest(self.start)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    step_index: int | None = None
    reason: str | None = None
    final: Bouquet | None = None

    def __bool__(self) -> bool:
        return self.ok


def derive(start: Bouquet, instances, *, trusted_nondup: bool = False) -> Derivation:
    """Apply the instances in order, recording result digests."""
    cur = start
    steps = []
    for inst in instances:
        cur = apply_rule(cur, inst, trusted_nondup=trusted_nondup)
        steps.append((inst, digest(cur)))
    return Derivation(start, tuple(steps))


def replay(d: Derivation, *, trusted_nondup: bool = False) -> list[Bouquet]:
    """All intermediate states, start included; raises on a bad step."""
    states = [d.start]
    for inst, _dig in d.steps:
        states.append(apply_rule(states[-1], inst, trusted_nondup=trusted_nondup))
    return states


def check_derivation(d: Derivation, *, trusted_nondup: bool = False) -> CheckResult:
    cur = d.start
    for i, (inst, dig) in enumerate(d.steps):
        try:
            cur = apply_rule(cur, inst, trusted_nondup=trusted_nondup)
        except FloretError as e:
            return CheckResult(False, i, str(e))
        if digest(cur) != dig:
            return CheckResult(False, i, f"digest mismatch: got {digest(cur)}, recorded {dig}")
    return CheckResult(True, None, None, cur)


def is_proof(d: Derivation) -> bool:
    res = check_derivation(d)
    return res.ok and res.final == ()


# ---------------------------------------------------------------------------
# Proof files

_STEP_RE = re.compile(r"^(\w+)\s+@\s+(\S+)\s*(.*?)\s*=>\s*([0-9a-f]{8})$")
_PARAM_RE = re.compile(r'(\w+)="([^"]*)"|(\w+)=([^\s"]+)|(\w+)')


def format_proof(d: Derivation) -> str:
    lines = [f"goal: {bouquet_text(d.start)}"]
    lines += [f"{inst.describe()} => {dig}" for inst, dig in d.steps]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class _RawStep:
    rule: RuleName
    path: Path
    params: dict
    flags: frozenset[str]
    digest: str
    line: int


def _parse_steps(text: str) -> tuple[str, list[_RawStep]]:
    goal_text = None
    steps = []
    for ln, line in enumerate(text.splitlines(), 1):
        # '#' starts a comment only at the start of a line or after blank
        # space; selection terminals like area#{0} keep their '#'
        line = re.sub(r"(^|\s)#.*$", r"\1", line).strip()
        if not line:
            continue
        if line.startswith("goal:"):
            if goal_text is not None:
                raise FloretError(f"line {ln}: duplicate goal header")
            goal_text = line[len("goal:"):].strip()
            continue
        m = _STEP_RE.match(line)
        if not m:
            raise FloretError(f"line {ln}: malformed step")
        rule_name, path_text, params_text, dig = m.groups()
        try:
            rule = RuleName(rule_name)
        except ValueError:
            raise FloretError(f"line {ln}: unknown rule {rule_name!r}") from None
        params: dict = {}
        flags = set()
        for pm in _PARAM_RE.finditer(params_text):
            if pm.group(1):
                params[pm.group(1)] = pm.group(2)
            elif pm.group(3):
                params[pm.group(3)] = pm.group(4)
            else:
                flags.add(pm.group(5))
        steps.append(_RawStep(rule, Path.parse(path_text), params, frozenset(flags), dig, ln))
    if goal_text is None:
        raise FloretError("missing 'goal:' header")
    return goal_text, steps


def _scope_at(b: Bouquet, steps, extra: tuple[VarId, ...] = ()) -> dict[str, VarId]:
    scope: dict[str, VarId] = {}
    for v in binder_scope(b, steps) + list(extra):
        scope[v.display] = v
    return scope


def _resolve_raw(raw: _RawStep, cur: Bouquet, sig: Signature) -> RuleInstance:
    inst = RuleInstance(raw.rule, raw.path, nondup="nondup" in raw.flags)
    p = raw.params
    if "case" in p:
        inst = replace(inst, case_index=int(p["case"]))
    if "petal" in p:
        inst = replace(inst, petal=int(p["petal"]))
    if "petals" in p:
        inst = replace(inst, petals=tuple(int(s) for s in p["petals"].split(",") if s))
    if "binders" in p:
        inst = replace(inst, binders=tuple(s.strip() for s in p["binders"].split(",") if s.strip()))
    if "subst" in p:
        pairs = []
        for item in p["subst"].split(","):
            item = item.strip()
            if not item:
                continue
            if ":=" not in item:
                raise FloretError(f"line {raw.line}: bad substitution item {item!r}")
            k, v = item.split(":=", 1)
            pairs.append((k.strip(), v.strip()))
        inst = replace(inst, subst=tuple(pairs))
    if "payload" in p:
        scope = _scope_at(cur, raw.path.steps)
        if raw.rule == RuleName.glue:
            f = _target_bloom(cur, raw.path)
            scope = _scope_at(cur, raw.path.steps, f.pistil.binders)
            inst = replace(inst, glue_petals=parse_petals(p["payload"], sig, scope))
        else:
            inst = replace(inst, payload=parse_bouquet(p["payload"], sig, scope, canonical=False))
    if "general" in p:
        if raw.rule == RuleName.apet:
            f = _target_bloom(cur, raw.path)
            scope = _scope_at(cur, raw.path.steps, f.pistil.binders)
            inst = replace(inst, general_petal=parse_garden(p["general"], sig, scope))
        else:
            scope = _scope_at(cur, raw.path.steps)
            flower = parse_bouquet(p["general"], sig, scope, canonical=False)
            if len(flower) != 1:
                raise FloretError(f"line {raw.line}: generalization must be a single flower")
            inst = replace(inst, general=flower[0])
    return inst


def _target_bloom(cur: Bouquet, path: Path) -> Bloom:
    area = resolve_area(cur, path.steps)
    sel = sorted(path.selection or ())
    if len(sel) == 1 and 0 <= sel[0] < len(area) and isinstance(area[sel[0]], Bloom):
        return area[sel[0]]  # type: ignore[return-value]
    raise FloretError("path must select one non-atomic flower")


def check_proof_text(text: str, sig: Signature, *, trusted_nondup: bool = False,
                     require_proof: bool = True) -> CheckResult:
    """Parse and replay a proof file; never raises on malformed steps."""
    try:
        goal_text, raws = _parse_steps(text)
        cur = parse_bouquet(goal_text, sig)
    except FloretError as e:
        return CheckResult(False, None, f"parse: {e}")
    for i, raw in enumerate(raws):
        try:
            inst = _resolve_raw(raw, cur, sig)
            cur = apply_rule(cur, inst, trusted_nondup=trusted_nondup)
        except FloretError as e:
            return CheckResult(False, i, f"line {raw.line}: {e}")
        if digest(cur) != raw.digest:
            return CheckResult(False, i,
                               f"line {raw.line}: digest mismatch: got {digest(cur)}, recorded {raw.digest}")
    if require_proof and cur != ():
        return CheckResult(False, len(raws), "derivation does not end at the empty bouquet", cur)
    return CheckResult(True, None, None, cur)


def load_proof(text: str, sig: Signature, *, trusted_nondup: bool = False) -> Derivation:
    """Parse a proof file into a resolved, digest-stamped derivation."""
    goal_text, raws = _parse_steps(text)
    cur = parse_bouquet(goal_text, sig)
    start = cur
    steps = []
    for raw in raws:
        inst = _resolve_raw(raw, cur, sig)
        cur = apply_rule(cur, inst, trusted_nondup=trusted_nondup)
        steps.append((inst, raw.digest))
    return Derivation(start, tuple(steps))


# ---------------------------------------------------------------------------
# Disjoint renaming and lifting

def derivation_displays(d: Derivation) -> set[str]:
    """Every display name that can occur while replaying ``d``."""
    names: set[str] = set()
    for s in replay(d):
        names |= all_displays(s)
    for inst, _ in d.steps:
        extra = list(inst.payload or ())
        if inst.general is not None:
            extra.append(inst.general)
        for g in (inst.glue_petals or ()) + ((inst.general_petal,) if inst.general_petal else ()):
            extra.append(Bloom(g, ()))
        names |= all_displays(tuple(extra))
        names.update(n for _, n in inst.subst)
    return names


def rename_disjoint(b: Bouquet, avoid: set[str]) -> Bouquet:
    """Alpha-copy with every binder renamed into a ``base_N`` namespace that
    avoids the given names (and their prime closure: the new names carry no
    trailing prime, so collision with primed coinage is impossible)."""
    avoid = set(avoid) | {v.display for v in free_vars(b)}
    counter = [0]

    def pick(base: str) -> str:
        base = base.rstrip("'")
        while True:
            counter[0] += 1
            cand = f"{base}_{counter[0]}"
            if cand not in avoid:
                avoid.add(cand)
                return cand

    def walk_flower(f, env):
        if isinstance(f, Atom):
            return Atom(f.pred, tuple(env.get(a.id, a) for a in f.args))
        pist, penv = walk_garden(f.pistil, env)
        return Bloom(pist, tuple(walk_garden(p, penv)[0] for p in f.petals))

    def walk_garden(g, env):
        env = dict(env)
        binders = []
        for v in g.binders:
            nv = fresh_var(pick(v.display))
            env[v.id] = nv
            binders.append(nv)
        return Garden(tuple(binders), tuple(walk_flower(f, env) for f in g.flowers)), env

    return canonical_sort(tuple(walk_flower(f, {}) for f in b))


_HOLE_MARK = "\x00hole"


def rename_context(ctx: Context, avoid: set[str]) -> Context:
    """Rename the context's binders away from ``avoid``, keeping the hole.

    The hole survives the re-sorting that renaming entails by temporarily
    marking its area with a reserved atom.
    """
    if not (all_displays(ctx.base) - {v.display for v in free_vars(ctx.base)}) & avoid:
        return ctx
    if ctx.removed_at:
        raise FloretError("cannot rename a context holding extracted content")
    marked = ctx.fill((Atom(_HOLE_MARK, ()),))
    renamed = rename_disjoint(marked, avoid)
    for steps, i, f in iter_flowers(renamed):
        if isinstance(f, Atom) and f.pred == _HOLE_MARK:
            base, _ = split(renamed, Path(steps, frozenset({i})))
            return Context(base.base, steps)
    raise AssertionError("hole marker lost during renaming")


def lift(d: Derivation, ctx: Context) -> Derivation:
    """Re-address every step of ``d`` under the context.

    Natural steps lift anywhere; cultural steps demand a positive context
    (their polarity is preserved by the parity argument).  The context's
    binders are renamed apart from everything the derivation can mention, so
    the recorded instances replay unchanged apart from path remapping: each
    step re-sorts every ancestor area of the hole (the embedded subject's
    print changes), so the hole path is recomputed against every state.
    """
    if any(inst.rule in CULTURAL for inst, _ in d.steps) and inversions(ctx) % 2 == 1:
        raise PolarityMismatch("lift", "cultural steps cannot be lifted under a negative context")
    states = replay(d)
    ctx = rename_context(ctx, derivation_displays(d))
    rest = resolve_area(ctx.base, ctx.steps)
    embedded = [_embed_area(ctx.base, ctx.steps, sort_area(rest + s)) for s in states]
    start = embedded[0][0]
    out = []
    cur = start
    for k, (inst, _dig) in enumerate(d.steps):
        out.append(_translate(inst, embedded[k][1], rest, states[k]))
        cur = apply_rule(cur, out[-1], trusted_nondup=True)
        if bouquet_text(cur) != bouquet_text(embedded[k + 1][0]):
            raise FloretError("lifted step diverged from the embedded derivation")
    return derive(start, out, trusted_nondup=True)


def _embed_area(area: Bouquet, steps, content: Bouquet) -> tuple[Bouquet, tuple]:
    """Replace the area addressed by ``steps`` with ``content``, re-sorting
    every area and sprinkler on the way out; returns the rebuilt area plus
    the hole path re-addressed against the new ordering."""
    from .syntax import _order_binders
    if not steps:
        return sort_area(content), ()
    (idx, part), tail = steps[0], steps[1:]
    f = area[idx]
    assert isinstance(f, Bloom)
    siblings = area[:idx] + area[idx + 1:]
    if part == PISTIL:
        sub, sub_steps = _embed_area(f.pistil.flowers, tail, content)
        garden = _order_binders(Garden(f.pistil.binders, sub))
        f2 = Bloom(garden, f.petals)
        new_part = PISTIL
    else:
        pet = f.petals[part]
        sub, sub_steps = _embed_area(pet.flowers, tail, content)
        garden = _order_binders(Garden(pet.binders, sub))
        petals = list(f.petals)
        petals[part] = garden
        sorted_petals = sorted(petals, key=garden_key)
        new_part = next(i for i, p in enumerate(sorted_petals) if p is garden)
        f2 = Bloom(f.pistil, tuple(sorted_petals))
    new_area = sort_area(siblings + (f2,))
    new_idx = next(i for i, x in enumerate(new_area) if x is f2)
    return new_area, ((new_idx, new_part),) + sub_steps


def _fill_exact(ctx: Context, area: Bouquet) -> Bouquet:
    from .paths import _rebuild
    return _rebuild(ctx.base, ctx.steps, lambda _a: area)


def _merged_pos(rest: Bouquet, added: Bouquet, j: int) -> int:
    kj = flower_key(added[j])
    return (sum(1 for r in rest if flower_key(r) <= kj)
            + sum(1 for i in range(j) if flower_key(added[i]) <= kj))


def _translate(inst: RuleInstance, hole_steps, rest: Bouquet, state: Bouquet) -> RuleInstance:
    """Remap an instance recorded against ``state`` to the merged area
    ``sorted(rest + state)`` sitting at the (re-addressed) hole."""
    p = inst.path
    if p.steps:
        (idx, part), tail = p.steps[0], p.steps[1:]
        new = hole_steps + ((_merged_pos(rest, state, idx), part),) + tail
        return replace(inst, path=Path(new, p.selection))
    sel = None if p.selection is None else frozenset(_merged_pos(rest, state, i) for i in p.selection)
    return replace(inst, path=Path(hole_steps, sel))


# ---------------------------------------------------------------------------
# Strong deduction (both directions) and the deduction-theorem demonstration

def deduction_flower(hyps: Bouquet, goal: Bouquet) -> Bouquet:
    """The canonical single flower ( hyps |> goal )."""
    return canonicalize((Bloom(Garden((), hyps), (Garden((), goal),)),))


def _expect_deduction_flower(b: Bouquet) -> tuple[Bouquet, Bouquet]:
    if (len(b) == 1 and isinstance(b[0], Bloom) and len(b[0].petals) == 1
            and not b[0].pistil.binders and not b[0].petals[0].binders):
        return b[0].pistil.flowers, b[0].petals[0].flowers
    raise FloretError("expected a single flower ( hyps |> goal ) with bare gardens")


def build_strong_deduction_fwd(d: Derivation) -> Derivation:
    """From a derivation Phi ~> Psi, a proof of the flower ( Psi |> Phi ).

    The script lifts ``d`` through the positive context ( Psi |> [] ), then
    erases the petal copy of Psi by poll_down (justified by the pistil) and
    finishes with epet.  The pistil carries a disjointly renamed alpha-copy of
    Psi so the lifted instances replay verbatim.
    """
    res = check_derivation(d)
    if not res.ok:
        raise FloretError(f"input derivation does not check: step {res.step_index}: {res.reason}")
    phi, psi = d.start, res.final
    assert psi is not None
    psi_star = rename_disjoint(psi, derivation_displays(d))
    host = Bloom(Garden((), psi_star), (Garden((), ()),))
    ctx = Context((host,), ((0, 0),))
    lifted = lift(d, ctx)
    insts = list(lifted.instances())
    # the script's poll_down is emitted even for an empty Psi (vacuously legal)
    insts.append(RuleInstance(RuleName.poll_down,
                              Path(((0, 0),), frozenset(range(len(psi))))))
    insts.append(RuleInstance(RuleName.epet, Path((), frozenset({0}))))
    return derive(lifted.start, insts)


def _find_flower(state: Bouquet, text: str) -> int:
    for i, f in enumerate(state):
        if flower_text(f) == text:
            return i
    raise AssertionError(f"flower {text!r} not found while scripting")


def _select_prints(state: Bouquet, wanted: Bouquet) -> frozenset[int]:
    """Indices realizing the multiset of prints of ``wanted`` inside ``state``."""
    need: dict[str, int] = {}
    for f in wanted:
        t = flower_text(f)
        need[t] = need.get(t, 0) + 1
    sel = set()
    for i, f in enumerate(state):
        t = flower_text(f)
        if need.get(t, 0) > 0:
            need[t] -= 1
            sel.add(i)
    if any(n > 0 for n in need.values()):
        raise AssertionError("selection target not present while scripting")
    return frozenset(sel)


def build_strong_deduction_bwd(p: Derivation) -> Derivation:
    """From a proof of ( Psi |> Phi ), a checked derivation Phi ~> Psi.

    Emits the ten-line script: epis, grow, poll_up, the lifted input proof,
    grow, poll_down, srep, poll_down, epet, epet.  A two-step alpha-bridge
    (poll_up of a renamed copy of Phi, poll_down of the original) precedes it
    whenever Phi carries binders, so both endpoints stay exactly Phi and Psi.
    """
    if not is_proof(p):
        raise FloretError("input is not a checked proof")
    psi, phi = _expect_deduction_flower(p.start)
    avoid = derivation_displays(p)
    phi_t = rename_disjoint(phi, avoid)
    g_tt = rename_disjoint(p.start, avoid | all_displays(phi_t))
    g_flower = g_tt[0]
    assert isinstance(g_flower, Bloom)

    insts: list[RuleInstance] = []
    cur: Bouquet = phi

    def step(inst: RuleInstance) -> None:
        nonlocal cur
        insts.append(inst)
        cur = apply_rule(cur, inst)

    if bound_vars(phi):
        step(RuleInstance(RuleName.poll_up, Path((), None), payload=phi_t))
        step(RuleInstance(RuleName.poll_down, Path((), _select_prints(cur, phi))))
    body_petal = Garden((), cur)
    wrapped = Bloom(EMPTY_GARDEN, (body_petal,))
    step(RuleInstance(RuleName.epis, Path((), frozenset(range(len(cur))))))
    step(RuleInstance(RuleName.grow, Path((), None), payload=p.start))
    step(RuleInstance(RuleName.poll_up,
                      Path(((_find_flower(cur, flower_text(wrapped)), PISTIL),), None),
                      payload=g_tt))
    host = Bloom(Garden((), (g_flower,)), (body_petal,))
    lifted = lift(p, Context((host,), ()))
    for inst in lifted.instances():
        step(inst)
    # cur == (host,): a flower ( <g_tt> |> <phi_t> )
    if psi:
        step(RuleInstance(RuleName.grow, Path((), None), payload=psi))
        ih = _find_flower(cur, flower_text(host))
        step(RuleInstance(RuleName.poll_down,
                          Path(((ih, PISTIL), (0, PISTIL)),
                               frozenset(range(len(g_flower.pistil.flowers))))))
    case = Bloom(EMPTY_GARDEN, g_flower.petals)
    host2 = Bloom(Garden((), (case,)), (body_petal,))
    step(RuleInstance(RuleName.srep,
                      Path((), frozenset({_find_flower(cur, flower_text(host2))})),
                      case_index=0))
    branch = Bloom(g_flower.petals[0], (body_petal,))
    shell = Bloom(EMPTY_GARDEN, (Garden((), (branch,)),))
    i9 = _find_flower(cur, flower_text(shell))
    n_phi = len(branch.petals[0].flowers)
    if n_phi:
        step(RuleInstance(RuleName.poll_down, Path(((i9, 0), (0, 0)), frozenset(range(n_phi)))))
        branch = Bloom(g_flower.petals[0], (EMPTY_GARDEN,))
        shell = Bloom(EMPTY_GARDEN, (Garden((), (branch,)),))
        i9 = _find_flower(cur, flower_text(shell))
    step(RuleInstance(RuleName.epet, Path(((i9, 0),), frozenset({0}))))
    shell = Bloom(EMPTY_GARDEN, (EMPTY_GARDEN,))
    step(RuleInstance(RuleName.epet, Path((), frozenset({_find_flower(cur, flower_text(shell))}))))
    if bouquet_text(cur) != bouquet_text(psi):
        raise FloretError("deduction script did not land on the expected endpoint")
    return derive(phi, insts)


def deduction_demo(p: Derivation, ctx: Context) -> Derivation:
    """App-style demonstration: from a proof of ( Psi |> Phi ) and a context
    pollinating Psi, a natural derivation of ctx[Phi] down to ctx[].

    The script is epis on Phi at the hole, poll_up of Psi into the fresh
    pistil, then the lifted input proof.  Context binders are renamed apart
    when they collide with the proof's names (the result then demonstrates an
    alpha-variant context).
    """
    if not is_proof(p):
        raise FloretError("input is not a checked proof")
    psi, phi = _expect_deduction_flower(p.start)
    ctx = rename_context(ctx, derivation_displays(p))
    if not is_pollinated(psi, ctx):
        raise FloretError("hypotheses are not pollinated in the context")
    start = ctx.fill(phi)
    insts: list[RuleInstance] = []
    cur = start

    def step(inst: RuleInstance) -> None:
        nonlocal cur
        insts.append(inst)
        cur = apply_rule(cur, inst)

    area = resolve_area(cur, ctx.steps)
    step(RuleInstance(RuleName.epis, Path(ctx.steps, _select_prints(area, phi))))
    area = resolve_area(cur, ctx.steps)
    wrapped_text = flower_text(Bloom(EMPTY_GARDEN, (Garden((), sort_area(phi)),)))
    iw = _find_flower(area, wrapped_text)
    if psi:
        step(RuleInstance(RuleName.poll_up, Path(ctx.steps + ((iw, PISTIL),), None), payload=psi))
    area = resolve_area(cur, ctx.steps)
    target_text = flower_text(p.start[0])
    ig = _find_flower(area, target_text)
    rest = tuple(f for i, f in enumerate(area) if i != ig)
    sub_ctx = Context(_fill_exact(Context(cur, ctx.steps), rest), ctx.steps)
    lifted = lift(p, sub_ctx)
    for inst in lifted.instances():
        step(inst)
    if bouquet_text(cur) != bouquet_text(ctx.fill(())):
        raise FloretError("demonstration did not land on the filled context")
    return derive(start, insts)
