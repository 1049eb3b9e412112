"""Inductive term language: flowers, gardens, bouquets.

A flower is either an atomic predicate applied to variables, or a bloom
``pistil |> petal ; ... ; petal`` whose pistil and petals are gardens.  A
garden is a set of variable binders (its sprinkler) together with a multiset
of flowers, and a bouquet is a multiset of flowers.  Multisets are stored as
tuples sorted under a deterministic term order so that structurally equal
terms have identical canonical encodings.

Terms are immutable values and safe to share between threads; the only
mutable global is the fresh-id counter, which is an atomic ``itertools.count``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union


class FloretError(Exception):
    """Base class for every error raised by this package."""


class ArityError(FloretError):
    """A predicate was used with the wrong number of arguments."""


class CaptureError(FloretError):
    """A substitution would capture a variable under a binder."""


# ---------------------------------------------------------------------------
# Variables and signatures

_ids = itertools.count(1)


@dataclass(frozen=True)
class VarId:
    """A variable. Identity is the numeric id; the display name is a hint."""

    id: int
    display: str = field(compare=False)

    def __repr__(self) -> str:
        return f"{self.display}#{self.id}"


_free_table: dict[str, VarId] = {}


def free_var(name: str) -> VarId:
    """Interned free variable: the same name always yields the same VarId."""
    v = _free_table.get(name)
    if v is None:
        v = VarId(next(_ids), name)
        _free_table[name] = v
    return v


def fresh_var(display: str) -> VarId:
    """A brand new variable (binder) with the given display name."""
    return VarId(next(_ids), display)


def coin_display(base: str, taken: set[str]) -> str:
    """Pick a fresh display name by priming ``base`` until unused."""
    name = base
    while name in taken:
        name += "'"
    return name


@dataclass(frozen=True)
class Signature:
    """Predicate symbols with arities.  Text format: one ``name arity`` per line."""

    arities: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_map", dict(self.arities))

    @classmethod
    def of(cls, **kwargs: int) -> "Signature":
        return cls(tuple(sorted(kwargs.items())))

    @classmethod
    def from_text(cls, text: str) -> "Signature":
        entries = []
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise ArityError(f"signature line {ln}: expected 'name arity', got {line!r}")
            entries.append((parts[0], int(parts[1])))
        return cls(tuple(sorted(entries)))

    def to_text(self) -> str:
        return "".join(f"{name} {arity}\n" for name, arity in self.arities)

    def arity(self, name: str) -> int:
        m: Mapping[str, int] = self._map  # type: ignore[attr-defined]
        if name not in m:
            raise ArityError(f"unknown predicate {name!r}")
        return m[name]

    def predicates(self) -> tuple[tuple[str, int], ...]:
        return self.arities


# ---------------------------------------------------------------------------
# Terms

@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[VarId, ...]


@dataclass(frozen=True)
class Garden:
    binders: tuple[VarId, ...]
    flowers: tuple["Flower", ...]


@dataclass(frozen=True)
class Bloom:
    pistil: Garden
    petals: tuple[Garden, ...]


Flower = Union[Atom, Bloom]
Bouquet = tuple[Flower, ...]

EMPTY_GARDEN = Garden((), ())


def atom(pred: str, *names: str) -> Atom:
    """Convenience constructor over interned free variables."""
    return Atom(pred, tuple(free_var(n) for n in names))


def bloom(pistil: Garden, *petals: Garden) -> Bloom:
    return Bloom(pistil, tuple(petals))


def garden(binders: Iterable[VarId] = (), flowers: Iterable[Flower] = ()) -> Garden:
    return Garden(tuple(binders), tuple(flowers))


def is_empty_garden(g: Garden) -> bool:
    return not g.binders and not g.flowers


# ---------------------------------------------------------------------------
# Free and bound variables

def free_vars(b: Bouquet) -> frozenset[VarId]:
    return frozenset().union(*(_fv_flower(f) for f in b)) if b else frozenset()


def _fv_flower(f: Flower) -> frozenset[VarId]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    # fv(<x.Phi |> Delta>) = fv(<x.Phi>) u U fv(<x,y.Psi>) over petals <y.Psi>
    pist = f.pistil
    out = fv_garden(pist)
    px = frozenset(pist.binders)
    for pet in f.petals:
        out |= (free_vars(pet.flowers) - frozenset(pet.binders)) - px
    return out


def fv_garden(g: Garden) -> frozenset[VarId]:
    return free_vars(g.flowers) - frozenset(g.binders)


def bound_vars(b: Bouquet) -> Counter:
    """Multiset of all binders at every depth."""
    out: Counter = Counter()
    for f in b:
        _bv_flower(f, out)
    return out


def _bv_flower(f: Flower, out: Counter) -> None:
    if isinstance(f, Atom):
        return
    for g in (f.pistil, *f.petals):
        out.update(g.binders)
        for sub in g.flowers:
            _bv_flower(sub, out)


def barendregt_ok(b: Bouquet) -> bool:
    """Both convention clauses: bv has no duplicates and is disjoint from fv."""
    bv = bound_vars(b)
    if any(n > 1 for n in bv.values()):
        return False
    return not (set(bv) & free_vars(b))


# ---------------------------------------------------------------------------
# Substitution (variables to variables, finite support)

Substitution = Mapping[VarId, VarId]


def subst_support(s: Substitution) -> frozenset[VarId]:
    return frozenset(k for k, v in s.items() if k != v)


def is_capture_avoiding(s: Substitution, b: Bouquet) -> bool:
    """The image must not meet a binder of b, by identity or by name (two
    variables spelled alike are the same variable in the written calculus)."""
    image = {s[k] for k in subst_support(s)}
    bv = set(bound_vars(b))
    if image & bv:
        return False
    bv_displays = {v.display for v in bv}
    return not any(v.display in bv_displays for v in image)


def apply_subst(s: Substitution, b: Bouquet) -> Bouquet:
    """Apply a substitution; the support is dropped under each binder it meets."""
    if not is_capture_avoiding(s, b):
        raise CaptureError("substitution image meets a binder of the subject")
    s = {k: v for k, v in s.items() if k != v}
    return _subst_bouquet(s, b)


def _subst_bouquet(s: Substitution, b: Bouquet) -> Bouquet:
    if not s:
        return b
    return tuple(_subst_flower(s, f) for f in b)


def _subst_flower(s: Substitution, f: Flower) -> Flower:
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(s.get(a, a) for a in f.args))
    pist = _subst_garden(s, f.pistil)
    under = {k: v for k, v in s.items() if k not in set(f.pistil.binders)}
    return Bloom(pist, tuple(_subst_garden(under, p) for p in f.petals))


def _subst_garden(s: Substitution, g: Garden) -> Garden:
    under = {k: v for k, v in s.items() if k not in set(g.binders)}
    return Garden(g.binders, _subst_bouquet(under, g.flowers))


# ---------------------------------------------------------------------------
# Depth

def depth(f: Flower) -> int:
    if isinstance(f, Atom):
        return 0
    return 1 + max(garden_depth(f.pistil), max((garden_depth(p) for p in f.petals), default=0))


def garden_depth(g: Garden) -> int:
    return max((depth(f) for f in g.flowers), default=0)


def bouquet_depth(b: Bouquet) -> int:
    return max((depth(f) for f in b), default=0)


# ---------------------------------------------------------------------------
# Printing (the canonical serialization)

def flower_text(f: Flower) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(a.display for a in f.args)})"
    inner = garden_text(f.pistil)
    # the empty garden is written "." in petal position, so that a flower
    # with one empty petal stays distinct from a flower with no petals
    petals = " ; ".join(garden_text(p) or "." for p in f.petals)
    head = f"[{inner} |>" if inner else "[|>"
    return f"{head} {petals}]" if petals else f"{head}]"


def garden_text(g: Garden) -> str:
    binders = ", ".join(v.display for v in g.binders)
    flowers = bouquet_text(g.flowers)
    if binders and flowers:
        return f"{binders}. {flowers}"
    if binders:
        return f"{binders}."
    return flowers


def bouquet_text(b: Bouquet) -> str:
    return ", ".join(flower_text(f) for f in b)


# ---------------------------------------------------------------------------
# Canonical term order

def flower_key(f: Flower):
    if isinstance(f, Atom):
        return (0, f.pred, len(f.args), tuple(a.display for a in f.args))
    return (1, garden_key(f.pistil), tuple(garden_key(p) for p in f.petals))


def garden_key(g: Garden):
    return (tuple(v.display for v in g.binders), tuple(flower_key(f) for f in g.flowers))


def sort_area(b: Iterable[Flower]) -> Bouquet:
    return tuple(sorted(b, key=flower_key))


def _occurrence_order(flowers: Bouquet) -> list[VarId]:
    seen: list[VarId] = []
    stack = list(reversed(flowers))
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            seen.extend(f.args)
        else:
            stack.extend(reversed([x for g in (f.pistil, *f.petals) for x in g.flowers]))
    return seen


def _order_binders(g: Garden) -> Garden:
    """Sprinkler order: first occurrence in the sorted body, unused ones last."""
    if len(g.binders) <= 1:
        return g
    occ = _occurrence_order(g.flowers)
    first = {}
    for i, v in enumerate(occ):
        first.setdefault(v, i)
    n = len(occ)
    ordered = tuple(sorted(g.binders, key=lambda v: (first.get(v, n), v.display, v.id)))
    return Garden(ordered, g.flowers)


def _sort_flower(f: Flower) -> Flower:
    if isinstance(f, Atom):
        return f
    return Bloom(_sort_garden(f.pistil), tuple(sorted((_sort_garden(p) for p in f.petals), key=garden_key)))


def _sort_garden(g: Garden) -> Garden:
    return _order_binders(Garden(g.binders, sort_area(_sort_flower(f) for f in g.flowers)))


def canonical_sort(b: Bouquet) -> Bouquet:
    """Order multisets and sprinklers without touching any name."""
    return sort_area(_sort_flower(f) for f in b)


# ---------------------------------------------------------------------------
# Barendregt repair and full canonicalization

def all_displays(b: Bouquet) -> set[str]:
    out: set[str] = set()
    stack: list[Flower] = list(b)
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            out.update(a.display for a in f.args)
        else:
            for g in (f.pistil, *f.petals):
                out.update(v.display for v in g.binders)
                stack.extend(g.flowers)
    return out


class _Repair:
    def __init__(self, free_displays: set[str]):
        self.claimed = set(free_displays)
        self.seen_ids: set[int] = set()
        self.changed = False

    def garden(self, g: Garden, env: dict[int, VarId]) -> tuple[Garden, dict[int, VarId]]:
        env = dict(env)
        binders = []
        for v in g.binders:
            if v.id in self.seen_ids or v.display in self.claimed:
                nv = fresh_var(coin_display(v.display, self.claimed))
                env[v.id] = nv
                self.changed = True
                v = nv
            self.seen_ids.add(v.id)
            self.claimed.add(v.display)
            binders.append(v)
        return Garden(tuple(binders), tuple(self.flower(f, env) for f in g.flowers)), env

    def flower(self, f: Flower, env: dict[int, VarId]) -> Flower:
        if isinstance(f, Atom):
            return Atom(f.pred, tuple(env.get(a.id, a) for a in f.args))
        pist, penv = self.garden(f.pistil, env)
        return Bloom(pist, tuple(self.garden(p, penv)[0] for p in f.petals))


def canonicalize(b: Bouquet) -> Bouquet:
    """Canonical alpha-variant: Barendregt-safe names, deterministic order.

    Idempotent; repairs only violating binders (fresh ids, primed display
    names), so already-canonical input comes back unchanged.
    """
    while True:
        b = canonical_sort(b)
        rep = _Repair({v.display for v in free_vars(b)})
        b2 = tuple(rep.flower(f, {}) for f in b)
        if not rep.changed:
            return b2
        b = b2


def freshen(b: Bouquet, taken: set[str]) -> Bouquet:
    """Copy a bouquet with brand-new binders everywhere.

    Display names are kept when they do not clash with ``taken`` (which is
    extended as names get claimed), primed otherwise.
    """
    def flower(f: Flower, env: dict[int, VarId]) -> Flower:
        if isinstance(f, Atom):
            return Atom(f.pred, tuple(env.get(a.id, a) for a in f.args))
        pist, penv = garden(f.pistil, env)
        return Bloom(pist, tuple(garden(p, penv)[0] for p in f.petals))

    def garden(g: Garden, env: dict[int, VarId]):
        env = dict(env)
        binders = []
        for v in g.binders:
            nv = fresh_var(coin_display(v.display, taken))
            taken.add(nv.display)
            env[v.id] = nv
            binders.append(nv)
        return Garden(tuple(binders), tuple(flower(f, env) for f in g.flowers)), env

    return tuple(flower(f, {}) for f in b)


# ---------------------------------------------------------------------------
# Alpha equivalence (binder-name and multiset-order insensitive)
#
# The matcher threads an environment mapping in-scope left binders to right
# binders, plus the set of in-scope right binder ids (so that a free left
# variable can never silently equal a bound right one).  Multisets are matched
# by backtracking, pruned with a name-erased shape fingerprint.

def _shape_key(f: Flower):
    if isinstance(f, Atom):
        return (0, f.pred, len(f.args))
    return (
        1,
        len(f.pistil.binders),
        tuple(sorted(_shape_key(x) for x in f.pistil.flowers)),
        tuple(sorted(
            (len(p.binders), tuple(sorted(_shape_key(x) for x in p.flowers)))
            for p in f.petals)),
    )


def alpha_eq(a: Bouquet, b: Bouquet) -> bool:
    """Equality up to bijective binder renaming and multiset reordering."""
    return next(_match_bouquets(tuple(a), tuple(b), {}, frozenset()), None) is not None


def alpha_eq_flower(f: Flower, g: Flower) -> bool:
    return alpha_eq((f,), (g,))


def _match_bouquets(xs: Bouquet, ys: Bouquet, env, scope) -> Iterator[dict]:
    if len(xs) != len(ys):
        return
    if not xs:
        yield env
        return
    x, rest = xs[0], xs[1:]
    kx = _shape_key(x)
    for j, y in enumerate(ys):
        if _shape_key(y) != kx:
            continue
        for env2 in _match_flower(x, y, env, scope):
            yield from _match_bouquets(rest, ys[:j] + ys[j + 1:], env2, scope)


def _match_flower(x: Flower, y: Flower, env, scope) -> Iterator[dict]:
    if isinstance(x, Atom):
        if not isinstance(y, Atom) or x.pred != y.pred or len(x.args) != len(y.args):
            return
        for a, b in zip(x.args, y.args):
            if a.id in env:
                if env[a.id] != b.id:
                    return
            elif b.id in scope or a.id != b.id:
                return
        yield env
        return
    if isinstance(y, Atom):
        return
    # pistil binders scope over the pistil body and every petal
    for env2, scope2 in _pair_binders(x.pistil, y.pistil, env, scope):
        for env3 in _match_bouquets(x.pistil.flowers, y.pistil.flowers, env2, scope2):
            yield from _match_petals(x.petals, y.petals, env3, scope2)


def _match_petals(ps, qs, env, scope) -> Iterator[dict]:
    if len(ps) != len(qs):
        return
    if not ps:
        yield env
        return
    p, rest = ps[0], ps[1:]
    for j, q in enumerate(qs):
        for env2, scope2 in _pair_binders(p, q, env, scope):
            for env3 in _match_bouquets(p.flowers, q.flowers, env2, scope2):
                yield from _match_petals(rest, qs[:j] + qs[j + 1:], env3, scope)


def _pair_binders(g: Garden, h: Garden, env, scope) -> Iterator[tuple[dict, frozenset]]:
    if len(g.binders) != len(h.binders):
        return
    scope2 = scope | {v.id for v in h.binders}
    if not g.binders:
        yield env, scope2
        return
    for perm in itertools.permutations(h.binders):
        env2 = dict(env)
        env2.update({v.id: w.id for v, w in zip(g.binders, perm)})
        yield env2, scope2
