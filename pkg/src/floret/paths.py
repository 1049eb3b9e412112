"""One-hole contexts over bouquets, path addressing, polarity, pollination.

A path is a sequence of steps, each entering a flower of the current area and
then either its pistil or one of its petals, ending at an area.  The terminal
either selects a sub-bouquet of that area (a set of flower indices) or marks a
bare insertion point.  Serialized form::

    0/pistil/1/petal:0/area        bare area
    0/pistil/area#{0,2}            selection within an area

Paths address positions in the canonical ordering, so subjects are expected
to be canonical.  All functions here are pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

from .syntax import (
    Bloom, Bouquet, FloretError, Flower, Garden, VarId,
    alpha_eq_flower, flower_key, sort_area,
)

PISTIL = -1  # petal part index for "into the pistil"

Step = tuple[int, int]  # (flower index, PISTIL or petal index)


class BadPath(FloretError):
    def __init__(self, step_index: int, reason: str):
        super().__init__(f"step {step_index}: {reason}")
        self.step_index = step_index


@dataclass(frozen=True)
class Path:
    steps: tuple[Step, ...] = ()
    selection: frozenset[int] | None = None

    def serialize(self) -> str:
        parts = []
        for idx, part in self.steps:
            parts.append(str(idx))
            parts.append("pistil" if part == PISTIL else f"petal:{part}")
        if self.selection is None:
            parts.append("area")
        else:
            parts.append("area#{%s}" % ",".join(str(i) for i in sorted(self.selection)))
        return "/".join(parts)

    @classmethod
    def parse(cls, text: str) -> "Path":
        tokens = text.strip().split("/")
        steps: list[Step] = []
        i = 0
        while i < len(tokens) and tokens[i].isdigit():
            idx = int(tokens[i])
            if i + 1 >= len(tokens):
                raise BadPath(len(steps), f"dangling flower index in {text!r}")
            part = tokens[i + 1]
            if part == "pistil":
                steps.append((idx, PISTIL))
            elif part.startswith("petal:") and part[6:].isdigit():
                steps.append((idx, int(part[6:])))
            else:
                raise BadPath(len(steps), f"bad step {part!r} in {text!r}")
            i += 2
        if i != len(tokens) - 1:
            raise BadPath(len(steps), f"malformed path {text!r}")
        term = tokens[i]
        if term == "area":
            return cls(tuple(steps), None)
        m = re.fullmatch(r"area#\{([0-9,]*)\}", term)
        if not m:
            raise BadPath(len(steps), f"bad terminal {term!r} in {text!r}")
        sel = frozenset(int(s) for s in m.group(1).split(",") if s)
        return cls(tuple(steps), sel)

    def at_selection(self, sel: frozenset[int] | set[int]) -> "Path":
        return Path(self.steps, frozenset(sel))

    def as_area(self) -> "Path":
        return Path(self.steps, None)


def resolve_area(b: Bouquet, steps: tuple[Step, ...]) -> Bouquet:
    """The flower multiset of the area the steps lead to."""
    area = b
    for k, (idx, part) in enumerate(steps):
        if not (0 <= idx < len(area)):
            raise BadPath(k, f"flower index {idx} out of range 0..{len(area) - 1}")
        f = area[idx]
        if not isinstance(f, Bloom):
            raise BadPath(k, "cannot enter an atom")
        if part == PISTIL:
            area = f.pistil.flowers
        else:
            if not (0 <= part < len(f.petals)):
                raise BadPath(k, f"petal index {part} out of range")
            area = f.petals[part].flowers
    return area


def garden_at(b: Bouquet, steps: tuple[Step, ...]) -> Garden | None:
    """The garden owning the area at the end of the steps; None at top level."""
    area = b
    g: Garden | None = None
    for k, (idx, part) in enumerate(steps):
        if not (0 <= idx < len(area)) or not isinstance(area[idx], Bloom):
            raise BadPath(k, "path does not resolve")
        f: Bloom = area[idx]  # type: ignore[assignment]
        g = f.pistil if part == PISTIL else f.petals[part]
        area = g.flowers
    return g


def binder_scope(b: Bouquet, steps: tuple[Step, ...]) -> list[VarId]:
    """Binders visible at an area, innermost last."""
    scope: list[VarId] = []
    area = b
    for idx, part in steps:
        f = area[idx]
        assert isinstance(f, Bloom)
        scope.extend(f.pistil.binders)  # pistil binders scope over petals too
        if part == PISTIL:
            area = f.pistil.flowers
        else:
            g = f.petals[part]
            scope.extend(g.binders)
            area = g.flowers
    return scope


@dataclass(frozen=True)
class Context:
    """A bouquet with one hole: the subject minus the extracted part.

    ``base`` is the subject with the selection removed; the hole sits at the
    area reached by ``steps``.  ``removed_at`` remembers the original indices
    so that filling back the extracted content restores the subject exactly.
    """

    base: Bouquet
    steps: tuple[Step, ...]
    removed_at: tuple[int, ...] = ()
    removed: Bouquet = field(default=(), compare=False)

    def fill(self, content: Bouquet) -> Bouquet:
        if content == self.removed and self.removed_at:
            return _rebuild(self.base, self.steps, lambda area: _reinsert(area, self.removed_at, content))
        return _rebuild(self.base, self.steps, lambda area: sort_area(area + tuple(content)))

    def area(self) -> Bouquet:
        return resolve_area(self.base, self.steps)


def _reinsert(area: Bouquet, positions: tuple[int, ...], content: Bouquet) -> Bouquet:
    out: list[Flower | None] = list(area)
    for pos, f in sorted(zip(positions, content)):
        out.insert(pos, f)
    return tuple(out)  # type: ignore[return-value]


def _rebuild(b: Bouquet, steps: tuple[Step, ...], edit) -> Bouquet:
    if not steps:
        return edit(b)
    (idx, part), rest = steps[0], steps[1:]
    f = b[idx]
    assert isinstance(f, Bloom)
    if part == PISTIL:
        g = f.pistil
        nf = Bloom(Garden(g.binders, _rebuild(g.flowers, rest, edit)), f.petals)
    else:
        g = f.petals[part]
        petals = list(f.petals)
        petals[part] = Garden(g.binders, _rebuild(g.flowers, rest, edit))
        nf = Bloom(f.pistil, tuple(petals))
    return b[:idx] + (nf,) + b[idx + 1:]


def split(b: Bouquet, p: Path) -> tuple[Context, Bouquet]:
    """Separate the selected sub-bouquet from its one-hole context."""
    area = resolve_area(b, p.steps)
    sel = sorted(p.selection or ())
    for i in sel:
        if not (0 <= i < len(area)):
            raise BadPath(len(p.steps), f"selection index {i} out of range")
    picked = tuple(area[i] for i in sel)
    kept = tuple(f for i, f in enumerate(area) if i not in set(sel))
    base = _rebuild(b, p.steps, lambda _area: kept)
    return Context(base, p.steps, tuple(sel), picked), picked


def inversions(ctx: Context) -> int:
    return sum(1 for _, part in ctx.steps if part == PISTIL)


def path_inversions(p: Path | tuple[Step, ...]) -> int:
    steps = p.steps if isinstance(p, Path) else p
    return sum(1 for _, part in steps if part == PISTIL)


def is_positive(p: Path | tuple[Step, ...] | Context) -> bool:
    if isinstance(p, Context):
        return inversions(p) % 2 == 0
    return path_inversions(p) % 2 == 0


def compose(outer: Context, inner: Context) -> Context:
    """Plug ``inner``'s subject into ``outer``'s hole; inversions add up."""
    inner_subject = inner.fill(inner.removed) if inner.removed_at else inner.base
    outer_area = outer.area()
    merged = sort_area(outer_area + inner_subject)
    filled = _rebuild(outer.base, outer.steps, lambda _a: merged)
    if inner.steps:
        (idx, part), rest = inner.steps[0], inner.steps[1:]
        steps = outer.steps + ((_merged_index(outer_area, inner_subject, merged, idx), part),) + rest
        sel = frozenset(inner.removed_at)
    else:
        steps = outer.steps
        sel = frozenset(_merged_index(outer_area, inner_subject, merged, i) for i in inner.removed_at)
    if not sel:
        return Context(filled, steps, (), ())
    ctx, _picked = split(filled, Path(steps, sel))
    return ctx


def _merged_index(rest: Bouquet, added: Bouquet, merged: Bouquet, j: int) -> int:
    """Index of added[j] inside sorted(rest + added), matching a stable sort
    of the list rest ++ added."""
    kj = flower_key(added[j])
    before_rest = sum(1 for r in rest if flower_key(r) <= kj)
    before_added = sum(1 for i in range(j) if flower_key(added[i]) <= kj)
    idx = before_rest + before_added
    assert merged[idx] == added[j] or flower_key(merged[idx]) == kj
    return idx


# ---------------------------------------------------------------------------
# Pollination

def pollination_candidates(ctx: Context) -> tuple[Flower, ...]:
    """Every flower available at the hole, per the justification relation.

    Cross-pollination contributes the siblings of the hole's area and of every
    enclosing area; self-pollination contributes the pistil content of any
    flower entered through a petal on the way down.  Reported with
    multiplicity; matching is up to alpha equivalence.
    """
    cands: list[Flower] = []
    area = ctx.base
    for idx, part in ctx.steps:
        cands.extend(f for i, f in enumerate(area) if i != idx)
        f = area[idx]
        assert isinstance(f, Bloom)
        if part == PISTIL:
            area = f.pistil.flowers
        else:
            cands.extend(f.pistil.flowers)
            area = f.petals[part].flowers
    cands.extend(area)
    return tuple(cands)


def is_pollinated(phi: Bouquet, ctx: Context) -> bool:
    """Each flower of ``phi`` must alpha-match some candidate, independently."""
    cands = pollination_candidates(ctx)
    return all(any(alpha_eq_flower(f, c) for c in cands) for f in phi)


# ---------------------------------------------------------------------------
# Area iteration helpers

def iter_areas(b: Bouquet) -> Iterator[tuple[tuple[Step, ...], Bouquet]]:
    """All areas of a bouquet: the top level plus every garden, outside-in."""
    stack: list[tuple[tuple[Step, ...], Bouquet]] = [((), b)]
    while stack:
        steps, area = stack.pop()
        yield steps, area
        for i, f in enumerate(area):
            if isinstance(f, Bloom):
                stack.append((steps + ((i, PISTIL),), f.pistil.flowers))
                for k in range(len(f.petals)):
                    stack.append((steps + ((i, k),), f.petals[k].flowers))


def iter_flowers(b: Bouquet) -> Iterator[tuple[tuple[Step, ...], int, Flower]]:
    for steps, area in iter_areas(b):
        for i, f in enumerate(area):
            yield steps, i, f
