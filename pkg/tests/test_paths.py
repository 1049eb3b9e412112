"""Contexts: addressing, polarity, pollination (with a positional reference
implementation for the candidate relation)."""

import random

import pytest

from floret import (
    BadPath, Path, alpha_eq, bouquet_text, compose, inversions, is_pollinated,
    parse_bouquet, pollination_candidates, split,
)
from floret.fuzz import random_bouquet
from floret.paths import PISTIL, iter_areas, iter_flowers
from floret.syntax import Bloom, flower_text


def test_path_serialization_roundtrip():
    for text in ["area", "area#{0}", "area#{0,2}", "0/pistil/1/petal:0/area",
                 "0/pistil/area#{1}", "2/petal:3/area#{}"]:
        assert Path.parse(text).serialize() in (text, text.replace("#{}", "#{}"))
    p = Path.parse("0/pistil/1/petal:0/area")
    assert p.steps == ((0, PISTIL), (1, 0))
    assert p.selection is None


def test_split_top_level(sig):
    b = parse_bouquet("a, b", sig)
    ctx, picked = split(b, Path((), frozenset({0})))
    assert bouquet_text(picked) == "a"
    assert bouquet_text(ctx.base) == "b"
    assert ctx.fill(picked) == b


def test_split_fig8_pistil(fig8_goal):
    ctx, picked = split(fig8_goal, Path(((0, PISTIL),), frozenset({0})))
    assert bouquet_text(picked) == "[x. |> q(x) ; [p(x) |>]]"
    assert ctx.fill(picked) == fig8_goal


def test_bad_path(sig):
    b = parse_bouquet("a", sig)
    with pytest.raises(BadPath):
        split(b, Path(((0, PISTIL),), frozenset()))
    with pytest.raises(BadPath):
        split(b, Path((), frozenset({3})))


def test_fill_split_identity_property(sig):
    rng = random.Random(13)
    done = 0
    while done < 1000:
        b = random_bouquet(rng, sig, size=7)
        areas = list(iter_areas(b))
        steps, area = rng.choice(areas)
        sel = frozenset(i for i in range(len(area)) if rng.random() < 0.5)
        ctx, picked = split(b, Path(steps, sel))
        assert ctx.fill(picked) == b
        done += 1


class TestPolarity:
    def test_hole_at_top(self, sig):
        ctx, _ = split(parse_bouquet("a", sig), Path((), frozenset()))
        assert inversions(ctx) == 0

    def test_pistil_is_negative(self, sig):
        b = parse_bouquet("[a |> b]", sig)
        ctx, _ = split(b, Path(((0, PISTIL),), frozenset()))
        assert inversions(ctx) == 1

    def test_petal_under_pistil(self, sig):
        b = parse_bouquet("[[a |> b] |> b]", sig)
        ctx, _ = split(b, Path(((0, PISTIL), (0, 0)), frozenset()))
        assert inversions(ctx) == 1

    def test_compose_identity(self, sig):
        b = parse_bouquet("[a |> b]", sig)
        inner, _ = split(b, Path(((0, PISTIL),), frozenset()))
        hole = split((), Path((), frozenset()))[0]
        assert compose(hole, inner).steps == inner.steps
        assert compose(hole, inner).base == inner.base

    def test_compose_adds_inversions(self, sig):
        rng = random.Random(5)
        for _ in range(100):
            outer_b = random_bouquet(rng, sig, size=5)
            inner_b = random_bouquet(rng, sig, size=5)
            osteps, _ = rng.choice(list(iter_areas(outer_b)))
            isteps, _ = rng.choice(list(iter_areas(inner_b)))
            octx, _ = split(outer_b, Path(osteps, frozenset()))
            ictx, _ = split(inner_b, Path(isteps, frozenset()))
            got = compose(octx, ictx)
            assert inversions(got) == inversions(octx) + inversions(ictx)


# --- reference implementation: positional reading of the two definitional
# cases (a candidate is any flower in an ancestor-or-same area that is not on
# the hole's path, or any pistil flower of a flower entered through a petal).

def reference_candidates(b, hole_steps):
    out = []
    for q_steps, i, f in iter_flowers(b):
        on_path = len(q_steps) < len(hole_steps) and hole_steps[len(q_steps)][0] == i \
            and hole_steps[:len(q_steps)] == q_steps
        if hole_steps[:len(q_steps)] == q_steps and not on_path:
            out.append(f)
    for k, (idx, part) in enumerate(hole_steps):
        if part != PISTIL:
            area = b
            for idx2, part2 in hole_steps[:k]:
                host = area[idx2]
                area = host.pistil.flowers if part2 == PISTIL else host.petals[part2].flowers
            host = area[idx]
            out.extend(host.pistil.flowers)
    return out


def filled_flower(b, steps_plus_one):
    """The flower entered by the first step beyond a prefix."""
    area = b
    for idx, part in steps_plus_one[:-1]:
        f = area[idx]
        area = f.pistil.flowers if part == PISTIL else f.petals[part].flowers
    return area[steps_plus_one[-1][0]]


def test_candidates_match_reference(sig):
    rng = random.Random(11)
    for _ in range(150):
        b = random_bouquet(rng, sig, size=7)
        steps, area = rng.choice(list(iter_areas(b)))
        ctx, _ = split(b, Path(steps, frozenset()))
        got = sorted(flower_text(f) for f in pollination_candidates(ctx))
        want = sorted(flower_text(f) for f in reference_candidates(b, steps))
        assert got == want


class TestPollination:
    def test_cross_same_area(self, sig):
        b = parse_bouquet("a, b", sig)
        ctx, picked = split(b, Path((), frozenset({1})))
        assert bouquet_text(picked) == "b"
        assert [flower_text(f) for f in pollination_candidates(ctx)] == ["a"]

    def test_self_pistil_justifies_petal(self, sig):
        b = parse_bouquet("[a |> b]", sig)
        ctx, _ = split(b, Path(((0, 0),), frozenset()))
        cands = [flower_text(f) for f in pollination_candidates(ctx)]
        assert cands == ["a", "b"]  # pistil content, then the petal's own area

    def test_petals_never_justify_pistils(self, sig):
        b = parse_bouquet("[b |> a]", sig)
        ctx, _ = split(b, Path(((0, PISTIL),), frozenset()))
        cands = [flower_text(f) for f in pollination_candidates(ctx)]
        assert "a" not in cands

    def test_empty_bouquet_always_pollinated(self, sig):
        ctx, _ = split(parse_bouquet("[|>]", sig), Path((), frozenset()))
        assert is_pollinated((), ctx)

    def test_multiplicity_per_occurrence(self, sig):
        b = parse_bouquet("a", sig)
        ctx, _ = split(b, Path((), frozenset()))
        two = parse_bouquet("a, a", sig)
        assert is_pollinated(two, ctx)

    def test_no_witness(self, sig):
        b = parse_bouquet("a", sig)
        ctx, _ = split(b, Path((), frozenset()))
        assert not is_pollinated(parse_bouquet("b", sig), ctx)

    def test_alpha_matching(self, sig):
        b = parse_bouquet("[x. p(x) |> q(x)]", sig)
        ctx, _ = split(b, Path((), frozenset()))
        copy = parse_bouquet("[y. p(y) |> q(y)]", sig)
        assert is_pollinated(copy, ctx)

    def test_stability_under_fill_with_content(self, sig):
        # what is pollinated at a hole stays pollinated inside any area of
        # content later placed at that hole (the poll_down / poll_up pattern)
        rng = random.Random(23)
        hits = 0
        while hits < 60:
            b = random_bouquet(rng, sig, size=6)
            steps, _area = rng.choice(list(iter_areas(b)))
            ctx, _ = split(b, Path(steps, frozenset()))
            cands = pollination_candidates(ctx)
            if not cands:
                continue
            phi = (rng.choice(cands),)
            content = random_bouquet(rng, sig, size=4)
            filled = ctx.fill(content)
            merged = list(iter_areas(filled))
            # areas strictly below the hole's area that pass through content
            inner = [s for s, _ in merged
                     if len(s) > len(steps) and s[:len(steps)] == steps
                     and flower_text(filled_flower(filled, s[:len(steps) + 1]))
                     in {flower_text(f) for f in content if isinstance(f, Bloom)}]
            if not inner:
                continue
            dctx, _ = split(filled, Path(rng.choice(inner), frozenset()))
            assert is_pollinated(phi, dctx)
            hits += 1
