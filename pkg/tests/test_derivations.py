"""Derivation checking, proof files, lifting, deduction builders."""

import random
from pathlib import Path as FsPath

import pytest

from floret import (
    Derivation, Path, PolarityMismatch, RuleInstance, RuleName, alpha_eq,
    bouquet_text, build_strong_deduction_bwd, build_strong_deduction_fwd,
    check_derivation, check_proof_text, deduction_demo, deduction_flower,
    derive, digest, format_proof, is_proof, lift, load_proof, parse_bouquet,
    prove,
)
from floret.derivations import rename_disjoint
from floret.fuzz import random_bouquet, random_natural_instance
from floret.paths import Context, PISTIL, iter_areas, split
from floret.prover import SearchBudget
from floret.rules import applicable_instances, apply_rule

FIG8 = FsPath(__file__).resolve().parent.parent / "fig8.fproof"


def test_zero_step_proof_of_empty(sig):
    d = Derivation((), ())
    assert check_derivation(d).ok
    assert is_proof(d)


def test_digest_mismatch_reported(sig):
    b = parse_bouquet("[a |> .]", sig)
    d = derive(b, [RuleInstance(RuleName.epet, Path((), frozenset({0})))])
    bad = Derivation(d.start, ((d.steps[0][0], "00000000"),))
    res = check_derivation(bad)
    assert not res.ok and res.step_index == 0 and "digest" in res.reason


class TestProofFiles:
    def test_shipped_worked_example(self, sig):
        res = check_proof_text(FIG8.read_text(), sig)
        assert res.ok and res.final == ()

    def test_swapped_steps_fail(self, sig):
        lines = [l for l in FIG8.read_text().splitlines() if l and not l.startswith("#")]
        lines[3], lines[4] = lines[4], lines[3]
        res = check_proof_text("\n".join(lines), sig)
        assert not res.ok
        assert res.step_index is not None

    def test_corrupt_digest_fail(self, sig):
        text = FIG8.read_text().replace("=> 1c0582a6", "=> deadbeef")
        res = check_proof_text(text, sig)
        assert not res.ok and res.step_index == 0

    def test_empty_file_is_a_parse_error(self, sig):
        res = check_proof_text("", sig)
        assert not res.ok and res.step_index is None

    def test_format_load_roundtrip(self, sig):
        d = load_proof(FIG8.read_text(), sig)
        text = format_proof(d)
        res = check_proof_text(text, sig)
        assert res.ok
        assert is_proof(d)

    def test_scoped_payload_resolves_to_the_binder(self, sig):
        # the payload text of a file step is parsed under the binders in
        # scope at its path: this p(y) is the bound one, so the insertion is
        # self-pollinated and the whole goal closes
        goal = "[y. p(y) |> q(y), [p(y) |> q(y)]]"
        start = parse_bouquet(goal, sig)
        text = "\n".join([
            f"goal: {goal}",
            "poll_up @ 0/petal:0/area payload=\"p(y)\" => ignored00",
        ])
        from floret.derivations import _parse_steps, _resolve_raw
        _goal, raws = _parse_steps(text.replace("ignored00", "00000000"))
        inst = _resolve_raw(raws[0], start, sig)
        out = apply_rule(start, inst)
        assert bouquet_text(out) == "[y. p(y) |> p(y), q(y), [p(y) |> q(y)]]"

    def test_incomplete_derivation_not_a_proof(self, sig):
        text = "goal: a, [a |> .]\nepet @ area#{1} => " + digest(parse_bouquet("a", sig))
        res = check_proof_text(text, sig)
        assert not res.ok and "empty" in res.reason
        res2 = check_proof_text(text, sig, require_proof=False)
        assert res2.ok and bouquet_text(res2.final) == "a"


class TestLift:
    def test_identity_lifts_to_identity(self, sig):
        d = Derivation(parse_bouquet("a", sig), ())
        host = parse_bouquet("[b |> q(u)]", sig)
        ctx, _ = split(host, Path(((0, 0),), frozenset()))
        out = lift(d, ctx)
        assert out.steps == ()
        assert bouquet_text(out.start) == "[b |> a, q(u)]"

    def test_natural_step_lifts_under_a_pistil(self, sig):
        b = parse_bouquet("[a |> .]", sig)
        d = derive(b, [RuleInstance(RuleName.epet, Path((), frozenset({0})))])
        host = parse_bouquet("[b |> q(u)]", sig)
        ctx, _ = split(host, Path(((0, PISTIL),), frozenset()))
        out = lift(d, ctx)
        res = check_derivation(out)
        assert res.ok
        assert bouquet_text(res.final) == "[b |> q(u)]"

    def test_cultural_step_under_negative_context_is_refused(self, sig):
        d = derive(parse_bouquet("", sig),
                   [RuleInstance(RuleName.grow, Path((), None),
                                 payload=parse_bouquet("a", sig))])
        host = parse_bouquet("[b |> q(u)]", sig)
        ctx, _ = split(host, Path(((0, PISTIL),), frozenset()))
        with pytest.raises(PolarityMismatch):
            lift(d, ctx)

    def test_cultural_step_under_positive_context(self, sig):
        d = derive(parse_bouquet("", sig),
                   [RuleInstance(RuleName.grow, Path((), None),
                                 payload=parse_bouquet("a", sig))])
        host = parse_bouquet("[b |> q(u)]", sig)
        ctx, _ = split(host, Path(((0, 0),), frozenset()))
        out = lift(d, ctx)
        assert check_derivation(out).ok

    def test_lift_renames_colliding_context_binders(self, sig):
        b = parse_bouquet("[x. p(x) |> q(x)]", sig)
        inst = applicable_instances(b, fragment={RuleName.ipis}, extra_images=("u",))
        d = derive(b, [inst[0]])
        host = parse_bouquet("[x. p(x) |> q(x)]", sig)
        ctx, _ = split(host, Path(((0, 0),), frozenset()))
        out = lift(d, ctx)
        assert check_derivation(out).ok

    def test_random_lifts_check(self, sig):
        rng = random.Random(53)
        done = 0
        while done < 40:
            b = random_bouquet(rng, sig, size=5)
            inst = random_natural_instance(rng, b)
            if inst is None:
                continue
            try:
                d = derive(b, [inst])
            except Exception:
                continue
            host = random_bouquet(rng, sig, size=4)
            steps, _ = rng.choice(list(iter_areas(host)))
            ctx, _ = split(host, Path(steps, frozenset()))
            out = lift(d, ctx)
            assert check_derivation(out).ok
            done += 1


class TestStrongDeduction:
    def test_fwd_identity_two_steps(self, sig):
        phi = parse_bouquet("a, q(u)", sig)
        fwd = build_strong_deduction_fwd(Derivation(phi, ()))
        assert len(fwd.steps) == 2
        assert is_proof(fwd)
        assert alpha_eq(fwd.start, deduction_flower(phi, phi))

    def test_fwd_epet_three_steps(self, sig):
        b = parse_bouquet("[a |> .]", sig)
        d = derive(b, [RuleInstance(RuleName.epet, Path((), frozenset({0})))])
        fwd = build_strong_deduction_fwd(d)
        assert len(fwd.steps) == 3
        assert is_proof(fwd)
        assert alpha_eq(fwd.start, deduction_flower((), b))

    def test_bwd_reflexive(self, sig):
        goalf = deduction_flower(parse_bouquet("a", sig), parse_bouquet("a", sig))
        p = prove(goalf, refute=False).derivation
        d = build_strong_deduction_bwd(p)
        res = check_derivation(d)
        assert res.ok
        assert bouquet_text(d.start) == "a" and bouquet_text(res.final) == "a"

    def test_bwd_empty_hypotheses(self, sig):
        goalf = deduction_flower((), parse_bouquet("a, a", sig))
        # [ |> a, a ] is not provable, but [ a, b |> a ] with empty goal is:
        goalf = deduction_flower(parse_bouquet("a, b", sig), ())
        p = prove(goalf, refute=False).derivation
        d = build_strong_deduction_bwd(p)
        res = check_derivation(d)
        assert res.ok
        assert d.start == () and bouquet_text(res.final) == "a, b"

    @pytest.mark.parametrize("hyp_t,goal_t", [
        ("[x. |> p(x)]", "p(u)"),
        ("[x. p(x) |> q(x)], p(u)", "q(u)"),
        ("[x. |> p(x)], [y. p(y) |> q(y)]", "q(v)"),
        ("[x, y. r(x, y) |> q(x)]", "[k. r(k, k) |> q(k)]"),
    ])
    def test_round_trip_with_instantiations(self, sig, hyp_t, goal_t):
        # proofs containing ipis/ipet exercise the coinage-stability of lift
        gf = deduction_flower(parse_bouquet(hyp_t, sig), parse_bouquet(goal_t, sig))
        out = prove(gf, SearchBudget(max_depth=6, timeout_ms=8000), refute=False)
        assert out.proved
        psi, phi = gf[0].pistil.flowers, gf[0].petals[0].flowers
        bwd = build_strong_deduction_bwd(out.derivation)
        res = check_derivation(bwd)
        assert res.ok
        assert bouquet_text(bwd.start) == bouquet_text(phi)
        assert bouquet_text(res.final) == bouquet_text(psi)
        fwd = build_strong_deduction_fwd(bwd)
        assert is_proof(fwd) and alpha_eq(fwd.start, gf)

    def test_round_trip_random(self, sig):
        rng = random.Random(61)
        done = 0
        while done < 20:
            hyp = random_bouquet(rng, sig, size=3, binder_chance=0.3)
            sub = tuple(f for f in hyp if rng.random() < 0.7)
            goalf = deduction_flower(hyp, sub)
            out = prove(goalf, SearchBudget(max_depth=4, timeout_ms=3000), refute=False)
            if not out.proved:
                continue
            psi, phi = goalf[0].pistil.flowers, goalf[0].petals[0].flowers
            d = build_strong_deduction_bwd(out.derivation)
            res = check_derivation(d)
            assert res.ok
            assert bouquet_text(d.start) == bouquet_text(phi)
            assert bouquet_text(res.final) == bouquet_text(psi)
            fwd = build_strong_deduction_fwd(d)
            assert is_proof(fwd)
            assert alpha_eq(fwd.start, goalf)
            done += 1


class TestDeductionDemo:
    def test_demo_discharges_in_context(self, sig):
        p = prove(deduction_flower(parse_bouquet("a", sig), parse_bouquet("a", sig)),
                  refute=False).derivation
        ctx, _ = split(parse_bouquet("a, b", sig), Path((), frozenset()))
        demo = deduction_demo(p, ctx)
        res = check_derivation(demo)
        assert res.ok
        assert bouquet_text(demo.start) == "a, a, b"
        assert bouquet_text(res.final) == "a, b"

    def test_demo_requires_pollinated_hypotheses(self, sig):
        p = prove(deduction_flower(parse_bouquet("a", sig), parse_bouquet("a", sig)),
                  refute=False).derivation
        ctx, _ = split(parse_bouquet("b", sig), Path((), frozenset()))
        with pytest.raises(Exception):
            deduction_demo(p, ctx)


def test_fwd_accepts_random_natural_chains(sig):
    # every natural derivation converts to a checker-accepted proof
    rng = random.Random(97)
    built = 0
    while built < 30:
        b = random_bouquet(rng, sig, size=5)
        insts = []
        cur = b
        for _ in range(rng.randint(0, 3)):
            inst = random_natural_instance(rng, cur)
            if inst is None:
                break
            try:
                cur = apply_rule(cur, inst)
            except Exception:
                continue
            insts.append(inst)
        d = derive(b, insts)
        fwd = build_strong_deduction_fwd(d)
        assert is_proof(fwd)
        built += 1


def test_rename_disjoint_avoids_and_preserves_shape(sig):
    rng = random.Random(71)
    for _ in range(30):
        b = random_bouquet(rng, sig, size=5)
        avoid = {"x", "y", "z", "x'", "y'"}
        out = rename_disjoint(b, avoid)
        assert alpha_eq(out, b)
        from floret.syntax import bound_vars
        assert not {v.display for v in bound_vars(out)} & avoid
