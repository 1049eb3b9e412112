"""Proof search: corpus, hypothetical proving, budget behavior."""

import random

import pytest

from floret import (
    Outcome, SearchBudget, bouquet_text, check_derivation, deduction_flower,
    encode, find_countermodel, is_proof, parse_bouquet, parse_formula, prove,
    prove_hypothetical,
)
from floret.fuzz import random_bouquet
from floret.syntax import Signature

BUDGET = SearchBudget(max_steps=20000, max_depth=6, timeout_ms=8000)


def by_formula(sig, text):
    return encode(parse_formula(text, sig))


def test_empty_goal_proved_in_zero_steps(sig):
    out = prove((), BUDGET)
    assert out.proved and out.derivation.steps == ()


@pytest.mark.parametrize("text", [
    "a -> a",
    "a -> (b -> a)",
    "a & b -> a",
    "a -> a | b",
    "false -> a",
    "~~(a | ~a)",
    "(forall x. p(x)) -> p(y)",
    "p(y) -> exists x. p(x)",
])
def test_corpus_proved_and_rechecks(sig, text):
    out = prove(by_formula(sig, text), BUDGET, refute=False)
    assert out.outcome is Outcome.PROVED
    assert is_proof(out.derivation)


def test_fig8_goal_proved(fig8_goal):
    out = prove(fig8_goal, BUDGET, refute=False)
    assert out.proved and is_proof(out.derivation)


@pytest.mark.parametrize("text", ["a | ~a", "~~a -> a", "((a -> b) -> a) -> a"])
def test_classical_principles_refuted(sig, text):
    out = prove(by_formula(sig, text), SearchBudget(max_depth=4, timeout_ms=2000))
    assert out.outcome is Outcome.REFUTED
    assert out.countermodel.verify()
    assert out.countermodel.model.n_worlds <= 2


class TestHypothetical:
    def test_reflexivity(self, sig):
        out = prove_hypothetical(parse_bouquet("a", sig), parse_bouquet("a", sig), BUDGET)
        assert out.proved

    def test_universal_instantiation(self, sig):
        hyp = by_formula(sig, "forall x. p(x)")
        goal = parse_bouquet("p(y)", sig)
        out = prove_hypothetical(hyp, goal, BUDGET)
        assert out.proved

    def test_modus_ponens_missing_premiss_refuted(self, sig):
        hyp = by_formula(sig, "a -> b")
        goal = parse_bouquet("b", sig)
        out = prove_hypothetical(hyp, goal, BUDGET)
        assert out.outcome is Outcome.REFUTED

    def test_modus_ponens_with_premiss(self, sig):
        hyp = by_formula(sig, "(a -> b) & a")
        out = prove_hypothetical(hyp, parse_bouquet("b", sig), BUDGET)
        assert out.proved


class TestAgreement:
    def test_prover_and_countermodels_never_both_succeed(self, sig):
        rng = random.Random(77)
        prop_sig = Signature.of(a=0, b=0)
        for _ in range(40):
            b = random_bouquet(rng, prop_sig, size=4, binder_chance=0.0)
            out = prove(b, SearchBudget(max_depth=4, timeout_ms=1500), refute=False)
            cm = find_countermodel(b, 2, 1)
            assert not (out.proved and cm is not None)


def test_budget_monotonicity(sig):
    goals = ["~~(a | ~a)", "(forall x. p(x)) -> p(y)", "a -> a | b"]
    small = SearchBudget(max_steps=20000, max_depth=5, timeout_ms=8000)
    large = SearchBudget(max_steps=40000, max_depth=10, timeout_ms=16000)
    for text in goals:
        b = by_formula(sig, text)
        assert prove(b, small, refute=False).proved
        assert prove(b, large, refute=False).proved


def test_deterministic_derivations(sig):
    b = by_formula(sig, "~~(a | ~a)")
    d1 = prove(b, BUDGET, refute=False).derivation
    d2 = prove(b, BUDGET, refute=False).derivation
    assert [i.describe() for i in d1.instances()] == [i.describe() for i in d2.instances()]
