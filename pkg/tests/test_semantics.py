"""Kripke structures, forcing, entailment, enumeration, countermodels."""

import itertools
import random

import pytest

from floret import (
    Evaluation, KripkeModel, encode, entails, enumerate_models,
    find_countermodel, forces, parse_bouquet, parse_formula, random_model,
    update,
)
from floret.fuzz import FUZZ_SIGNATURE, random_bouquet
from floret.semantics import predicates_of
from floret.syntax import Signature, apply_subst, bound_vars, free_var, free_vars, is_capture_avoiding


def lem_model():
    """Two worlds w0 <= w1, one element, atom a true only at w1."""
    return KripkeModel(2, ((True, True), (False, True)), (1, 1),
                       (("a", ((), ((),))),))


class TestUpdate:
    def test_empty_set_is_identity(self):
        x = free_var("x")
        e = Evaluation(((x, 1),))
        g = Evaluation(((x, 2),))
        assert update(e, (), g) == e

    def test_idempotent(self):
        x, y = free_var("x"), free_var("y")
        e = Evaluation(((x, 1), (y, 2)))
        assert update(e, (x, y), e) == e
        assert update(e, (x,), e) == e

    def test_associativity_on_random_triples(self, rng):
        vars_ = [free_var(n) for n in "xyzuv"]
        for _ in range(200):
            def rand_eval():
                return Evaluation(tuple((v, rng.randint(0, 3)) for v in vars_
                                        if rng.random() < 0.7))
            f, g, h = rand_eval(), rand_eval(), rand_eval()
            r = frozenset(v for v in vars_ if rng.random() < 0.5)
            s = frozenset(v for v in vars_ if rng.random() < 0.5)
            left = update(update(f, r, g), s, h)
            right = update(f, r | s, update(g, s, h))
            assert left == right

    def test_commutativity_disjoint(self, rng):
        x, y = free_var("x"), free_var("y")
        f = Evaluation(((x, 1), (y, 1)))
        g = Evaluation(((x, 2),))
        h = Evaluation(((y, 3),))
        assert update(update(f, (x,), g), (y,), h) == update(update(f, (y,), h), (x,), g)


class TestForcing:
    def test_empty_bouquet_everywhere(self, sig):
        m = lem_model()
        for w in m.worlds():
            assert forces(m, w, Evaluation(), ())

    def test_falsum_nowhere(self, sig):
        falsum = parse_bouquet("[|>]", sig)
        for m in enumerate_models(2, 1, ()):
            for w in m.worlds():
                assert not forces(m, w, Evaluation(), falsum)

    def test_lem_fails_at_the_root(self, sig):
        m = lem_model()
        lem = encode(parse_formula("a | ~a", sig))
        assert not forces(m, 0, Evaluation(), lem)
        assert forces(m, 1, Evaluation(), lem)

    def test_monotone_along_accessibility(self, sig, rng):
        checked = 0
        while checked < 150:
            b = random_bouquet(rng, sig, size=5)
            m = random_model(rng, 3, 2, predicates_of(b))
            fv = sorted(free_vars(b), key=lambda v: v.id)
            for w in m.worlds():
                for combo in itertools.product(m.domain(w), repeat=len(fv)):
                    e = Evaluation(tuple(zip(fv, combo)))
                    if forces(m, w, e, b):
                        for v in m.successors(w):
                            assert forces(m, v, e, b)
            checked += 1

    def test_mirroring(self, sig, rng):
        # forcing sigma(phi) equals forcing phi under the updated evaluation
        checked = 0
        while checked < 120:
            b = random_bouquet(rng, sig, size=5)
            fv = sorted(free_vars(b), key=lambda v: v.id)
            if not fv:
                continue
            x = rng.choice(fv)
            w_img = free_var("mirror_target")
            s = {x: w_img}
            if not is_capture_avoiding(s, b):
                continue
            sb = apply_subst(s, b)
            m = random_model(rng, 2, 2, predicates_of(b))
            for w in m.worlds():
                for d1 in m.domain(w):
                    for d2 in m.domain(w):
                        e = Evaluation(((x, d1), (w_img, d2)))
                        e2 = update(e, (x,), Evaluation(((x, e(w_img)),)))
                        assert forces(m, w, e, sb) == forces(m, w, e2, b)
            checked += 1


class TestEntailment:
    def test_weakening(self, sig, rng):
        for _ in range(30):
            b = random_bouquet(rng, sig, size=4)
            m = random_model(rng, 3, 2, predicates_of(b))
            assert entails(m, b, ())

    def test_reflexivity(self, sig, rng):
        for _ in range(30):
            b = random_bouquet(rng, sig, size=4)
            m = random_model(rng, 3, 2, predicates_of(b))
            assert entails(m, b, b)

    def test_lem_not_entailed(self, sig):
        m = lem_model()
        lem = encode(parse_formula("a | ~a", sig))
        assert not entails(m, (), lem)


class TestEnumeration:
    def test_count_for_one_nullary_predicate(self):
        models = list(enumerate_models(1, 1, (("a", 0),)))
        assert len(models) == 2

    def test_all_emitted_models_validate(self):
        count = 0
        for m in itertools.islice(enumerate_models(3, 2, (("a", 0), ("p", 1))), 1000):
            m.validate()
            count += 1
        assert count == 1000

    def test_random_models_validate(self, rng):
        for _ in range(200):
            random_model(rng, 3, 2, (("a", 0), ("p", 1), ("r", 2))).validate()

    def test_json_roundtrip(self, rng):
        m = random_model(rng, 3, 2, (("p", 1),))
        again = KripkeModel.from_json(m.to_json())
        assert again == m


class TestCountermodels:
    def test_lem(self, sig):
        cm = find_countermodel(encode(parse_formula("a | ~a", sig)), 2, 1)
        assert cm is not None and cm.verify()
        assert cm.model.n_worlds == 2

    def test_peirce(self, sig):
        cm = find_countermodel(encode(parse_formula("((a -> b) -> a) -> a", sig)), 2, 1)
        assert cm is not None and cm.verify()

    def test_double_negation(self, sig):
        cm = find_countermodel(encode(parse_formula("~~a -> a", sig)), 2, 1)
        assert cm is not None and cm.verify()

    def test_identity_has_none(self, sig):
        assert find_countermodel(encode(parse_formula("a -> a", sig)), 2, 2) is None

    def test_serialization(self, sig):
        cm = find_countermodel(encode(parse_formula("a | ~a", sig)), 2, 1)
        text = cm.describe()
        assert "world" in text
        data = cm.to_json()
        assert data["world"] == cm.world


def test_countermodel_formats_are_stable(sig):
    """Golden pin for the two serialized forms (enumeration is deterministic)."""
    import json
    from floret import encode, parse_formula
    cm = find_countermodel(encode(parse_formula("a | ~a", sig)), 2, 1)
    assert cm.describe() == (
        "countermodel at world 1\n"
        "worlds: 2\n"
        "order: 1<=0\n"
        "world 0: domain {0} atoms {a}\n"
        "world 1: domain {0} atoms {}")
    data = cm.to_json()
    assert set(data) == {"model", "world", "evaluation", "subject"}
    assert data["model"]["le"] == [[0], [0, 1]]
    assert KripkeModel.from_json(data["model"]) == cm.model
