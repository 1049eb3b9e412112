import random

import pytest

from floret import Signature, parse_bouquet

FIG8_GOAL = "[[x. |> [p(x) |>] ; q(x)] |> [y. p(y) |> z. q(z)]]"


@pytest.fixture(scope="session")
def sig():
    return Signature.of(a=0, b=0, p=1, q=1, r=2)


@pytest.fixture(scope="session")
def fig8_goal(sig):
    return parse_bouquet(FIG8_GOAL, sig)


@pytest.fixture()
def rng():
    return random.Random(20240817)
