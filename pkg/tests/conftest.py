"""Shared fixtures: built approximants are expensive, so they are
session-scoped (and build_family memoizes repeated spec/level/seed keys)."""

import pytest

from homoclique.amalgam import (
    spec_a_rb,
    spec_bipartite,
    spec_f21,
    spec_f22,
    spec_f_inf_1,
    spec_f_inf_2,
    spec_f_inf_inf,
)
from homoclique.graphs import UNBOUNDED
from homoclique.limits import build_family


def _built(spec):
    a = build_family(spec, t=4, budget=200, seed=0)
    assert a.complete, f"fixture build for {spec.name} did not saturate"
    return a


@pytest.fixture(scope="session")
def g22_approx():
    return _built(spec_a_rb(2, 2))


@pytest.fixture(scope="session")
def g33_approx():
    return _built(spec_a_rb(3, 3))


@pytest.fixture(scope="session")
def ginf_approx():
    return _built(spec_a_rb(UNBOUNDED, UNBOUNDED))


@pytest.fixture(scope="session")
def f21_approx():
    return _built(spec_f21())


@pytest.fixture(scope="session")
def f22_approx():
    return _built(spec_f22())


@pytest.fixture(scope="session")
def finf1_approx():
    return _built(spec_f_inf_1())


@pytest.fixture(scope="session")
def finf2_approx():
    return _built(spec_f_inf_2())


@pytest.fixture(scope="session")
def finfinf_approx():
    return _built(spec_f_inf_inf())


@pytest.fixture(scope="session")
def bipartite_approx():
    return _built(spec_bipartite())
