"""Shared fixtures: the canonical graphs and observation sets."""

from fractions import Fraction

import pytest

from cgdiag import fixtures


@pytest.fixture
def fork():
    return fixtures.fork()


@pytest.fixture
def chain():
    return fixtures.chain()


@pytest.fixture
def star():
    return fixtures.star()


@pytest.fixture
def fork_obs_a():
    return dict(fixtures.FORK_OBS_A)


@pytest.fixture
def fork_obs_b():
    return dict(fixtures.FORK_OBS_B)


@pytest.fixture
def fork_obs_c():
    return dict(fixtures.FORK_OBS_C)


@pytest.fixture
def fork_obs_ok():
    return dict(fixtures.FORK_OBS_OK)


@pytest.fixture
def star_obs_one_bad():
    """Consistent inputs, X1 off by four."""
    return {
        "P1": Fraction(1),
        "P2": Fraction(1),
        "X1": Fraction(5),
        "X2": Fraction(1),
    }
