"""Shared fixtures for the moment-realizer tests."""

import json
from fractions import Fraction as F

import pytest

from moment_realizer.config_space import KSpec, SiteSpace
from moment_realizer.polynomial import MomentFunctional
from moment_realizer.realizer import RealizabilityInstance, Realizer


def make_instance(sites, kspec, ell0, ell1, ell2, ell3=None, gamma=None, r_max=None,
                  spacing=None):
    if spacing is not None:
        space = SiteSpace.on_line(sites, F(spacing))
    else:
        space = SiteSpace(tuple(sites))
    L = MomentFunctional(F(ell0), [F(v) for v in ell1],
                         [[F(v) for v in row] for row in ell2],
                         ell3)
    return RealizabilityInstance(space, kspec, L, gamma, r_max)


@pytest.fixture
def build_instance():
    """Factory for instances given as plain moment lists."""
    return make_instance


@pytest.fixture
def realizer():
    """Realizer with the default caps."""
    return Realizer()


@pytest.fixture
def coin_instance():
    """One site, at most one particle, mean 1/2: realizable by a fair coin."""
    return make_instance(["a"], KSpec.at_most(1), 1, ["1/2"], [["1/2"]])


@pytest.fixture
def bad_variance_instance():
    """One site, at most one particle, but E[k^2] != E[k]."""
    return make_instance(["a"], KSpec.at_most(1), 1, ["1/2"], [["1/4"]])


@pytest.fixture
def pair_moments():
    """Moments of the uniform measure on the four simple configurations of two sites."""
    return dict(ell0=1, ell1=["1/2", "1/2"], ell2=[["1/2", "1/4"], ["1/4", "1/2"]])


@pytest.fixture
def instance_file(tmp_path):
    """Write an instance document to disk and return its path."""
    def write(data, name="instance.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return write


@pytest.fixture
def coin_document():
    """JSON document of the realizable one-site instance."""
    return {
        "sites": ["a"],
        "kspec": {"variant": "at_most", "Q": 1},
        "L": {"ell0": "1", "ell1": ["1/2"], "ell2": [["1/2"]]},
    }


@pytest.fixture
def bad_variance_document():
    """JSON document of the non-realizable one-site instance."""
    return {
        "sites": ["a"],
        "kspec": {"variant": "at_most", "Q": 1},
        "L": {"ell0": "1", "ell1": ["1/2"], "ell2": [["1/4"]]},
    }
