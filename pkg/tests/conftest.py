"""Shared fixtures.

The desk-scale objects (h = 1/8 Heisenberg lattice, its cube tree, and
the three canonical decomposition runs) are session-scoped because they
are the expensive part of the suite; the timing recorded alongside each
run is what the acceptance tests assert against, so the work is done
once and budget checks remain meaningful.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from carnot.coarse import AlphaParams
from carnot.cubes import build_cube_tree
from carnot.decompose import decompose
from carnot.lattice import build_lattice
from carnot.maps import map_preset
from carnot.presets import algebra_preset


@pytest.fixture(scope="session")
def heis():
    return algebra_preset("heisenberg")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def lat4(heis):
    return build_lattice(heis, 1, Fraction(1, 4))


@pytest.fixture(scope="session")
def tree4(lat4):
    return build_cube_tree(lat4, 4.0, -1, 1)


@pytest.fixture(scope="session")
def lat8(heis):
    return build_lattice(heis, 1, Fraction(1, 8))


@pytest.fixture(scope="session")
def tree8(lat8):
    return build_cube_tree(lat8, 4.0, -1, 1)


@pytest.fixture(scope="session")
def fold8(lat8):
    return map_preset("fold")(lat8)


@pytest.fixture(scope="session")
def identity8(lat8):
    return map_preset("identity")(lat8)


def _timed_decompose(f, tree):
    t0 = time.perf_counter()
    dec = decompose(f, tree, delta=0.05, alpha_params=AlphaParams(L=1.0))
    return dec, time.perf_counter() - t0


@pytest.fixture(scope="session")
def fold8_run(fold8, tree8):
    """(decomposition, elapsed seconds) for the canonical fold run."""
    return _timed_decompose(fold8, tree8)


@pytest.fixture(scope="session")
def identity8_run(identity8, tree8):
    return _timed_decompose(identity8, tree8)


@pytest.fixture(scope="session")
def constant8_run(lat8, tree8):
    return _timed_decompose(map_preset("constant")(lat8), tree8)


@pytest.fixture(scope="session")
def fold4(lat4):
    return map_preset("fold")(lat4)


@pytest.fixture(scope="session")
def fold4_run(fold4, tree4):
    """Second-resolution fold run for the stability comparisons."""
    return _timed_decompose(fold4, tree4)
