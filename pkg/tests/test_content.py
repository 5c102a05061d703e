"""Content upper bounds, greedy nets, and the weak pairwise expansion
check."""

import numpy as np
import pytest
from fractions import Fraction

from carnot.content import (
    _greedy_cover,
    content_upper,
    epsilon_net_cover,
    radius_grid_for,
    weak_bilip_check,
)
from carnot.homs import hom_from_first_layer
from carnot.maps import map_preset
from carnot.norms import dist_infty


def _line_dist(U, V):
    U = np.atleast_2d(np.asarray(U, dtype=float))
    V = np.asarray(V, dtype=float)
    return np.abs(U - V).max(axis=-1)


def test_radius_grid():
    assert radius_grid_for(1.0, 0.125) == (1.0, 0.5, 0.25, 0.125)
    assert radius_grid_for(1.0, 0.3) == (1.0, 0.5)
    # the coarsest radius survives even when it is below the floor
    assert radius_grid_for(0.5, 2.0) == (0.5,)
    with pytest.raises(ValueError):
        radius_grid_for(0.0, 0.1)
    with pytest.raises(ValueError):
        radius_grid_for(1.0, -1.0)


def test_content_singleton_is_zero():
    pts = np.array([[0.5, 0.25, 0.0]] * 4)
    est = content_upper(pts, 4, (1.0, 0.5), lambda U, V: _line_dist(U, V))
    assert est.upper == 0.0
    assert est.best_radius is None


def test_content_two_points():
    grid = radius_grid_for(1.0, 1.0 / 64)
    est = content_upper(np.array([[0.0], [1.0]]), 1, grid, _line_dist)
    # two balls at the finest radius always win for a two-point set
    assert est.upper == pytest.approx(2 * (2 * grid[-1]) ** 1)
    assert est.best_radius == grid[-1]
    assert len(est.cover) == 2


def test_content_input_validation():
    with pytest.raises(ValueError, match="nonempty"):
        content_upper(np.empty((0, 2)), 1, (1.0,), _line_dist)
    with pytest.raises(ValueError, match="radius grid"):
        content_upper(np.zeros((3, 2)), 1, (), _line_dist)


def test_content_matches_unpruned_minimum():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, size=(120, 2))
    grid = radius_grid_for(2.0, 1.0 / 16)
    est = content_upper(pts, 2, grid, _line_dist)
    want = min(
        len(_greedy_cover(pts, _line_dist, float(r))) * (2.0 * r) ** 2
        for r in grid
    )
    assert est.upper == pytest.approx(want)


def test_content_ignores_duplicates():
    rng = np.random.default_rng(8)
    pts = rng.uniform(0, 1, size=(60, 1))
    grid = radius_grid_for(1.0, 1.0 / 32)
    est1 = content_upper(pts, 1, grid, _line_dist)
    est2 = content_upper(np.concatenate([pts, pts]), 1, grid, _line_dist)
    assert est1.upper == pytest.approx(est2.upper)


def test_content_of_lipschitz_segment_image():
    # |x| maps [-1, 1] onto [0, 1]; the 1-content upper bound of a dense
    # sample stays within a factor 2 of the true length
    xs = np.linspace(-1, 1, 401).reshape(-1, 1)
    img = np.abs(xs)
    grid = radius_grid_for(1.0, 1.0 / 64)
    est = content_upper(img, 1, grid, _line_dist)
    assert 1.0 <= est.upper <= 2.0


def test_epsilon_net_cover(heis, lat4):
    one = Fraction(1)
    zero = Fraction(0)
    hom = hom_from_first_layer([[one, zero], [zero, one]], heis, heis)
    cover = epsilon_net_cover(hom, lat4, 0.25)
    assert cover.covered is True
    assert cover.separation == 0.25
    assert cover.count == len(cover.net) >= 1
    for i in range(cover.count):
        d = dist_infty(heis, cover.net, cover.net[i])
        d[i] = np.inf
        assert d.min() >= cover.separation - 1e-12
    smaller = epsilon_net_cover(hom, lat4, 0.25, radius=0.5)
    assert smaller.count < cover.count
    with pytest.raises(ValueError, match="eps"):
        epsilon_net_cover(hom, lat4, 0.0)


def test_weak_bilip_identity_passes(tree4, rng):
    ident = map_preset("identity")(tree4.lattice, rng)
    Q = tree4.cubes_at(0)[0]
    cert = weak_bilip_check(ident, tree4, Q, delta=0.05, b=0.05)
    assert cert["passed"] is True
    assert cert["witness"] is None
    assert cert["mode"] == "exhaustive"
    assert cert["admissible_pairs"] > 0
    assert cert["min_ratio"] == pytest.approx(1.0)


def test_weak_bilip_constant_fails_with_witness(tree4, rng):
    const = map_preset("constant")(tree4.lattice, rng)
    Q = tree4.cubes_at(0)[0]
    cert = weak_bilip_check(const, tree4, Q, delta=0.05, b=0.05)
    assert cert["passed"] is False
    assert cert["witness"] is not None
    assert cert["witness"]["ratio"] == 0.0


def test_weak_bilip_vacuous_when_threshold_excludes_all(tree4, rng):
    ident = map_preset("identity")(tree4.lattice, rng)
    Q = tree4.cubes_at(0)[0]
    cert = weak_bilip_check(ident, tree4, Q, delta=0.05, b=100.0)
    assert cert["passed"] is True
    assert cert["vacuous"] is True
    assert cert["admissible_pairs"] == 0


def test_weak_bilip_sampled_mode_deterministic(tree4, rng):
    ident = map_preset("identity")(tree4.lattice, rng)
    Q = tree4.cubes_at(0)[1]
    a = weak_bilip_check(ident, tree4, Q, delta=0.05, b=0.05,
                         max_pairs=10, sample_pairs=500, seed=3)
    b = weak_bilip_check(ident, tree4, Q, delta=0.05, b=0.05,
                         max_pairs=10, sample_pairs=500, seed=3)
    assert a["mode"] == "sampled"
    assert a["min_ratio"] == b["min_ratio"]
    assert a["pairs_checked"] == b["pairs_checked"]
