"""Coarse differentiation: pair statistic, segment quadrature, cube
coefficients, Carleson packing."""

import numpy as np
import pytest

from carnot.coarse import (
    AlphaParams,
    _even_pair_indices,
    alpha_all,
    alpha_ball,
    alpha_segment,
    alpha_segment_values,
    carleson_sum,
    domain_support_box,
    make_segment,
    partial_p,
    slab_kappa,
)
from carnot.lattice import build_lattice
from carnot.maps import LipschitzMapSample, TargetMetric, map_preset
from carnot.presets import abelian

from helpers import riemann_alpha_abs


@pytest.fixture(scope="module")
def absmap():
    alg = abelian(1)
    lat = build_lattice(alg, 1.0, "1/20")
    return LipschitzMapSample(
        lat, lambda X: np.abs(np.asarray(X, dtype=float)),
        TargetMetric(alg), 1.0, "abs",
    )


def test_alpha_params_validation():
    with pytest.raises(ValueError, match="p >= 1"):
        AlphaParams(p=0.5)
    with pytest.raises(ValueError, match="L >= 1"):
        AlphaParams(L=0.5)
    with pytest.raises(ValueError, match="positive"):
        AlphaParams(direction_samples=0)
    with pytest.raises(ValueError, match="segment_step"):
        AlphaParams(segment_step=-1.0)


def test_slab_kappa_heisenberg(heis):
    assert np.allclose(slab_kappa(heis), [1.0, 1.0, 2.0])
    assert slab_kappa(heis) is slab_kappa(heis)  # cached


def test_domain_support_box_heisenberg(heis):
    assert np.allclose(domain_support_box(heis, 1.0), [2.0, 2.0, 7.0])


def test_even_pair_indices_enumeration():
    M = 7
    i, m, j, g = _even_pair_indices(M)
    got = set(zip(i.tolist(), m.tolist(), j.tolist(), g.tolist()))
    want = {
        (a, (a + b) // 2, b, float(b - a))
        for a in range(M)
        for b in range(a + 2, M, 2)
    }
    assert got == want


def test_pair_statistic_vanishes_on_straight_lines(lat4, rng):
    ident = map_preset("identity")(lat4, rng)
    params = AlphaParams(p=2.0, L=1.0)
    v = np.array([1.0, 0.0])
    seg = make_segment(ident, np.zeros(3), v, np.arange(-5, 6) * 0.1)
    assert abs(partial_p(ident, -0.4, 0.4, seg, params)) <= 1e-12
    assert abs(alpha_segment(ident, seg, params)) <= 1e-12


def test_partial_p_argument_errors(lat4, rng):
    ident = map_preset("identity")(lat4, rng)
    params = AlphaParams()
    seg = make_segment(ident, np.zeros(3), np.array([1.0, 0.0]),
                       np.arange(-2, 3) * 0.1)
    with pytest.raises(ValueError, match="x < y"):
        partial_p(ident, 0.2, -0.2, seg, params)
    with pytest.raises(ValueError, match="same node"):
        partial_p(ident, 0.100, 0.101, seg, params)
    short = make_segment(ident, np.zeros(3), np.array([1.0, 0.0]),
                         np.array([0.0, 0.1]))
    with pytest.raises(ValueError, match="degenerate"):
        partial_p(ident, 0.0, 0.1, short, params)
    with pytest.raises(ValueError, match="degenerate"):
        alpha_segment_values(short.params, short.values,
                             ident.target.dist, 2.0)


def test_segment_quadrature_matches_pairwise_oracle(absmap):
    # independent accumulation: one partial_p call per even-gap pair
    params = AlphaParams(p=2.0, L=1.0)
    ts = np.arange(-8, 9) * 0.1
    seg = make_segment(absmap, np.array([0.25]), np.array([1.0]), ts)
    got = alpha_segment(absmap, seg, params)
    dt = 0.1
    span = ts[-1] - ts[0]
    want = sum(
        partial_p(absmap, ts[a], ts[b], seg, params)
        for a in range(len(ts))
        for b in range(a + 2, len(ts), 2)
    ) * dt * dt / (span * span)
    assert got == pytest.approx(want, abs=1e-14)


def test_segment_quadrature_converges_to_riemann(absmap):
    # segment of t -> |t| over a fixed interval: the grid quadrature
    # approaches the continuum double integral as the grid refines
    A, B = -0.75, 0.7
    oracle = riemann_alpha_abs(A, B, n=2000)
    dist = absmap.target.dist
    errs = []
    for M in (117, 233):
        ts = np.linspace(A, B, M)
        vals = np.abs(ts).reshape(-1, 1)
        a = alpha_segment_values(ts, vals, dist, 2.0)
        errs.append(abs(a - oracle) / oracle)
    assert errs[0] <= 0.03
    assert errs[1] <= 0.015
    assert errs[1] < errs[0]


def test_alpha_ball_one_dim_matches_riemann(absmap):
    # the full Monte-Carlo cube coefficient collapses, on a one-dim
    # abelian domain, to the segment value over the clipped hull
    # [-0.45, 1.0]; two quadrature refinements agree with the
    # double-Riemann oracle within 1%
    center = np.array([0.3])
    oracle = riemann_alpha_abs(-0.45, 1.0, n=2000)
    for step, tol in ((1.0 / 256, 0.01), (1.0 / 512, 0.01)):
        params = AlphaParams(p=2.0, L=1.0, direction_samples=2,
                             translate_samples=1, segment_step=step, seed=0)
        a, diag = alpha_ball(absmap, center, 0.25, params, domain_radius=1.0)
        assert diag["hits"] == diag["lines"] == 2
        assert abs(a - oracle) / oracle <= tol


def test_alpha_ball_degenerate_lines(absmap):
    # a domain ball so small that segments have < 3 grid nodes
    params = AlphaParams(p=2.0, L=1.0, direction_samples=2,
                         translate_samples=1, segment_step=0.05, seed=0)
    a, diag = alpha_ball(absmap, np.array([0.3]), 0.25, params,
                         domain_radius=0.01)
    assert a == 0.0
    assert diag["degenerate"] == diag["lines"]


def test_identity_alpha_zero_on_every_cube(tree4, rng):
    ident = map_preset("identity")(tree4.lattice, rng)
    params = AlphaParams(p=2.0, L=1.0, direction_samples=6,
                         translate_samples=2)
    res = alpha_all(ident, tree4, params)
    assert set(res) == {c.cube_id for c in tree4.all_cubes()}
    for entry in res.values():
        assert 0.0 <= entry["alpha"] <= 1e-6
        assert entry["diag"]["raw"] >= -1e-9
        assert set(entry["diag"]) >= {"lines", "hits", "degenerate", "raw",
                                      "warning"}


def test_alpha_cube_deterministic(tree4, rng):
    fold = map_preset("fold")(tree4.lattice, rng)
    params = AlphaParams(p=2.0, L=1.0, direction_samples=4,
                         translate_samples=2)
    first = alpha_all(fold, tree4, params)
    second = alpha_all(fold, tree4, params)
    for cid in first:
        assert first[cid]["alpha"] == second[cid]["alpha"]


def test_carleson_sum_structure(tree4, rng):
    fold = map_preset("fold")(tree4.lattice, rng)
    params = AlphaParams(p=2.0, L=1.0, direction_samples=6,
                         translate_samples=2)
    cache = alpha_all(fold, tree4, params)
    S = tree4.root()
    cs = carleson_sum(fold, tree4, S, params, alpha_cache=cache)
    assert cs["total"] > 0
    assert set(cs["per_scale"]) == {-1, 0, 1}
    assert cs["total"] == pytest.approx(sum(cs["per_scale"].values()))
    assert len(cs["summands"]) == len(tree4.descendants(S))
    for s in cs["summands"]:
        assert s["alpha"] >= 0.0
        assert s["measure"] > 0.0
    # cache entries are used verbatim
    for s in cs["summands"]:
        assert s["alpha"] == cache[s["cube"]]["alpha"]
