"""Map samples: target metrics, Lipschitz verification, preset families."""

import numpy as np
import pytest

from carnot.maps import (
    LipschitzMapSample,
    TargetMetric,
    calibrate_nonnegativity,
    make_fold_fn,
    map_preset,
)
from carnot.norms import dist_infty
from carnot.presets import abelian, algebra_preset


def test_quotient_metric_is_orbit_minimum(heis, rng):
    sig = np.diag([-1.0, 1.0, -1.0])
    target = TargetMetric(heis, sigma=sig, name="quotient")
    U = rng.normal(size=(40, 3))
    V = rng.normal(size=(40, 3))
    d_plain = dist_infty(heis, U, V)
    d_flip = dist_infty(heis, U, V @ sig.T)
    assert np.allclose(target.dist(U, V), np.minimum(d_plain, d_flip))
    # quotient distance never exceeds the plain one
    assert np.all(target.dist(U, V) <= d_plain + 1e-15)


def test_fold_fn_reflects_left_halfspace(heis, rng):
    sig = np.diag([-1.0, 1.0, -1.0])
    fold = make_fold_fn(sig)
    X = rng.normal(size=(50, 3))
    out = fold(X)
    left = X[:, 0] < 0
    assert np.array_equal(out[~left], X[~left])
    assert np.allclose(out[left], X[left] @ sig.T)
    # image lands in the closed right half-space
    assert np.all(out[:, 0] >= 0)


def test_fold_identifies_mirror_pairs(fold8):
    lat = fold8.lattice
    X = lat.points
    sig = np.diag([-1.0, 1.0, -1.0])
    mirrored = X @ sig.T
    vals_m = fold8.fn(mirrored)
    # off the fixed plane x1 = 0 the values agree literally; on it they
    # agree only up to sigma, which the quotient metric absorbs
    off = X[:, 0] != 0
    assert np.allclose(fold8.values[off], vals_m[off], atol=1e-12)
    d = fold8.target.dist(fold8.values, vals_m)
    assert np.all(d <= 1e-9)


def test_shape_validation(lat4):
    target = TargetMetric(lat4.algebra)
    with pytest.raises(ValueError, match="shape"):
        LipschitzMapSample(
            lat4, lambda X: np.zeros((lat4.size, 2)), target, 1.0, "bad"
        )


def test_declared_lipschitz_violation_raises(lat4):
    target = TargetMetric(lat4.algebra)
    with pytest.raises(ValueError, match="Lipschitz"):
        LipschitzMapSample(
            lat4, lambda X: 10.0 * np.asarray(X, dtype=float), target, 1.0,
            "inflated",
        )


def test_measured_within_declared(fold8, identity8):
    for sample in (fold8, identity8):
        assert sample.measured_lipschitz <= sample.declared_lipschitz * 1.01 + 1e-12
        assert sample.measured_lipschitz > 0


def test_reflection_needs_heisenberg_layout(lat4, rng):
    engel_lat_build = map_preset("fold")
    from carnot.lattice import build_lattice

    eng = algebra_preset("engel")
    lat = build_lattice(eng, 1.0, "1/2")
    with pytest.raises(ValueError, match=r"\(2,1\)"):
        engel_lat_build(lat, rng)


@pytest.mark.parametrize("name", ["identity", "constant", "collapse",
                                  "fold", "fold-abelian"])
def test_presets_build(lat4, rng, name):
    sample = map_preset(name)(lat4, rng)
    assert sample.name == name
    assert sample.values.shape == (lat4.size, sample.target.algebra.dim)


def test_constant_preset_codomain(lat4, rng):
    sample = map_preset("constant", {"codomain": "engel"})(lat4, rng)
    assert sample.target.algebra.dim == 4
    assert np.all(sample.values == 0)
    assert sample.declared_lipschitz == 0.0


def test_collapse_preset_projects_first_coordinate(lat4, rng):
    sample = map_preset("collapse")(lat4, rng)
    assert sample.target.algebra.dim == 1
    assert np.allclose(sample.values[:, 0], lat4.points[:, 0])


def test_hom_preset_rescales_to_one_lipschitz(lat4, rng):
    sample = map_preset(
        "hom",
        {"codomain": "heisenberg", "matrix": [["2", "0"], ["0", "2"]]},
    )(lat4, rng)
    assert sample.measured_lipschitz <= 1.01
    assert sample.hom_rescale >= 1.0


def test_fold_abelian_values(lat4, rng):
    sample = map_preset("fold-abelian")(lat4, rng)
    assert np.allclose(sample.values[:, 0], np.abs(lat4.points[:, 0]))
    assert np.allclose(sample.values[:, 1], lat4.points[:, 1])


def test_unknown_preset(lat4, rng):
    with pytest.raises(ValueError, match="unknown map preset"):
        map_preset("mystery")(lat4, rng)


def test_nonnegativity_calibration(fold8):
    rng = np.random.default_rng(3)
    cert = calibrate_nonnegativity(fold8, 2.0, rng, n_triples=500)
    assert fold8.target.nonnegativity_certificate == cert
    assert cert >= -1e-9
