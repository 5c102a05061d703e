"""Christ cubes: audited invariants, dilation, hats, pair cubes, the
separation constant."""

import numpy as np
import pytest

from carnot.cubes import (
    audit_cube_tree,
    build_cube_tree,
    dilate_cube,
    estimate_b,
    hat_cube,
    hat_points,
    set_distance,
    smallest_cube_2Q,
)
from carnot.norms import dist_infty


def test_tree_shape(tree4):
    assert tree4.k_min == -1 and tree4.k_max == 1
    assert len(tree4.cubes_at(1)) == 1
    assert tree4.cube_count() == sum(
        len(tree4.cubes_at(k)) for k in (-1, 0, 1)
    )
    root = tree4.root()
    assert len(root.points) == tree4.lattice.size


def test_scale_guards(lat4):
    with pytest.raises(ValueError, match="2R"):
        build_cube_tree(lat4, 4.0, -1, 0)
    with pytest.raises(ValueError, match="sample"):
        build_cube_tree(lat4, 4.0, -2, 1)
    with pytest.raises(ValueError, match="tau"):
        build_cube_tree(lat4, 1.0, -1, 1)


def test_audit_passes_exactly(tree4):
    report = audit_cube_tree(tree4)
    assert report["partition"] is True
    assert report["nesting"] is True
    assert report["outer_ball"] is True
    assert report["inner_ball"] is True
    assert report["violations"] == []


def test_nets_are_nested_and_separated(tree4):
    lat = tree4.lattice
    for k in (1, 0):
        coarse = set(tree4.nets[k])
        finer = set(tree4.nets[k - 1])
        assert coarse <= finer
    for k in (-1, 0, 1):
        net = tree4.nets[k]
        pts = lat.points[net]
        sep = tree4.side(k)
        for i in range(len(net)):
            d = dist_infty(lat.algebra, pts, pts[i])
            d[i] = np.inf
            assert d.min() >= sep - 1e-12


def test_chain_is_consistent(tree4):
    x = tree4.lattice.size // 2
    chain = tree4.chain(x)
    assert [c.scale for c in chain] == [-1, 0, 1]
    for child, parent in zip(chain, chain[1:]):
        assert child.parent is parent
        assert x in child.points and x in parent.points


def test_set_distance_matches_brute_force(tree4):
    lat = tree4.lattice
    rows = np.array([0, 5, 17])
    targets = np.array([3, 8, 21, 40])
    got = set_distance(tree4, rows, targets=targets)
    want = np.array([
        min(
            float(dist_infty(lat.algebra, lat.points[r], lat.points[t]))
            for r in rows
        )
        for t in targets
    ])
    assert np.allclose(got, want, atol=1e-12)


def test_dilate_cube(tree4):
    Q = tree4.cubes_at(0)[1]
    assert np.array_equal(dilate_cube(tree4, Q, 1.0), np.asarray(Q.points))
    rows2 = dilate_cube(tree4, Q, 2.0)
    assert set(Q.points) <= set(rows2)
    d = set_distance(tree4, Q.points, targets=rows2)
    assert np.all(d <= Q.diam + 1e-12)
    with pytest.raises(ValueError):
        dilate_cube(tree4, Q, 0.5)


def test_dilate_cube_exhaustive_oracle(tree4):
    # brute force: every lattice point within (lam-1) diam of the cube
    Q = tree4.cubes_at(-1)[3]
    lam = 1.5
    margin = (lam - 1) * Q.diam
    d_all = set_distance(tree4, Q.points)
    want = np.flatnonzero(d_all <= margin)
    got = dilate_cube(tree4, Q, lam)
    assert np.array_equal(np.sort(got), want)


def test_hat_cube_contains_self_and_is_symmetric(tree4):
    cubes = tree4.cubes_at(0)
    hats = {c.ordinal: {o.ordinal for o in hat_cube(tree4, c)} for c in cubes}
    for c in cubes:
        assert c.ordinal in hats[c.ordinal]
    # membership is defined by set distance <= diam(Q), which is not
    # symmetric between cubes of different diameters; verify against a
    # brute-force oracle instead
    for c in cubes[:4]:
        want = set()
        for o in cubes:
            dmin = float(set_distance(tree4, c.points, targets=o.points).min())
            if dmin <= c.diam:
                want.add(o.ordinal)
        assert hats[c.ordinal] == want


def test_hat_points_union(tree4):
    Q = tree4.cubes_at(0)[0]
    hp = hat_points(tree4, Q)
    manual = np.unique(
        np.concatenate([c.points for c in hat_cube(tree4, Q)])
    )
    assert np.array_equal(hp, manual)
    assert set(Q.points) <= set(hp)


def test_smallest_cube_2Q(tree4):
    lat = tree4.lattice
    x = 0
    same = tree4.cube_of(x, -1)
    y = int(same.points[-1]) if len(same.points) > 1 else None
    if y is not None and y != x:
        Q, ratio = smallest_cube_2Q(tree4, x, y)
        assert Q.scale == -1
        d = float(dist_infty(lat.algebra, lat.points[x], lat.points[y]))
        assert ratio == pytest.approx(d / Q.diam)
    far = int(np.argmax(dist_infty(lat.algebra, lat.points, lat.points[x])))
    Q, _ = smallest_cube_2Q(tree4, x, far)
    assert Q.scale >= 0
    with pytest.raises(ValueError):
        smallest_cube_2Q(tree4, 3, 3)


def test_estimate_b(tree4):
    rng = np.random.default_rng(7)
    b = estimate_b(tree4, 2000, rng)
    assert 0 < b <= 0.1
    # deterministic under the same seed
    assert b == estimate_b(tree4, 2000, np.random.default_rng(7))


def test_boundary_statistic_direction(tree8):
    # cached by the session fixture users; at desk scale every mid cube
    # has a smaller boundary fraction at the finer threshold
    report = audit_cube_tree(tree8)
    assert report["ok"] is True
    assert report["boundary_decrease_fraction"] >= 0.9
