"""Hausdorff-content upper bounds, image nets, and pair checks.

Content is estimated from above only: a greedy ball cover is built at
each radius of a geometric grid and the best value of count * (2r)^N
wins.  The same greedy-net routine powers the epsilon-net covers used
for collapsing homomorphisms, and the weak biLipschitz check examines
well-separated pairs in a doubled cube.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cubes import dilate_cube


@dataclass
class ContentEstimate:
    upper: float
    cover: list          # (center row of the input array, radius)
    dimension: int
    radius_grid: tuple
    best_radius: float | None


@dataclass
class NetCover:
    net: np.ndarray      # (k, dim) codomain points
    separation: float
    count: int
    covered: bool


def radius_grid_for(side, floor):
    """Geometric grid side * 2^-j, stopping once below the floor; the
    coarsest radius is always included."""
    side = float(side)
    floor = float(floor)
    if side <= 0 or floor <= 0:
        raise ValueError("side and floor must be positive")
    grid = [side]
    r = side / 2.0
    while r >= floor:
        grid.append(r)
        r /= 2.0
    return tuple(grid)


def _greedy_cover(points, dist, radius, abort_count=None):
    """Greedy cover in input-index order: a point becomes a center when
    no earlier center covers it.  Returns center indices, or None when
    the count exceeds abort_count (the radius cannot win)."""
    n = len(points)
    mind = np.full(n, np.inf)
    centers = []
    for i in range(n):
        if mind[i] <= radius:
            continue
        centers.append(i)
        if abort_count is not None and len(centers) > abort_count:
            return None
        d = dist(points, points[i])
        np.minimum(mind, d, out=mind)
    return centers


def content_upper(points, N, radius_grid, dist):
    """Upper bound on the N-dimensional Hausdorff content of a sample.

    Greedy ball covering at each grid radius; the reported value is the
    minimum of count * (2 * radius)^N over the grid.  A set that is a
    single point (after removing duplicates) has content zero, since
    arbitrarily small radii are admissible for a finite set."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or len(points) == 0:
        raise ValueError("need a nonempty (n, dim) point array")
    if not radius_grid:
        raise ValueError("radius grid is empty")
    unique = np.unique(points, axis=0)
    if len(unique) == 1:
        return ContentEstimate(
            upper=0.0,
            cover=[(0, 0.0)],
            dimension=N,
            radius_grid=tuple(radius_grid),
            best_radius=None,
        )
    best = np.inf
    best_cover = None
    best_radius = None
    for r in sorted(radius_grid, reverse=True):
        r = float(r)
        cap = best / (2.0 * r) ** N
        centers = _greedy_cover(points, dist, r, abort_count=cap)
        if centers is None:
            continue
        value = len(centers) * (2.0 * r) ** N
        if value < best:
            best = value
            best_cover = [(i, r) for i in centers]
            best_radius = r
    return ContentEstimate(
        upper=float(best),
        cover=best_cover,
        dimension=N,
        radius_grid=tuple(radius_grid),
        best_radius=best_radius,
    )


def epsilon_net_cover(hom, lattice, eps, center=None, radius=None, cfg=None):
    """Greedy maximal eps*ell-separated net over the image of a lattice
    ball under a homomorphism; verifies that the net covers every image
    sample within the separation."""
    from .homs import apply_hom
    from .norms import dist_infty

    if eps <= 0:
        raise ValueError("eps must be positive")
    ell = float(lattice.R) if radius is None else float(radius)
    pts = lattice.points
    if center is not None or radius is not None:
        centre = np.zeros(lattice.algebra.dim) if center is None else np.asarray(center, float)
        d = dist_infty(lattice.algebra, pts, centre, cfg)
        pts = pts[d <= ell]
    images = apply_hom(hom, pts)
    sep = eps * ell
    cod = hom.codomain

    def dist(A, B):
        return dist_infty(cod, A, B, cfg)

    n = len(images)
    mind = np.full(n, np.inf)
    keep = []
    for i in range(n):
        if mind[i] < sep:
            continue
        keep.append(i)
        np.minimum(mind, dist(images, images[i]), out=mind)
    net = images[keep]
    covered = bool(np.all(mind < max(sep, 1e-300)) if n else True)
    return NetCover(net=net, separation=sep, count=len(keep), covered=covered)


def weak_bilip_check(f, tree, Q, delta, b, max_pairs=10_000_000,
                     sample_pairs=100_000, seed=0):
    """Check that f expands all well-separated pairs of the doubled cube.

    Pairs x, x' in 2Q with d(x, x') > b * diam(Q) must satisfy
    d_H(f(x), f(x')) > delta * d(x, x').  All pairs are examined when
    their number is at most max_pairs; otherwise a seeded sample of at
    least sample_pairs is drawn.  Returns a certificate dict; a
    violating pair short-circuits."""
    lattice = tree.lattice
    alg = lattice.algebra
    rows = dilate_cube(tree, Q, 2.0)
    n = len(rows)
    total_pairs = n * (n - 1) // 2
    threshold = b * Q.diam
    cert = {
        "cube": Q.cube_id,
        "delta": delta,
        "b": b,
        "separation": threshold,
        "points": n,
        "total_pairs": int(total_pairs),
        "mode": "exhaustive" if total_pairs <= max_pairs else "sampled",
        "pairs_checked": 0,
        "admissible_pairs": 0,
        "min_ratio": None,
        "vacuous": False,
        "passed": None,
        "witness": None,
    }
    pts = lattice.points[rows]
    vals = f.values[rows]
    from .norms import dist_infty

    def examine(ii, jj):
        d = dist_infty(alg, pts[ii], pts[jj], None)
        keep = d > threshold
        cert["pairs_checked"] += int(len(ii))
        if not np.any(keep):
            return None
        ii, jj, d = ii[keep], jj[keep], d[keep]
        di = f.target.dist(vals[ii], vals[jj])
        cert["admissible_pairs"] += int(len(ii))
        ratios = di / d
        worst = int(np.argmin(ratios))
        ratio = float(ratios[worst])
        if cert["min_ratio"] is None or ratio < cert["min_ratio"]:
            cert["min_ratio"] = ratio
        if ratio <= delta:
            return (int(rows[ii[worst]]), int(rows[jj[worst]]), ratio)
        return None

    witness = None
    if cert["mode"] == "exhaustive":
        for i in range(n - 1):
            ii = np.full(n - 1 - i, i)
            jj = np.arange(i + 1, n)
            witness = examine(ii, jj)
            if witness:
                break
    else:
        rng = np.random.default_rng(seed)
        want = min(sample_pairs, total_pairs)
        got = 0
        while got < want and witness is None:
            k = min(want - got, 50_000) * 2
            ii = rng.integers(0, n, size=k)
            jj = rng.integers(0, n, size=k)
            m = ii != jj
            ii, jj = ii[m], jj[m]
            got += len(ii)
            witness = examine(ii, jj)
    if witness is not None:
        cert["passed"] = False
        cert["witness"] = {"x": witness[0], "y": witness[1], "ratio": witness[2]}
    elif cert["admissible_pairs"] == 0:
        cert["passed"] = True
        cert["vacuous"] = True
    else:
        cert["passed"] = True
    return cert
