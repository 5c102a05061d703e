"""Coarse-differentiation statistics on horizontal lines.

The pair statistic compares the two half-speeds of a map over a
parameter interval against its full speed (a p-parallelogram excess);
the segment coefficient integrates it over ordered pairs with a uniform
grid quadrature; the cube coefficient Monte-Carlo-integrates segment
coefficients over horizontal lines through a slab around the cube
center.  All sampling is seeded per cube, so evaluation order cannot
change results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import homogeneous_dimension
from .norms import dist_infty, norm_infty

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class AlphaParams:
    p: float = 2.0
    L: float = 2.0
    direction_samples: int = 24
    translate_samples: int = 8
    segment_step: float | None = None
    seed: int = 0
    low_discrepancy: bool = True

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("need p >= 1")
        if self.L < 1:
            raise ValueError("need L >= 1")
        if self.direction_samples < 1 or self.translate_samples < 1:
            raise ValueError("sample counts must be positive")
        if self.segment_step is not None and self.segment_step <= 0:
            raise ValueError("segment_step must be positive")


@dataclass
class LineSegment:
    params: np.ndarray   # (M,) increasing, uniform spacing
    points: np.ndarray   # (M, dim of domain)
    values: np.ndarray   # (M, dim of codomain)


def make_segment(sample, x0, v, ts):
    alg = sample.lattice.algebra
    ts = np.asarray(ts, dtype=float)
    pts = alg.horizontal_point(np.asarray(x0, dtype=float), v, ts[:, None])
    return LineSegment(params=ts, points=pts, values=sample.fn(pts))


def _pair_stat(d1, d2, d3, gap, p):
    half = gap / 2.0
    return 0.5 * ((d1 / half) ** p + (d2 / half) ** p) - (d3 / gap) ** p


def partial_p(f, x, y, segment, params):
    """Pair statistic at parameters x < y of the segment; the midpoint
    snaps to the nearest grid node."""
    if len(segment.params) < 3:
        raise ValueError("degenerate segment: need at least 3 nodes")
    if not x < y:
        raise ValueError("need x < y")
    ts = segment.params
    ix = int(np.argmin(np.abs(ts - x)))
    iy = int(np.argmin(np.abs(ts - y)))
    if ix == iy:
        raise ValueError("x and y snap to the same node")
    im = int(np.argmin(np.abs(ts - 0.5 * (ts[ix] + ts[iy]))))
    dist = f.target.dist
    d1 = dist(segment.values[ix], segment.values[im])
    d2 = dist(segment.values[im], segment.values[iy])
    d3 = dist(segment.values[ix], segment.values[iy])
    return float(_pair_stat(d1, d2, d3, ts[iy] - ts[ix], params.p))


_PAIR_INDEX_CACHE = {}


def _even_pair_indices(M):
    """Index triples (i, midpoint, j) of every even-gap ordered pair in
    a grid of M nodes, with the integer gaps; cached per M."""
    cached = _PAIR_INDEX_CACHE.get(M)
    if cached is not None:
        return cached
    I, Mid, J, G = [], [], [], []
    for g in range(2, M, 2):
        i = np.arange(0, M - g)
        I.append(i)
        Mid.append(i + g // 2)
        J.append(i + g)
        G.append(np.full(M - g, g))
    out = (
        np.concatenate(I),
        np.concatenate(Mid),
        np.concatenate(J),
        np.concatenate(G).astype(float),
    )
    _PAIR_INDEX_CACHE[M] = out
    return out


def alpha_segment_values(ts, values, dist, p):
    """Grid quadrature of the pair statistic over x < y.

    Only even-gap pairs are used, so midpoints fall exactly on grid
    nodes; each pair carries weight 2*dt^2, which tiles the ordered-pair
    triangle of area (b-a)^2/2."""
    M = len(ts)
    if M < 3:
        raise ValueError("degenerate segment: need at least 3 nodes")
    dt = float(ts[1] - ts[0])
    span = float(ts[-1] - ts[0])
    i, m, j, g = _even_pair_indices(M)
    d1 = dist(values[i], values[m])
    d2 = dist(values[m], values[j])
    d3 = dist(values[i], values[j])
    total = float(np.sum(_pair_stat(d1, d2, d3, g * dt, p)))
    return total * dt * dt / (span * span)


def alpha_segment(f, segment, params):
    return alpha_segment_values(
        segment.params, segment.values, f.target.dist, params.p
    )


def _directions(m1, count, rng, low_discrepancy):
    if m1 == 2 and low_discrepancy:
        k = np.arange(count)
        theta = 2.0 * math.pi * np.mod(k * GOLDEN, 1.0)
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    v = rng.normal(size=(count, m1))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _perp_basis(v):
    """Orthonormal basis of the orthogonal complement of v in V_1."""
    m1 = len(v)
    basis = []
    cols = [v]
    for e in np.eye(m1):
        w = e.copy()
        for c in cols:
            w -= np.dot(w, c) * c
        n = np.linalg.norm(w)
        if n > 1e-9:
            w /= n
            cols.append(w)
            basis.append(w)
        if len(basis) == m1 - 1:
            break
    return np.array(basis) if basis else np.zeros((0, m1))


def slab_kappa(alg):
    """Per-coordinate constants bounding the hit set of the indicator.

    A line x0 exp(t v), x0 = z exp(w) with w orthogonal to v, meets
    B(z, r) only if every coordinate of w satisfies
    |w_c| <= kappa_c * r^layer(c): the first layer forces |t| <= r and
    |w_1| <= r, and each higher layer adds at most the triangle-style
    sum of absolute BCH coefficients over lower layers (each monomial
    is graded, so the bound is scale-free).  Cached on the algebra."""
    cached = getattr(alg, "_slab_kappa_cache", None)
    if cached is not None:
        return cached
    n = alg.dim
    m1 = alg.layer_dims[0]
    first = np.zeros(n)
    first[:m1] = 1.0
    targets = np.ones(n)
    kappa = _translate_bounds(alg, targets, first, first)
    alg._slab_kappa_cache = kappa
    return kappa


def _translate_bounds(alg, targets, w_first, v_first):
    """Recursive per-coordinate bound on w solving w * (t v) = s.

    Given |s_c| <= targets[c], |w_c| <= w_first[c] on the first layer,
    and |(t v)_c| <= v_first[c] (zero above the first layer), bounds
    each higher coordinate of w by targets[c] plus the absolute-value
    sum of the nonlinear BCH terms, ascending through the layers."""
    n = alg.dim
    m1 = alg.layer_dims[0]
    poly = alg._bch_polynomial_float()
    out = np.array(w_first, dtype=float)
    for c in range(m1, n):
        s = targets[c]
        for coeff, mono in poly[c]:
            if mono == ((c, 1),):
                continue
            prod = abs(coeff)
            for var, p in mono:
                b = out[var] if var < n else v_first[var - n]
                prod *= b ** p
            s += prod
        out[c] = s
    return out


def domain_support_box(alg, R):
    """Per-coordinate half-widths containing every slab translate w
    whose line x0 exp(t v), x0 = z exp(w), has a grid node in B(0, R)
    for some center z in B(0, R) (unit norm weights).

    A node q in the ball gives w * (t v) = z^{-1} q, whose coordinates
    are bounded by the absolute-coefficient sums of the BCH polynomial
    evaluated at |z_c|, |q_c| <= R^layer(c); the first layer forces
    |t|, |w_1| <= 2R, and higher layers follow the same recursion as
    slab_kappa.  Cached on the algebra per radius."""
    cache = getattr(alg, "_domain_box_cache", None)
    if cache is None:
        cache = alg._domain_box_cache = {}
    key = float(R)
    if key in cache:
        return cache[key]
    n = alg.dim
    m1 = alg.layer_dims[0]
    poly = alg._bch_polynomial_float()
    Rl = np.array([R ** j for j in alg.layer_of])
    targets = np.empty(n)
    for c in range(n):
        s = 0.0
        for coeff, mono in poly[c]:
            prod = abs(coeff)
            for var, p in mono:
                prod *= Rl[var % n] ** p
            s += prod
        targets[c] = s
    first = np.zeros(n)
    first[:m1] = 2.0 * R
    out = _translate_bounds(alg, targets, first, first)
    cache[key] = out
    return out


def alpha_ball(f, center, ell, params, domain_radius=None, seed_key=(0,)):
    """Monte-Carlo cube coefficient around an arbitrary center.

    Lines x0 exp(t v): directions v on the unit sphere of V_1, slab
    translates x0 = center.exp(w) with w orthogonal to v drawn uniformly
    from a box containing every line that can touch B(center, L ell)
    (the support of the indicator; see slab_kappa); the box volume
    weights the slab integral.  Per line, the segment is the interval
    hull of the grid nodes inside B(center, 3L ell) (and inside the
    sampled ball when domain_radius is given); lines whose segment has
    fewer than 3 nodes contribute zero."""
    alg = f.lattice.algebra
    cfg = None  # domain distances use the all-ones norm weights
    m1 = alg.layer_dims[0]
    N = homogeneous_dimension(alg)
    Lell = params.L * ell
    step = params.segment_step if params.segment_step is not None else float(f.lattice.h)
    center = np.asarray(center, dtype=float)
    rng = np.random.default_rng(
        np.random.SeedSequence([params.seed, *[int(s) for s in seed_key]])
    )
    dirs = _directions(m1, params.direction_samples, rng, params.low_discrepancy)

    # Box for w covering the support of the contributions: a line only
    # counts if it passes within L*ell of the center (slab_kappa bound)
    # and, when a domain radius is given, has grid nodes inside the
    # domain ball (domain_support_box bound).  Intersecting the two
    # boxes removes only provably-zero lines, leaving the integral
    # unchanged.
    kappa = slab_kappa(alg)
    dom = domain_support_box(alg, domain_radius) if domain_radius is not None else None
    w1 = Lell if dom is None else min(Lell, dom[0])
    half_widths = [w1] * (m1 - 1)
    vol = (2.0 * w1) ** (m1 - 1)
    for c in range(m1, alg.dim):
        j = alg.layer_of[c]
        w_c = kappa[c] * Lell ** j
        if dom is not None:
            w_c = min(w_c, dom[c])
        half_widths.append(w_c)
        vol *= 2.0 * w_c
    half_widths = np.array(half_widths)

    # Hull endpoints always satisfy |t| <= 3 L ell, and in-domain nodes
    # satisfy |t| <= 2 * domain_radius, so the grid can stop there.
    t_max = 3.0 * Lell
    if domain_radius is not None:
        t_max = min(t_max, 2.0 * domain_radius)
    K = int(math.floor(t_max / step))
    ts = np.arange(-K, K + 1) * step
    total = 0.0
    lines = 0
    hits = 0
    degenerate = 0
    M = len(ts)
    dt = step
    for v in dirs:
        P = _perp_basis(v)
        u = rng.uniform(-1.0, 1.0, size=(params.translate_samples, len(half_widths)))
        w = u * half_widths
        wvec = np.zeros((params.translate_samples, alg.dim))
        if m1 > 1:
            wvec[:, :m1] = w[:, : m1 - 1] @ P
        wvec[:, m1:] = w[:, m1 - 1:]
        x0 = alg.multiply_float(center, wvec)
        pts = alg.horizontal_point(x0[:, None, :], v, ts[None, :, None])
        d = dist_infty(alg, pts, center, cfg)
        inside = d <= 3.0 * Lell
        if domain_radius is not None:
            inside &= norm_infty(alg, pts, cfg) <= domain_radius
        hit = (d <= Lell).any(axis=1)
        # Gather the pair quadrature of every usable line into one batch
        # of distance evaluations (per-pair weights dt^2 / span^2).
        I, Mid, J, G = [], [], [], []
        weights = []
        lines += params.translate_samples
        for r in range(params.translate_samples):
            if not hit[r]:
                continue
            hits += 1
            idx = np.flatnonzero(inside[r])
            if len(idx) == 0 or idx[-1] - idx[0] + 1 < 3:
                degenerate += 1
                continue
            i0, i1 = int(idx[0]), int(idx[-1])
            Mr = i1 - i0 + 1
            pi, pm, pj, pg = _even_pair_indices(Mr)
            base = r * M + i0
            I.append(base + pi)
            Mid.append(base + pm)
            J.append(base + pj)
            G.append(pg)
            span = (Mr - 1) * dt
            weights.append(np.full(len(pi), dt * dt / (span * span)))
        if not I:
            continue
        vals = f.fn(pts.reshape(-1, alg.dim))
        I = np.concatenate(I)
        Mid = np.concatenate(Mid)
        J = np.concatenate(J)
        G = np.concatenate(G)
        weights = np.concatenate(weights)
        dist = f.target.dist
        d1 = dist(vals[I], vals[Mid])
        d2 = dist(vals[Mid], vals[J])
        d3 = dist(vals[I], vals[J])
        total += float(np.sum(_pair_stat(d1, d2, d3, G * dt, params.p) * weights))
    raw = vol * total / (lines * Lell ** (N - 1))
    diag = {
        "lines": lines,
        "hits": hits,
        "degenerate": degenerate,
        "raw": raw,
        "warning": None if hits else "no line hit the indicator ball",
    }
    alpha = max(raw, 0.0) if raw >= -1e-9 else raw
    return alpha, diag


def alpha_cube(f, tree, cube, params):
    """Cube coefficient with a deterministic per-cube seed."""
    lattice = tree.lattice
    ell = tree.side(cube.scale)
    z = lattice.points[cube.center]
    return alpha_ball(
        f,
        z,
        ell,
        params,
        domain_radius=float(lattice.R),
        seed_key=(cube.scale - tree.k_min, cube.ordinal),
    )


def alpha_all(f, tree, params):
    """Alpha for every cube, keyed by cube id."""
    out = {}
    for cube in tree.all_cubes():
        a, diag = alpha_cube(f, tree, cube, params)
        out[cube.cube_id] = {"alpha": a, "diag": diag, "cube": cube}
    return out


def carleson_sum(f, tree, S, params, alpha_cache=None):
    """Sum of alpha(Q) |Q| over the subcubes of S, divided by |S|."""
    cell = tree.lattice.cell_volume
    per_scale = {}
    summands = []
    for cube in tree.descendants(S):
        if alpha_cache is not None and cube.cube_id in alpha_cache:
            a = alpha_cache[cube.cube_id]["alpha"]
        else:
            a, _ = alpha_cube(f, tree, cube, params)
        weight = len(cube.points) * cell
        term = a * weight
        per_scale[cube.scale] = per_scale.get(cube.scale, 0.0) + term
        summands.append({"cube": cube.cube_id, "alpha": a, "measure": weight})
    vol_S = len(S.points) * cell
    total = sum(per_scale.values()) / vol_S
    return {
        "total": total,
        "per_scale": {k: v / vol_S for k, v in per_scale.items()},
        "summands": summands,
    }
