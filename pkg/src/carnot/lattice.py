"""Graded-lattice discretization of a ball.

Layer-j coordinates run on a grid of spacing h^j, restricted to the
exact homogeneous ball N <= R (all-ones weights), which is separable
per layer: |g_j|^2 <= R^(2j). Points are enumerated in lexicographic
integer-tuple order, so builds are bit-for-bit reproducible.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .algebra import homogeneous_dimension
from .norms import dist_infty, norm_infty


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(str(x))


class GradedLattice:
    def __init__(self, algebra, R, h, int_tuples, points, center=None):
        self.algebra = algebra
        self.R = R
        self.h = h
        self.int_tuples = int_tuples
        self.points = points
        self.center = center
        self.index = {t: i for i, t in enumerate(int_tuples)}
        self.size = len(int_tuples)
        self.cell_volume = float(h) ** homogeneous_dimension(algebra)

    def exact_point(self, i):
        """Exact grid coordinates of point i (before any center shift)."""
        t = self.int_tuples[i]
        return tuple(
            k * self.h ** j for k, j in zip(t, self.algebra.layer_of)
        )

    def snap_tuple(self, x):
        """Group-adapted rounding of a float point to a grid tuple.

        Layers are peeled in order: after fixing layers < j, the layer-j
        block of y^{-1} x depends on y's layer-j coordinates linearly,
        so rounding them leaves a residual of at most h^j / 2 per
        coordinate. The returned tuple may fall outside the ball."""
        alg = self.algebra
        x = np.asarray(x, dtype=float)
        hf = float(self.h)
        y = np.zeros(alg.dim)
        out = []
        for j, (lo, hi) in enumerate(alg.layer_slices, start=1):
            z = alg.multiply_float(-y, x)
            k = np.round(z[lo:hi] / hf ** j).astype(int)
            out.extend(int(v) for v in k)
            y[lo:hi] = k * hf ** j
        return tuple(out)

    def lookup(self, int_tuple):
        return self.index.get(tuple(int_tuple))

    def nearest_index(self, x, cfg=None):
        """Exact nearest lattice point (brute force), with distance."""
        d = dist_infty(self.algebra, self.points, np.asarray(x, dtype=float), cfg)
        i = int(np.argmin(d))
        return i, float(d[i])


def _layer_tuples(m, bound):
    """All integer m-tuples with sum of squares <= bound (a Fraction),
    in lexicographic order."""
    kmax = math.isqrt(math.floor(bound))
    while Fraction((kmax + 1) ** 2) <= bound:
        kmax += 1
    out = []

    def rec(prefix, remaining):
        depth = len(prefix)
        if depth == m:
            out.append(tuple(prefix))
            return
        for k in range(-kmax, kmax + 1):
            nxt = remaining - k * k
            if nxt < 0:
                continue
            prefix.append(k)
            rec(prefix, nxt)
            prefix.pop()

    rec([], bound)
    return out


def build_lattice(algebra, R, h, center=None, cap=2_000_000):
    """Graded grid covering the exact ball B(identity, R).

    Raises ValueError when the box estimate of the point count exceeds
    cap (budget guard before any enumeration)."""
    R = _as_fraction(R)
    h = _as_fraction(h)
    if not (0 < h <= R):
        raise ValueError("need 0 < h <= R")
    estimate = 1
    ratio = R / h
    for j, m in enumerate(algebra.layer_dims, start=1):
        K = math.floor(ratio ** j)
        estimate *= (2 * K + 1) ** m
    if estimate > cap:
        raise ValueError(
            f"lattice budget exceeded: box estimate {estimate} > cap {cap}"
        )
    per_layer = []
    for j, m in enumerate(algebra.layer_dims, start=1):
        per_layer.append(_layer_tuples(m, ratio ** (2 * j)))
    int_tuples = [
        tuple(itertools.chain.from_iterable(parts))
        for parts in itertools.product(*per_layer)
    ]
    if len(int_tuples) > cap:
        raise ValueError(f"lattice budget exceeded: {len(int_tuples)} > cap {cap}")
    hf = float(h)
    spacing = np.array([hf ** j for j in algebra.layer_of])
    points = np.array(int_tuples, dtype=float) * spacing
    center_exact = None
    if center is not None:
        center_exact = algebra.coerce_vector(center)
        cf = np.array([float(x) for x in center_exact])
        points = algebra.multiply_float(cf, points)
    return GradedLattice(algebra, R, h, int_tuples, points, center=center_exact)


def covering_radius(lattice, n_samples, rng, cfg=None):
    """Max over sampled ball points of the distance to the lattice."""
    from .norms import sample_ball

    alg = lattice.algebra
    X = sample_ball(alg, float(lattice.R), n_samples, rng, cfg)
    if lattice.center is not None:
        cf = np.array([float(x) for x in lattice.center])
        X = alg.multiply_float(cf, X)
    worst = 0.0
    for x in X:
        _, d = lattice.nearest_index(x, cfg)
        worst = max(worst, d)
    return worst


def snap_distance_bound(algebra):
    """max_j (sqrt(m_j)/2)^(1/j): interior snap error is below this times h."""
    return max(
        (math.sqrt(m) / 2.0) ** (1.0 / j)
        for j, m in enumerate(algebra.layer_dims, start=1)
    )
