"""Homogeneous norms, the induced quasi-metric, and empirical audits.

N(g) = max_k lambda_k |g_k|^(1/k) over the layers; d(g, h) = N(g^{-1} h).
The all-ones weights make this a genuine metric on some groups and only
a quasi-metric on others, so the triangle defect is measured, never
assumed: validate_triangle records the worst ratio as quasi_constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .scalars import QSqrt2


@dataclass
class NormConfig:
    lambdas: tuple
    quasi_constant: float = 1.0

    def __post_init__(self):
        self.lambdas = tuple(float(x) for x in self.lambdas)
        if any(x <= 0 for x in self.lambdas):
            raise ValueError("all norm weights must be positive")


def default_norm_config(algebra):
    return NormConfig(lambdas=(1.0,) * algebra.step)


def norm_infty(algebra, g, cfg=None):
    """Homogeneous norm of float coordinates, vectorized over leading axes."""
    G = np.asarray(g, dtype=float)
    lams = cfg.lambdas if cfg is not None else (1.0,) * algebra.step
    vals = []
    for j, (lo, hi) in enumerate(algebra.layer_slices, start=1):
        r = np.sqrt(np.sum(G[..., lo:hi] ** 2, axis=-1))
        vals.append(lams[j - 1] * r ** (1.0 / j))
    return np.maximum.reduce(vals)


def dist_infty(algebra, g, h, cfg=None):
    """Left-invariant quasi-metric d(g, h) = N(g^{-1} h), vectorized."""
    G = np.asarray(g, dtype=float)
    H = np.asarray(h, dtype=float)
    return norm_infty(algebra, algebra.multiply_float(-G, H), cfg)


def norm_le(algebra, g, bound, lambdas=None):
    """Exact test N(g) <= bound for exact coordinates and rational data."""
    g = algebra.coerce_vector(g)
    bound = bound if isinstance(bound, (Fraction, QSqrt2)) else Fraction(bound)
    for j, (lo, hi) in enumerate(algebra.layer_slices, start=1):
        lam = Fraction(1) if lambdas is None else lambdas[j - 1]
        s = sum((x * x for x in g[lo:hi]), Fraction(0))
        # lambda_j |g_j|^(1/j) <= bound  <=>  |g_j|^2 <= (bound/lambda_j)^(2j)
        if s > (bound / lam) ** (2 * j):
            return False
    return True


def sample_ball(algebra, radius, count, rng, cfg=None, center=None):
    """Uniform rejection sample of count points with N <= radius (float)."""
    lams = cfg.lambdas if cfg is not None else (1.0,) * algebra.step
    spans = np.array(
        [(radius / lams[j - 1]) ** j for j in algebra.layer_of], dtype=float
    )
    out = []
    need = count
    while need > 0:
        batch = max(64, 2 * need)
        pts = rng.uniform(-1.0, 1.0, size=(batch, algebra.dim)) * spans
        keep = pts[norm_infty(algebra, pts, cfg) <= radius]
        out.append(keep[:need])
        need -= len(keep[:need])
    pts = np.concatenate(out, axis=0)
    if center is not None:
        pts = algebra.multiply_float(np.asarray(center, dtype=float), pts)
    return pts


def validate_triangle(algebra, cfg, sample_count, rng, radius=1.0):
    """Worst sampled ratio d(x,z) / (d(x,y) + d(y,z)); updates cfg.

    One degenerate triple y = x is always included so the result is >= 1.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    X = sample_ball(algebra, radius, sample_count, rng, cfg)
    Y = sample_ball(algebra, radius, sample_count, rng, cfg)
    Z = sample_ball(algebra, radius, sample_count, rng, cfg)
    worst = 0.0
    dxz = dist_infty(algebra, X, Z, cfg)
    dxy = dist_infty(algebra, X, Y, cfg)
    dyz = dist_infty(algebra, Y, Z, cfg)
    denom = dxy + dyz
    ok = denom > 0
    if np.any(ok):
        worst = float(np.max(dxz[ok] / denom[ok]))
    # degenerate triple y = x with z distinct
    x = X[0]
    z = Z[np.argmax(dist_infty(algebra, X[0], Z, cfg))]
    d = float(dist_infty(algebra, x, z, cfg))
    if d > 0:
        worst = max(worst, d / (0.0 + d))
    cfg.quasi_constant = max(1.0, worst)
    return cfg.quasi_constant


def right_translation_distortion(algebra, eps, sample_count, rng, cfg=None):
    """Measured C2 with max_i |(g h)_i - g_i| <= C2 * eps over samples
    with N(g) <= 1 and N(h) <= eps."""
    G = sample_ball(algebra, 1.0, sample_count, rng, cfg)
    H = sample_ball(algebra, eps, sample_count, rng, cfg)
    P = algebra.multiply_float(G, H)
    return float(np.max(np.abs(P - G))) / eps
