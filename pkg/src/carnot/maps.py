"""Lipschitz map samples over a graded lattice, with preset families.

A map sample carries the callable itself (so coarse-differentiation can
evaluate it on exact line points, not just lattice rows), its values on
the lattice, a target metric, and a declared Lipschitz constant that is
verified by sampling (within 1%) at construction time.

The target is either a Carnot group with its quasi-metric, or the
quotient of one by an isometric involution (metric: min over the orbit).
"""

from __future__ import annotations

import numpy as np

from .homs import apply_hom, hom_from_first_layer, one_lipschitz_rescale
from .norms import default_norm_config, dist_infty
from .presets import abelian, algebra_preset, heisenberg, parse_scalar


def _resolve_algebra(spec):
    return algebra_preset(spec) if isinstance(spec, str) else spec


class TargetMetric:
    """Metric on the codomain: plain quasi-metric, or the quotient
    metric by a linear isometric involution sigma."""

    def __init__(self, algebra, cfg=None, sigma=None, name="norm"):
        self.algebra = algebra
        self.cfg = cfg if cfg is not None else default_norm_config(algebra)
        self.sigma = None if sigma is None else np.asarray(sigma, dtype=float)
        self.name = name
        self.nonnegativity_certificate = None

    def dist(self, U, V):
        d = dist_infty(self.algebra, U, V, self.cfg)
        if self.sigma is None:
            return d
        V2 = np.asarray(V, dtype=float) @ self.sigma.T
        d2 = dist_infty(self.algebra, U, V2, self.cfg)
        return np.minimum(d, d2)


class LipschitzMapSample:
    def __init__(self, lattice, fn, target, declared_lipschitz, name, rng=None,
                 check_pairs=2000):
        self.lattice = lattice
        self.fn = fn
        self.target = target
        self.declared_lipschitz = float(declared_lipschitz)
        self.name = name
        self.values = np.asarray(fn(lattice.points), dtype=float)
        if self.values.shape != (lattice.size, target.algebra.dim):
            raise ValueError(
                f"map returned shape {self.values.shape}, expected "
                f"({lattice.size}, {target.algebra.dim})"
            )
        rng = rng if rng is not None else np.random.default_rng(0)
        self.measured_lipschitz = self._measure(rng, check_pairs)
        if self.measured_lipschitz > self.declared_lipschitz * 1.01 + 1e-12:
            raise ValueError(
                f"declared Lipschitz constant {self.declared_lipschitz} "
                f"violated: measured {self.measured_lipschitz}"
            )

    def _measure(self, rng, n_pairs):
        M = self.lattice.size
        if M < 2:
            return 0.0
        xs = rng.integers(0, M, size=n_pairs)
        ys = rng.integers(0, M, size=n_pairs)
        keep = xs != ys
        xs, ys = xs[keep], ys[keep]
        dd = dist_infty(
            self.lattice.algebra,
            self.lattice.points[xs],
            self.lattice.points[ys],
            self.target.cfg if self.target.algebra is self.lattice.algebra else None,
        )
        di = self.target.dist(self.values[xs], self.values[ys])
        ok = dd > 0
        if not np.any(ok):
            return 0.0
        return float(np.max(di[ok] / dd[ok]))

    def __repr__(self):
        return (
            f"<LipschitzMapSample {self.name!r} declared="
            f"{self.declared_lipschitz} measured={self.measured_lipschitz:.4f}>"
        )


def _reflection_matrix(algebra):
    """diag(-1, 1, -1) on Heisenberg: the automorphism X -> -X, Y -> Y
    (hence Z -> -Z), an isometry of every layer-wise norm."""
    if algebra.layer_dims != (2, 1):
        raise ValueError("reflection preset needs the Heisenberg layout (2,1)")
    return np.diag([-1.0, 1.0, -1.0])


def make_fold_fn(sigma):
    sig = np.asarray(sigma, dtype=float)

    def fn(X):
        X = np.asarray(X, dtype=float)
        out = np.array(X, copy=True)
        mask = X[..., 0] < 0
        out[mask] = X[mask] @ sig.T
        return out

    return fn


def map_preset(name, params=None):
    """Factory: returns build(lattice, rng=None) -> LipschitzMapSample.

    Presets: identity, constant, collapse (first-layer line projection),
    hom (params: matrix, codomain), fold (reflection quotient), and
    fold-abelian (literal |x| into the abelian plane)."""
    params = dict(params or {})

    def build(lattice, rng=None):
        alg = lattice.algebra
        if name == "identity":
            target = TargetMetric(alg)
            return LipschitzMapSample(
                lattice, lambda X: np.array(X, copy=True), target, 1.0,
                "identity", rng,
            )
        if name == "constant":
            cod = _resolve_algebra(params.get("codomain", alg))
            target = TargetMetric(cod)

            def fn(X):
                X = np.asarray(X, dtype=float)
                return np.zeros(X.shape[:-1] + (cod.dim,))

            return LipschitzMapSample(lattice, fn, target, 0.0, "constant", rng)
        if name == "hom":
            cod = _resolve_algebra(params["codomain"])
            matrix = [
                [parse_scalar(x) if isinstance(x, str) else x for x in row]
                for row in params["matrix"]
            ]
            hom = hom_from_first_layer(matrix, alg, cod)
            hom, scale = one_lipschitz_rescale(hom)
            target = TargetMetric(cod)

            def fn(X):
                return apply_hom(hom, X)

            sample = LipschitzMapSample(lattice, fn, target, 1.0, "hom", rng)
            sample.hom = hom
            sample.hom_rescale = scale
            return sample
        if name == "collapse":
            from fractions import Fraction

            cod = abelian(1)
            hom = hom_from_first_layer(
                [[Fraction(1), Fraction(0)]], alg, cod
            )
            target = TargetMetric(cod)

            def fn(X):
                return apply_hom(hom, X)

            sample = LipschitzMapSample(lattice, fn, target, 1.0, "collapse", rng)
            sample.hom = hom
            return sample
        if name == "fold":
            sig = _reflection_matrix(alg)
            target = TargetMetric(alg, sigma=sig, name="quotient")
            return LipschitzMapSample(
                lattice, make_fold_fn(sig), target, 1.0, "fold", rng,
            )
        if name == "fold-abelian":
            cod = abelian(2)
            target = TargetMetric(cod)

            def fn(X):
                X = np.asarray(X, dtype=float)
                out = np.empty(X.shape[:-1] + (2,))
                out[..., 0] = np.abs(X[..., 0])
                out[..., 1] = X[..., 1]
                return out

            return LipschitzMapSample(lattice, fn, target, 1.0, "fold-abelian", rng)
        raise ValueError(
            f"unknown map preset {name!r}; available: identity, constant, "
            "collapse, hom, fold, fold-abelian"
        )

    return build


def calibrate_nonnegativity(sample, p, rng, n_triples=2000, gap_scale=0.25):
    """Sampled minimum of the second-difference statistic over random
    horizontal triples; records it on the target metric."""
    alg = sample.lattice.algebra
    M = sample.lattice.size
    m1 = alg.layer_dims[0]
    idx = rng.integers(0, M, size=n_triples)
    X = sample.lattice.points[idx]
    v = rng.normal(size=(n_triples, m1))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    t = gap_scale * (0.1 + rng.random(n_triples))
    mid = alg.horizontal_point(X, v, t[:, None])
    far = alg.horizontal_point(X, v, 2 * t[:, None])
    fx, fm, fy = sample.fn(X), sample.fn(mid), sample.fn(far)
    half = t
    d1 = sample.target.dist(fx, fm) / half
    d2 = sample.target.dist(fm, fy) / half
    d3 = sample.target.dist(fx, fy) / (2 * half)
    partial = 0.5 * (d1 ** p + d2 ** p) - d3 ** p
    cert = float(partial.min())
    sample.target.nonnegativity_certificate = cert
    return cert
