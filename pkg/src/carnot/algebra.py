"""Stratified Lie algebras and exact/float Carnot group arithmetic.

A StratifiedAlgebra holds the layer dimensions and an exact structure
constant table. Group elements are exponential coordinates of the first
kind (the identity is 0 and inversion is negation). Multiplication uses
a coordinate polynomial assembled once per algebra from the tabulated
coefficients of the Dynkin expansion of log(exp(u)exp(v)), truncated at
the step. Correctness is anchored by associativity tests, not by
trusting the table.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import exactlin
from .scalars import QSqrt2, scalar_is_zero


# ---------------------------------------------------------------------------
# Tabulated coefficients for log(exp(u)exp(v)) as a bracket polynomial.
#
# Words are tuples over {0, 1} (0 = u, 1 = v). The coefficient of the
# right-nested bracket [w_1,[w_2,[...,w_n]]] is a sum over all ways of
# spelling the word as blocks u^{r_1} v^{s_1} ... u^{r_k} v^{s_k} with
# r_i + s_i >= 1, each block contributing (-1)^(k-1) / (k n prod r_i! s_i!).
# ---------------------------------------------------------------------------


def _block_splits(word, start=0):
    """Yield all block compositions ((r_1, s_1), ...) spelling word[start:]."""
    n = len(word)
    if start == n:
        yield ()
        return
    max_r = 0
    while start + max_r < n and word[start + max_r] == 0:
        max_r += 1
    for r in range(max_r + 1):
        j = start + r
        max_s = 0
        while j + max_s < n and word[j + max_s] == 1:
            max_s += 1
        min_s = 1 if r == 0 else 0
        for s in range(min_s, max_s + 1):
            if r + s == 0:
                continue
            for rest in _block_splits(word, j + s):
                yield ((r, s),) + rest


@lru_cache(maxsize=None)
def bch_word_coefficients(max_len):
    """Nonzero word coefficients for all words of length 2..max_len."""
    coeffs = {}
    for n in range(2, max_len + 1):
        for word in itertools.product((0, 1), repeat=n):
            total = Fraction(0)
            for blocks in _block_splits(word):
                k = len(blocks)
                den = k * n
                for r, s in blocks:
                    den *= math.factorial(r) * math.factorial(s)
                total += Fraction(1 if k % 2 else -1, den)
            if total:
                coeffs[word] = total
    return coeffs


# -- sparse polynomials over the 2n coordinate variables --------------------
# monomial: tuple of (var index, power), sorted by var; polynomial: dict
# monomial -> exact coefficient.


def _mono_mul(m1, m2):
    out = dict(m1)
    for var, p in m2:
        out[var] = out.get(var, 0) + p
    return tuple(sorted(out.items()))


def _poly_mul(p, q):
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            val = out.get(m)
            out[m] = c1 * c2 if val is None else val + c1 * c2
    return out


def _is_exact(x):
    return isinstance(x, (int, Fraction, QSqrt2))


def _coerce_exact(x):
    if isinstance(x, (Fraction, QSqrt2)):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # read floats the way a human wrote them (0.1 means 1/10)
        return Fraction(str(x))
    raise TypeError(f"cannot use {type(x).__name__} as an exact scalar")


class StratifiedAlgebra:
    """A stratified Lie algebra with exact structure constants.

    brackets maps basis pairs (a, b) with a < b to sparse coordinate
    dicts {c: coefficient}; pairs may be given in either order (checked
    for antisymmetric consistency). All invariants (antisymmetry,
    Jacobi, grading, stratification) are audited at construction.
    """

    def __init__(self, layer_dims, brackets, scalar_field="rational", name=""):
        self.layer_dims = tuple(int(m) for m in layer_dims)
        if not self.layer_dims or any(m < 1 for m in self.layer_dims):
            raise ValueError("layer_dims must be positive integers")
        self.step = len(self.layer_dims)
        self.dim = sum(self.layer_dims)
        self.scalar_field = scalar_field
        self.name = name
        layer_of = []
        slices = []
        start = 0
        for j, m in enumerate(self.layer_dims, start=1):
            slices.append((start, start + m))
            layer_of.extend([j] * m)
            start += m
        self.layer_of = tuple(layer_of)
        self.layer_slices = tuple(slices)
        self._table = self._normalize(brackets)
        self._audit()
        self._poly = None
        self._poly_float = None

    # -- construction helpers -------------------------------------------

    def _normalize(self, brackets):
        table = {}
        for (a, b), vec in brackets.items():
            if not (0 <= a < self.dim and 0 <= b < self.dim):
                raise ValueError(f"bracket key ({a},{b}) out of range")
            entries = {c: _coerce_exact(x) for c, x in vec.items() if not scalar_is_zero(_coerce_exact(x))}
            if a == b:
                if entries:
                    raise ValueError(f"[e_{a}, e_{a}] must vanish")
                continue
            key, signed = ((a, b), entries) if a < b else ((b, a), {c: -x for c, x in entries.items()})
            if key in table:
                if table[key] != signed:
                    raise ValueError(f"inconsistent duplicate bracket for pair {key}")
            else:
                table[key] = signed
        # drop empty entries, build the full antisymmetric lookup
        table = {k: v for k, v in table.items() if v}
        full = {}
        for (a, b), vec in table.items():
            full[(a, b)] = dict(vec)
            full[(b, a)] = {c: -x for c, x in vec.items()}
        self._full_table = full
        return table

    def _audit(self):
        self._audit_grading()
        self._audit_jacobi()
        self._audit_stratification()

    def _audit_grading(self):
        for (a, b), vec in self._table.items():
            target = self.layer_of[a] + self.layer_of[b]
            if target > self.step:
                raise ValueError(
                    f"grading violated: [e_{a}, e_{b}] must vanish beyond step {self.step}"
                )
            for c in vec:
                if self.layer_of[c] != target:
                    raise ValueError(
                        f"grading violated: [e_{a}, e_{b}] has a layer-{self.layer_of[c]} "
                        f"component, expected layer {target}"
                    )

    def _audit_jacobi(self):
        for a in range(self.dim):
            for b in range(a + 1, self.dim):
                for c in range(b + 1, self.dim):
                    acc = {}
                    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                        inner = self._full_table.get((y, z))
                        if not inner:
                            continue
                        for m, k in inner.items():
                            outer = self._full_table.get((x, m))
                            if not outer:
                                continue
                            for n, k2 in outer.items():
                                val = acc.get(n, Fraction(0)) + k * k2
                                acc[n] = val
                    bad = {n: v for n, v in acc.items() if not scalar_is_zero(v)}
                    if bad:
                        raise ValueError(
                            f"Jacobi identity fails on basis triple ({a},{b},{c}): residual {bad}"
                        )

    def _audit_stratification(self):
        for j in range(1, self.step):
            lo, hi = self.layer_slices[j]  # layer j+1 block
            width = hi - lo
            rows = []
            a_lo, a_hi = self.layer_slices[0]
            b_lo, b_hi = self.layer_slices[j - 1]
            for a in range(a_lo, a_hi):
                for b in range(b_lo, b_hi):
                    vec = self._full_table.get((a, b))
                    if vec:
                        rows.append([vec.get(c, Fraction(0)) for c in range(lo, hi)])
            got = exactlin.rank(rows) if rows else 0
            if got != width:
                raise ValueError(
                    f"stratification fails: [V_1, V_{j}] spans rank {got} of the "
                    f"{width}-dimensional layer {j + 1}"
                )

    # -- bracket ---------------------------------------------------------

    def bracket_sparse(self, u, v):
        """Bracket of sparse coordinate dicts, returned sparse."""
        out = {}
        for a, ua in u.items():
            if scalar_is_zero(ua):
                continue
            for b, vb in v.items():
                tab = self._full_table.get((a, b))
                if not tab or scalar_is_zero(vb):
                    continue
                w = ua * vb
                for c, k in tab.items():
                    val = out.get(c, Fraction(0)) + w * k
                    out[c] = val
        return {c: x for c, x in out.items() if not scalar_is_zero(x)}

    def bracket(self, u, v):
        """Bilinear bracket of dense coordinate vectors (exact scalars)."""
        u = self.coerce_vector(u)
        v = self.coerce_vector(v)
        su = {i: x for i, x in enumerate(u) if not scalar_is_zero(x)}
        sv = {i: x for i, x in enumerate(v) if not scalar_is_zero(x)}
        out = self.bracket_sparse(su, sv)
        return tuple(out.get(i, Fraction(0)) for i in range(self.dim))

    def coerce_vector(self, u):
        u = tuple(u)
        if len(u) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {len(u)}")
        return tuple(_coerce_exact(x) for x in u)

    # -- group law -------------------------------------------------------

    def bch_polynomial(self):
        """Per-coordinate product polynomial in the 2*dim variables
        (u_0..u_{n-1}, v_0..v_{n-1}); cached."""
        if self._poly is not None:
            return self._poly
        n = self.dim
        one = Fraction(1)
        U = {i: {((i, 1),): one} for i in range(n)}
        V = {i: {((n + i, 1),): one} for i in range(n)}
        acc = [{} for _ in range(n)]
        for i in range(n):
            acc[i][((i, 1),)] = one
            acc[i][((n + i, 1),)] = one
        for word, cw in bch_word_coefficients(self.step).items():
            vecs = [U if letter == 0 else V for letter in word]
            cur = vecs[-1]
            for vec in reversed(vecs[:-1]):
                cur = self._bracket_symbolic(vec, cur)
                if not cur:
                    break
            if not cur:
                continue
            for c, poly in cur.items():
                tgt = acc[c]
                for mono, coeff in poly.items():
                    val = tgt.get(mono, Fraction(0)) + cw * coeff
                    if scalar_is_zero(val):
                        tgt.pop(mono, None)
                    else:
                        tgt[mono] = val
        self._poly = tuple(tuple(sorted(p.items())) for p in acc)
        return self._poly

    def _bracket_symbolic(self, U, V):
        out = {}
        for a, pa in U.items():
            for b, pb in V.items():
                tab = self._full_table.get((a, b))
                if not tab:
                    continue
                prod = _poly_mul(pa, pb)
                for c, k in tab.items():
                    tgt = out.setdefault(c, {})
                    for mono, coeff in prod.items():
                        val = tgt.get(mono, Fraction(0)) + coeff * k
                        if scalar_is_zero(val):
                            tgt.pop(mono, None)
                        else:
                            tgt[mono] = val
        return {c: p for c, p in out.items() if p}

    def _bch_polynomial_float(self):
        if self._poly_float is None:
            self._poly_float = tuple(
                tuple((float(coeff), mono) for mono, coeff in terms)
                for terms in self.bch_polynomial()
            )
        return self._poly_float

    def multiply_exact(self, g, h):
        g = self.coerce_vector(g)
        h = self.coerce_vector(h)
        vals = g + h
        out = []
        for terms in self.bch_polynomial():
            s = Fraction(0)
            for mono, coeff in terms:
                t = coeff
                for var, p in mono:
                    x = vals[var]
                    if scalar_is_zero(x):
                        t = None
                        break
                    t = t * (x if p == 1 else x ** p)
                if t is not None:
                    s = s + t
            out.append(s)
        return tuple(out)

    def multiply_float(self, G, H):
        G = np.asarray(G, dtype=float)
        H = np.asarray(H, dtype=float)
        if G.shape[-1] != self.dim or H.shape[-1] != self.dim:
            raise ValueError(f"expected trailing dimension {self.dim}")
        n = self.dim
        shape = np.broadcast_shapes(G.shape, H.shape)
        out = np.zeros(shape)
        for c, terms in enumerate(self._bch_polynomial_float()):
            target = out[..., c]
            for coeff, mono in terms:
                t = None
                for var, p in mono:
                    col = G[..., var] if var < n else H[..., var - n]
                    f = col if p == 1 else col ** p
                    t = f if t is None else t * f
                target += coeff * t
        return out

    def multiply(self, g, h):
        if isinstance(g, np.ndarray) or isinstance(h, np.ndarray):
            return self.multiply_float(g, h)
        return self.multiply_exact(g, h)

    def invert(self, g):
        if isinstance(g, np.ndarray):
            return -np.asarray(g, dtype=float)
        return tuple(-x for x in self.coerce_vector(g))

    def identity(self):
        return tuple(Fraction(0) for _ in range(self.dim))

    def dilate(self, lam, g):
        if isinstance(g, np.ndarray):
            lam = float(lam)
            if lam <= 0:
                raise ValueError("dilation factor must be positive")
            scale = np.array([lam ** j for j in self.layer_of])
            return np.asarray(g, dtype=float) * scale
        lam = _coerce_exact(lam)
        if (lam if isinstance(lam, QSqrt2) else QSqrt2.coerce(lam)).sign() <= 0:
            raise ValueError("dilation factor must be positive")
        g = self.coerce_vector(g)
        return tuple(x * lam ** j for x, j in zip(g, self.layer_of))

    def layer_blocks(self, g):
        """Split a coordinate vector into its per-layer segments."""
        return tuple(tuple(g[lo:hi]) for lo, hi in self.layer_slices)

    def horizontal_point(self, x, v, t):
        """x . exp(t v) for a first-layer direction v.

        Float path broadcasts: v has trailing length m_1 and t is a
        scalar or broadcasts against v (e.g. shape (k, 1) for a batch
        of parameters along one direction)."""
        m1 = self.layer_dims[0]
        if isinstance(x, np.ndarray) or isinstance(v, np.ndarray):
            v = np.asarray(v, dtype=float)
            if v.shape[-1] != m1:
                raise ValueError(f"direction must have trailing length {m1}")
            lead = np.asarray(v * t, dtype=float)
            step = np.zeros(lead.shape[:-1] + (self.dim,))
            step[..., :m1] = lead
            return self.multiply_float(x, step)
        if len(v) != m1:
            raise ValueError(f"direction must have length {m1}")
        step = [Fraction(0)] * self.dim
        tt = _coerce_exact(t)
        for i, vi in enumerate(v):
            step[i] = _coerce_exact(vi) * tt
        return self.multiply_exact(x, tuple(step))

    def __repr__(self):
        label = self.name or "StratifiedAlgebra"
        return f"<{label} step={self.step} layer_dims={self.layer_dims}>"


def homogeneous_dimension(algebra):
    """Sum of j * dim(V_j); the Hausdorff dimension of the group."""
    return sum(j * m for j, m in enumerate(algebra.layer_dims, start=1))


class GroupPoint:
    """A group element in exponential coordinates over a fixed algebra."""

    __slots__ = ("algebra", "coords")

    def __init__(self, algebra, coords):
        self.algebra = algebra
        self.coords = algebra.coerce_vector(coords)

    def __mul__(self, other):
        if not isinstance(other, GroupPoint):
            return NotImplemented
        if other.algebra is not self.algebra:
            raise ValueError("points live over different algebras")
        return GroupPoint(self.algebra, self.algebra.multiply_exact(self.coords, other.coords))

    def inv(self):
        return GroupPoint(self.algebra, self.algebra.invert(self.coords))

    def dilate(self, lam):
        return GroupPoint(self.algebra, self.algebra.dilate(lam, self.coords))

    def is_identity(self):
        return all(scalar_is_zero(x) for x in self.coords)

    def to_float(self):
        return np.array([float(x) for x in self.coords])

    def __eq__(self, other):
        if not isinstance(other, GroupPoint):
            return NotImplemented
        return self.algebra is other.algebra and self.coords == other.coords

    def __hash__(self):
        return hash((id(self.algebra), self.coords))

    def __repr__(self):
        return f"GroupPoint({list(self.coords)})"
