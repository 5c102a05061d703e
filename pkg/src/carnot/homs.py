"""Graded group homomorphisms generated from a first-layer block.

A homomorphism between Carnot groups is determined by its first-layer
linear block: higher blocks are solved from bracket images, and the
result is audited for bracket compatibility on every basis pair. In
exponential coordinates the group map is the blockwise linear map.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import exactlin
from .algebra import _coerce_exact
from .scalars import scalar_is_zero


class Homomorphism:
    """Blockwise linear map; blocks[j-1] sends layer j of the domain to
    layer j of the codomain (a 0-row matrix when the codomain is shallower)."""

    def __init__(self, domain, codomain, blocks):
        self.domain = domain
        self.codomain = codomain
        self.blocks = blocks
        self._float_matrix = None

    def block_shape(self, j):
        rows = self.codomain.layer_dims[j - 1] if j <= self.codomain.step else 0
        return rows, self.domain.layer_dims[j - 1]

    def float_matrix(self):
        """Dense codomain_dim x domain_dim float matrix."""
        if self._float_matrix is None:
            M = np.zeros((self.codomain.dim, self.domain.dim))
            for j, block in enumerate(self.blocks, start=1):
                if j > self.codomain.step:
                    break
                r0, r1 = self.codomain.layer_slices[j - 1]
                c0, c1 = self.domain.layer_slices[j - 1]
                M[r0:r1, c0:c1] = [[float(x) for x in row] for row in block]
            self._float_matrix = M
        return self._float_matrix

    def __repr__(self):
        return f"<Homomorphism {self.domain!r} -> {self.codomain!r}>"


def _layer_coords(algebra, sparse_vec, j):
    lo, hi = algebra.layer_slices[j - 1]
    return [sparse_vec.get(c, Fraction(0)) for c in range(lo, hi)]


def hom_from_first_layer(A1, domain, codomain):
    """Build the homomorphism with first-layer block A1, deriving higher
    blocks from bracket images. Raises ValueError when the bracket
    relations of the domain are not respected by the induced images."""
    m1 = domain.layer_dims[0]
    m1_cod = codomain.layer_dims[0]
    A1 = [[_coerce_exact(x) for x in row] for row in A1]
    if len(A1) != m1_cod or any(len(row) != m1 for row in A1):
        raise ValueError(f"first-layer block must be {m1_cod} x {m1}")
    blocks = [A1]
    # image of each basis vector as a sparse codomain coordinate dict
    images = {}
    for i in range(m1):
        images[i] = {
            r: A1[r][i] for r in range(m1_cod) if not scalar_is_zero(A1[r][i])
        }
    for j in range(1, domain.step):
        # derive the layer j+1 block from [V_1, V_j] spanning relations
        tgt = j + 1
        m_tgt = domain.layer_dims[tgt - 1]
        a_lo, a_hi = domain.layer_slices[0]
        b_lo, b_hi = domain.layer_slices[j - 1]
        if tgt <= codomain.step:
            rows_dom = []
            rows_cod = []
            for a in range(a_lo, a_hi):
                for b in range(b_lo, b_hi):
                    vec = domain._full_table.get((a, b))
                    if not vec:
                        continue
                    rows_dom.append(_layer_coords(domain, vec, tgt))
                    img = codomain.bracket_sparse(images[a], images[b])
                    rows_cod.append(_layer_coords(codomain, img, tgt))
            try:
                Xt = exactlin.solve_matrix(rows_dom, rows_cod)
            except ValueError as exc:
                raise ValueError(
                    f"bracket relations not respected at layer {tgt}: {exc}"
                ) from exc
            block = [list(col) for col in zip(*Xt)]
        else:
            # past the codomain step: brackets there vanish, so the layer
            # is killed (zero map into the zero space)
            block = []
        blocks.append(block)
        lo, hi = domain.layer_slices[tgt - 1]
        for i in range(m_tgt):
            col = lo + i
            if tgt <= codomain.step:
                r0, _ = codomain.layer_slices[tgt - 1]
                images[col] = {
                    r0 + r: block[r][i]
                    for r in range(len(block))
                    if not scalar_is_zero(block[r][i])
                }
            else:
                images[col] = {}
    hom = Homomorphism(domain, codomain, blocks)
    _audit_bracket_compatibility(hom, images)
    return hom


def _audit_bracket_compatibility(hom, images=None):
    """Check A([u,v]) = [A u, A v] on all domain basis pairs."""
    dom, cod = hom.domain, hom.codomain
    if images is None:
        images = {}
        for col in range(dom.dim):
            j = dom.layer_of[col]
            images[col] = {}
            if j <= cod.step:
                r0, _ = cod.layer_slices[j - 1]
                block = hom.blocks[j - 1]
                c0, _ = dom.layer_slices[j - 1]
                for r in range(len(block)):
                    x = block[r][col - c0]
                    if not scalar_is_zero(x):
                        images[col][r0 + r] = x
    for a in range(dom.dim):
        for b in range(a + 1, dom.dim):
            lhs_dom = dom._full_table.get((a, b), {})
            lhs = {}
            for c, k in lhs_dom.items():
                for r, x in images[c].items():
                    val = lhs.get(r, Fraction(0)) + k * x
                    lhs[r] = val
            rhs = cod.bracket_sparse(images[a], images[b])
            diff = dict(lhs)
            for r, x in rhs.items():
                diff[r] = diff.get(r, Fraction(0)) - x
            if any(not scalar_is_zero(x) for x in diff.values()):
                raise ValueError(
                    "bracket relations not respected: compatibility fails on "
                    f"basis pair ({a},{b})"
                )


def apply_hom(hom, g):
    """Apply the blockwise linear map; float arrays or exact vectors."""
    if isinstance(g, np.ndarray):
        return np.asarray(g, dtype=float) @ hom.float_matrix().T
    g = hom.domain.coerce_vector(g)
    out = [Fraction(0)] * hom.codomain.dim
    for j, block in enumerate(hom.blocks, start=1):
        if j > hom.codomain.step:
            break
        r0, _ = hom.codomain.layer_slices[j - 1]
        c0, c1 = hom.domain.layer_slices[j - 1]
        seg = g[c0:c1]
        for r, row in enumerate(block):
            out[r0 + r] = sum((row[i] * seg[i] for i in range(len(seg))), Fraction(0))
    return tuple(out)


def collapse_witness(hom, eps, cfg=None):
    """Smallest layer whose block shrinks some unit vector below eps in
    the codomain norm; returns (layer, unit_vector, norm_value) or None.

    When None is returned (all-ones weights), N(L(g)) >= eps * N(g) for
    every g, since each layer block has minimal singular value >= eps^j.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    lams = cfg.lambdas if cfg is not None else (1.0,) * hom.codomain.step
    for j in range(1, hom.domain.step + 1):
        m_dom = hom.domain.layer_dims[j - 1]
        if j > hom.codomain.step:
            v = np.zeros(m_dom)
            v[0] = 1.0
            return j, v, 0.0
        block = np.array(
            [[float(x) for x in row] for row in hom.blocks[j - 1]], dtype=float
        ).reshape(hom.codomain.layer_dims[j - 1], m_dom)
        if block.shape[0] == 0:
            v = np.zeros(m_dom)
            v[0] = 1.0
            return j, v, 0.0
        rows, cols = block.shape
        _, sing, Vt = np.linalg.svd(block)
        # min over unit v of |Av|; a wide block always has a kernel, and
        # Vt's trailing rows span it
        smin = float(sing[-1]) if rows >= cols else 0.0
        v = Vt[-1]
        value = lams[j - 1] * smin ** (1.0 / j)
        if value < eps:
            return j, v, float(value)
    return None


def jacobian_degeneracy(hom):
    """0.0 when some block is column-rank deficient; otherwise the volume
    scaling factor prod_j sqrt(det(A_j^T A_j)) (|det A_j| for square blocks)."""
    total = 1.0
    for j in range(1, hom.domain.step + 1):
        m_dom = hom.domain.layer_dims[j - 1]
        if j > hom.codomain.step:
            return 0.0
        block = hom.blocks[j - 1]
        if len(block) == 0 or exactlin.rank(block) < m_dom:
            return 0.0
        gram = exactlin.matmul(
            [list(col) for col in zip(*block)], [list(row) for row in block]
        )
        d = exactlin.det(gram)
        total *= float(d) ** 0.5
    return total


def one_lipschitz_rescale(hom):
    """Rescale so d(L g, L h) <= d(g, h) holds exactly (all-ones weights).

    Uses the exact certificate sigma_max(A)^2 <= |A|_1 |A|_inf per layer:
    finds a rational C with C^(2j) >= |A_j|_1 |A_j|_inf for all j, then
    rebuilds the homomorphism from A_1 / C. Returns (hom, C as float).
    """
    bounds = []
    for j, block in enumerate(hom.blocks, start=1):
        if j > hom.codomain.step or not block or not block[0]:
            continue
        rows = len(block)
        cols = len(block[0])
        norm1 = max(
            sum((abs(block[r][c]) for r in range(rows)), Fraction(0))
            for c in range(cols)
        )
        norminf = max(
            sum((abs(block[r][c]) for c in range(cols)), Fraction(0))
            for r in range(rows)
        )
        bounds.append((j, norm1 * norminf))
    if not bounds or all(b <= 1 for _, b in bounds):
        return hom, 1.0

    def ok(C):
        return all(C ** (2 * j) >= b for j, b in bounds)

    seed = max(float(b) ** (1.0 / (2 * j)) for j, b in bounds)
    C = Fraction(int(np.ceil(seed * 2 ** 20)), 2 ** 20)
    while not ok(C):
        C = C * Fraction(1025, 1024)
    A1 = [[x / C for x in row] for row in hom.blocks[0]]
    return hom_from_first_layer(A1, hom.domain, hom.codomain), float(C)
