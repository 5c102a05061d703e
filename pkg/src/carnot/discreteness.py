"""Exact-arithmetic lab for the step-6 two-generator example.

The defining relations [X,Y] = Z_2, [X,Z_i] = t_{i+1} Z_{i+1},
[Y,Z_i] = Z_{i+1} leave the brackets [Z_i, Z_j] unspecified. We complete
them by solving the Jacobi constraints exactly: the only slots allowed
by grading are [Z_2,Z_3] -> V_5 and [Z_2,Z_4] -> V_6, and the system is
solvable only on a thin parameter set (the triple (X,Y,Z_2) already
forces t_3 = t_4 with no unknowns involved; the remaining constraints
force all four parameters equal and both unknowns zero). Inconsistent
parameters raise, which is the honest reading of the relations.

The rationality obstruction and the density probe are value-level exact
computations in the field adjoining sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import StratifiedAlgebra, _coerce_exact
from .scalars import QSqrt2, scalar_is_zero

# basis layout: 0 = X, 1 = Y, 2..6 = Z_2..Z_6 (basis index = layer for Z's)
_LAYER_DIMS = (2, 1, 1, 1, 1, 1)
_UNKNOWN_SLOTS = (((2, 3), 5), ((2, 4), 6))  # bracket pair -> target basis


@dataclass
class ExampleParams:
    t3: object
    t4: object
    t5: object
    t6: object
    s: tuple = (1, 1, 1, 1)  # s_2..s_5 for the central test elements
    gens: tuple = (1, 0, 0, 1)  # (a, b, c, d) with ad - bc = 1

    def __post_init__(self):
        self.t3 = _coerce_exact(self.t3)
        self.t4 = _coerce_exact(self.t4)
        self.t5 = _coerce_exact(self.t5)
        self.t6 = _coerce_exact(self.t6)
        self.s = tuple(_coerce_exact(x) for x in self.s)
        self.gens = tuple(_coerce_exact(x) for x in self.gens)
        a, b, c, d = self.gens
        if a * d - b * c != 1:
            raise ValueError("generator parameters must satisfy ad - bc = 1")

    @property
    def t(self):
        return {3: self.t3, 4: self.t4, 5: self.t5, 6: self.t6}


class _Lin:
    """Affine expression const + sum coeff_i * unknown_i over the field."""

    __slots__ = ("const", "coeffs")

    def __init__(self, const=0, coeffs=None):
        self.const = _coerce_exact(const)
        self.coeffs = dict(coeffs or {})

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return _Lin(self.const + other.const, out)

    def scale(self, k):
        return _Lin(k * self.const, {i: k * v for i, v in self.coeffs.items()})

    def times(self, other):
        if self.coeffs and other.coeffs:
            raise ArithmeticError("nonlinear term in Jacobi assembly")
        if other.coeffs:
            return other.scale(self.const)
        return self.scale(other.const)

    def is_zero(self):
        return scalar_is_zero(self.const) and all(
            scalar_is_zero(v) for v in self.coeffs.values()
        )


def _known_brackets(params):
    t = params.t
    table = {(0, 1): {2: Fraction(1)}}
    for i in range(2, 6):
        table[(0, i)] = {i + 1: t[i + 1]}
        table[(1, i)] = {i + 1: Fraction(1)}
    return table


def build_example_algebra(params):
    """Complete the bracket table by solving the Jacobi constraints.

    Returns the audited StratifiedAlgebra; raises ValueError when the
    constraints are inconsistent for the given parameters.
    """
    known = _known_brackets(params)
    sym = {}
    for (a, b), vec in known.items():
        sym[(a, b)] = {c: _Lin(k) for c, k in vec.items()}
        sym[(b, a)] = {c: _Lin(-k) for c, k in vec.items()}
    for idx, (pair, target) in enumerate(_UNKNOWN_SLOTS):
        a, b = pair
        sym[(a, b)] = {target: _Lin(0, {idx: Fraction(1)})}
        sym[(b, a)] = {target: _Lin(0, {idx: Fraction(-1)})}

    dim = sum(_LAYER_DIMS)
    equations = []
    for a in range(dim):
        for b in range(a + 1, dim):
            for c in range(b + 1, dim):
                acc = {}
                for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                    inner = sym.get((y, z))
                    if not inner:
                        continue
                    for m, k_inner in inner.items():
                        outer = sym.get((x, m))
                        if not outer:
                            continue
                        for n, k_outer in outer.items():
                            term = k_inner.times(k_outer)
                            acc[n] = acc.get(n, _Lin(0)) + term
                for expr in acc.values():
                    if not expr.is_zero():
                        equations.append(expr)

    n_unknown = len(_UNKNOWN_SLOTS)
    # solve the affine system expr = 0 by exact elimination
    rows = []
    for expr in equations:
        row = [expr.coeffs.get(i, Fraction(0)) for i in range(n_unknown)]
        row.append(-expr.const)
        rows.append(row)
    solution = _solve_affine(rows, n_unknown)
    if solution is None:
        raise ValueError(
            "Jacobi constraints are inconsistent for parameters "
            f"t3={params.t3}, t4={params.t4}, t5={params.t5}, t6={params.t6}; "
            "the relations force all four parameters to be equal"
        )

    brackets = dict(known)
    for idx, (pair, target) in enumerate(_UNKNOWN_SLOTS):
        if not scalar_is_zero(solution[idx]):
            brackets[pair] = {target: solution[idx]}
    exact_field = (
        "rational-adjoin-sqrt2"
        if any(isinstance(v, QSqrt2) for v in params.t.values())
        else "rational"
    )
    return StratifiedAlgebra(
        layer_dims=_LAYER_DIMS,
        brackets=brackets,
        scalar_field=exact_field,
        name="example6",
    )


def _solve_affine(rows, n_unknown):
    """Solve a stack of affine rows [c_0..c_{k-1} | rhs]; None if inconsistent.

    Underdetermined unknowns are set to zero (they do not occur in any
    equation, so any value satisfies the system; zero keeps the table
    minimal)."""
    from . import exactlin

    reduced, pivots = exactlin.rref(rows)
    solution = [Fraction(0)] * n_unknown
    for r, p in enumerate(pivots):
        if p == n_unknown:  # row reads 0 = nonzero
            return None
        solution[p] = reduced[r][n_unknown]
    # rows below the pivot rows are all zero by rref; consistent
    return solution


# ---------------------------------------------------------------------------
# commutator coordinate identity
# ---------------------------------------------------------------------------


def commutator_leading_term(algebra, a, b, i, s_i):
    """Exact check that g u g^-1 u^-1 with g = exp(aX + bY), u = exp(s_i Z_i)
    equals exp((a t_{i+1} + b) s_i Z_{i+1} + remainder in layers >= i+2).

    Returns a report dict; raises AssertionError if the identity fails.
    """
    if not 2 <= i <= 5:
        raise ValueError("i must be in 2..5")
    a = _coerce_exact(a)
    b = _coerce_exact(b)
    s_i = _coerce_exact(s_i)
    t_next = algebra._full_table.get((0, i), {}).get(i + 1, Fraction(0))
    g = [Fraction(0)] * algebra.dim
    g[0], g[1] = a, b
    u = [Fraction(0)] * algebra.dim
    u[i] = s_i
    g = tuple(g)
    u = tuple(u)
    comm = algebra.multiply_exact(
        algebra.multiply_exact(algebra.multiply_exact(g, u), algebra.invert(g)),
        algebra.invert(u),
    )
    expected = (a * t_next + b) * s_i
    got = comm[i + 1]
    assert got == expected, (
        f"leading commutator coordinate at Z_{i + 1}: got {got}, expected {expected}"
    )
    for c in range(i + 1):
        assert scalar_is_zero(comm[c]), (
            f"commutator has an unexpected layer-{algebra.layer_of[c]} component"
        )
    remainder = {c: comm[c] for c in range(i + 2, algebra.dim) if not scalar_is_zero(comm[c])}
    return {
        "i": i,
        "leading_coordinate": got,
        "expected": expected,
        "remainder": remainder,
        "remainder_layers": sorted({algebra.layer_of[c] for c in remainder}),
    }


# ---------------------------------------------------------------------------
# rationality obstruction and density probe
# ---------------------------------------------------------------------------


def _as_field(x):
    x = _coerce_exact(x)
    return x if isinstance(x, QSqrt2) else QSqrt2(x, 0)


def mobius_rationality(a, b, c, d, t):
    """Decide whether (a t + b) / (c t + d) is rational, exactly.

    Requires ad - bc = 1; a vanishing denominator is reported as a pole.
    """
    a, b, c, d = (_coerce_exact(x) for x in (a, b, c, d))
    if a * d - b * c != 1:
        raise ValueError("coefficients must satisfy ad - bc = 1")
    t = _as_field(t)
    den = _as_field(c) * t + _as_field(d)
    if den.is_zero():
        return {"kind": "pole", "value": None}
    num = _as_field(a) * t + _as_field(b)
    value = num / den
    if value.is_rational():
        return {"kind": "rational", "value": value.a}
    return {"kind": "irrational", "value": value, "sqrt2_part": value.b}


def _continued_fraction_pair(alpha, beta, eps, q_cap):
    """Best (p, q) with |p alpha + q beta| < eps via convergents of alpha/beta."""
    x = alpha / beta
    h_prev, h = 1, math.floor(x)
    k_prev, k = 0, 1
    frac = x - h
    best = None
    for _ in range(10_000):
        p, q = k, -h
        value = alpha * p + beta * q
        av = abs(value)
        if best is None or av < best[2]:
            best = (p, q, av)
        if av < eps:
            break
        if frac.is_zero() or k > q_cap:
            break
        x = frac.inverse()
        a = math.floor(x)
        frac = x - a
        h, h_prev = a * h + h_prev, h
        k, k_prev = a * k + k_prev, k
    p, q, av = best
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return p, q, av


def density_probe(alpha, beta, eps):
    """Find integers (p, q) with |p alpha + q beta| < eps, or report the
    minimal positive element of the lattice {p alpha + q beta} when the
    ratio is rational (discreteness when that gap is >= eps)."""
    alpha = _as_field(alpha)
    beta = _as_field(beta)
    if beta.is_zero():
        raise ValueError("beta must be nonzero")
    eps = Fraction(str(eps)) if not isinstance(eps, (Fraction, int)) else Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if abs(alpha) < eps:
        return {"kind": "pair", "p": 1, "q": 0, "value": alpha, "abs": abs(alpha)}
    ratio = alpha / beta
    if ratio.is_rational():
        m = ratio.a.numerator
        n = ratio.a.denominator
        gap = abs(beta) / n
        if gap < eps:
            # p m + q n = 1 realizes the gap
            g, p, q = _extended_gcd(m, n)
            value = alpha * p + beta * q
            return {"kind": "pair", "p": p, "q": q, "value": value, "abs": abs(value)}
        return {
            "kind": "discrete",
            "gap": gap,
            "message": "lattice gap at least eps; no nonzero element below it",
        }
    p, q, av = _continued_fraction_pair(alpha, beta, eps, q_cap=10 ** 9)
    found = av < eps
    return {
        "kind": "pair" if found else "insufficient",
        "p": p,
        "q": q,
        "value": alpha * p + beta * q,
        "abs": av,
    }


def _extended_gcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_s, s = s, old_s - qt * s
        old_t, t = t, old_t - qt * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def unimodular_draw(rng, max_den=20):
    """Random rational (a, b, c, d) with ad - bc = 1."""
    while True:
        a = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, max_den)))
        if a == 0:
            continue
        b = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, max_den)))
        c = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, max_den)))
        d = (1 + b * c) / a
        return a, b, c, d


def discreteness_certificate(params, draws=1000, seed=0, eps=Fraction(1, 100)):
    """Machine-checked certificate: completed table, per-identity results,
    the rationality obstruction summary, and a density probe."""
    import numpy as np

    from .presets import format_scalar

    algebra = build_example_algebra(params)
    a, b, c, d = params.gens
    commutators = []
    for i in range(2, 6):
        s_i = params.s[i - 2]
        for label, (aa, bb) in (("g", (a, b)), ("h", (c, d))):
            rep = commutator_leading_term(algebra, aa, bb, i, s_i)
            commutators.append(
                {
                    "generator": label,
                    "i": i,
                    "coordinate": format_scalar(rep["leading_coordinate"]),
                    "remainder_layers": rep["remainder_layers"],
                    "passed": True,
                }
            )
    rng = np.random.default_rng(seed)
    t_values = [params.t3, params.t4, params.t5, params.t6]
    all_rational = 0
    fails_at_t6 = 0
    pole_draws = 0
    for _ in range(draws):
        aa, bb, cc, dd = unimodular_draw(rng)
        verdicts = []
        for t in t_values:
            rep = mobius_rationality(aa, bb, cc, dd, t)
            verdicts.append(rep["kind"])
        if "pole" in verdicts:
            pole_draws += 1
            continue
        if all(v == "rational" for v in verdicts):
            all_rational += 1
        if verdicts[3] == "irrational":
            fails_at_t6 += 1
    probe = density_probe(QSqrt2(0, 1), QSqrt2(1, 0), eps)
    table = {
        f"[e{a0},e{b0}]": {
            str(cc): format_scalar(v) for cc, v in vec.items()
        }
        for (a0, b0), vec in sorted(algebra._table.items())
    }
    return {
        "parameters": {
            "t3": format_scalar(params.t3),
            "t4": format_scalar(params.t4),
            "t5": format_scalar(params.t5),
            "t6": format_scalar(params.t6),
        },
        "bracket_table": table,
        "jacobi_audit": "passed",
        "commutator_identities": commutators,
        "obstruction": {
            "draws": draws - pole_draws,
            "pole_draws": pole_draws,
            "all_four_rational": all_rational,
            "irrational_at_t6": fails_at_t6,
        },
        "density_probe": {
            "kind": probe["kind"],
            "p": probe.get("p"),
            "q": probe.get("q"),
            "abs": float(probe["abs"]) if "abs" in probe else None,
            "eps": float(eps),
        },
    }
