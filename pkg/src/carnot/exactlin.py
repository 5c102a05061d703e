"""Exact Gaussian elimination over the scalar rings used by the library.

Entries are Fraction or QSqrt2; all pivoting is by first nonzero entry,
which is safe because arithmetic is exact.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import scalar_is_zero


def _clone(matrix):
    return [list(row) for row in matrix]


def rref(matrix):
    """Reduced row echelon form. Returns (rows, pivot_columns)."""
    rows = _clone(matrix)
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if not scalar_is_zero(rows[i][c]):
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][c] if isinstance(rows[r][c], Fraction) else rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not scalar_is_zero(rows[i][c]):
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(matrix):
    if not matrix:
        return 0
    _, pivots = rref(matrix)
    return len(pivots)


def solve_matrix(A, B):
    """Solve A X = B exactly for the unique X; A must have full column rank.

    A is m x n, B is m x k. Raises ValueError when the system is
    inconsistent or underdetermined.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    k = len(B[0]) if B else 0
    if len(B) != m:
        raise ValueError("A and B row counts differ")
    aug = [list(A[i]) + list(B[i]) for i in range(m)]
    rows, pivots = rref(aug)
    lead = [p for p in pivots if p < n]
    if len(lead) < n:
        raise ValueError("underdetermined system (rank deficiency)")
    if any(p >= n for p in pivots):
        raise ValueError("inconsistent system")
    X = [[Fraction(0)] * k for _ in range(n)]
    for i, c in enumerate(lead):
        X[c] = rows[i][n:]
    return X


def det(matrix):
    """Exact determinant of a square matrix by fraction-free elimination."""
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix is not square")
    rows = _clone(matrix)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        pivot = None
        for i in range(c, n):
            if not scalar_is_zero(rows[i][c]):
                pivot = i
                break
        if pivot is None:
            return Fraction(0) * result
        if pivot != c:
            rows[c], rows[pivot] = rows[pivot], rows[c]
            sign = -sign
        p = rows[c][c]
        result = result * p
        inv = 1 / p if isinstance(p, Fraction) else p.inverse()
        for i in range(c + 1, n):
            if not scalar_is_zero(rows[i][c]):
                f = rows[i][c] * inv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return result * sign


def matmul(A, B):
    """Exact matrix product."""
    if not A or not B:
        return []
    n = len(B)
    k = len(B[0])
    out = []
    for row in A:
        if len(row) != n:
            raise ValueError("inner dimensions differ")
        out.append([sum((row[j] * B[j][c] for j in range(n)), Fraction(0)) for c in range(k)])
    return out
