"""Exact scalar arithmetic for structure constants.

Rational numbers are plain fractions.Fraction.  QSqrt2 adjoins sqrt(2),
which is the only irrationality the bundled presets need.  Elements are
kept in the canonical form a + b*sqrt(2) with rational a, b, so equality,
sign and floor are all decidable exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction

Rational = Fraction


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


class QSqrt2:
    """Element a + b*sqrt(2) of the quadratic field Q(sqrt(2))."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = _as_fraction(a)
        self.b = _as_fraction(b)

    # -- constructors -------------------------------------------------

    @staticmethod
    def sqrt2():
        return QSqrt2(0, 1)

    @staticmethod
    def coerce(x):
        if isinstance(x, QSqrt2):
            return x
        return QSqrt2(_as_fraction(x), 0)

    # -- predicates ----------------------------------------------------

    def is_rational(self):
        # sqrt(2) is irrational, so the representation is unique.
        return self.b == 0

    def is_zero(self):
        return self.a == 0 and self.b == 0

    # -- ring ops -------------------------------------------------------

    def __add__(self, other):
        other = QSqrt2.coerce(other)
        return QSqrt2(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt2(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-QSqrt2.coerce(other))

    def __rsub__(self, other):
        return QSqrt2.coerce(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        other = QSqrt2.coerce(other)
        return QSqrt2(
            self.a * other.a + 2 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def inverse(self):
        # (a + b s)^-1 = (a - b s) / (a^2 - 2 b^2); the norm vanishes only at 0.
        n = self.a * self.a - 2 * self.b * self.b
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(2))")
        return QSqrt2(self.a / n, -self.b / n)

    def __truediv__(self, other):
        return self * QSqrt2.coerce(other).inverse()

    def __rtruediv__(self, other):
        return QSqrt2.coerce(other) * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        out = QSqrt2(1, 0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- order ---------------------------------------------------------

    def sign(self):
        """Exact sign of a + b*sqrt(2)."""
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # Opposite signs: compare a^2 with 2 b^2; the sign of a + b*sqrt(2)
        # matches the sign of a exactly when |a| > |b|*sqrt(2).
        d = a * a - 2 * b * b
        if d == 0:
            return 0  # unreachable for b != 0, kept for symmetry
        return (a > 0) - (a < 0) if d > 0 else (b > 0) - (b < 0)

    def __eq__(self, other):
        try:
            other = QSqrt2.coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    def __floor__(self):
        """Exact floor via integer square roots."""
        a, b = self.a, self.b
        # a + b*sqrt(2) = (p + sign(b)*isqrt-part)/q over a common denominator.
        q = a.denominator * b.denominator
        p = a.numerator * b.denominator
        r = b.numerator * a.denominator  # value = (p + r*sqrt(2))/q
        d = 2 * r * r
        s = math.isqrt(d)
        # s <= sqrt(d) < s+1
        if r >= 0:
            num = p + s
            lo = num // q
            # Correct for the fractional part of sqrt(d).
            while QSqrt2(Fraction(lo + 1), 0) <= self:
                lo += 1
            while QSqrt2(Fraction(lo), 0) > self:
                lo -= 1
            return lo
        num = p - (s + 1)
        lo = num // q
        while QSqrt2(Fraction(lo + 1), 0) <= self:
            lo += 1
        while QSqrt2(Fraction(lo), 0) > self:
            lo -= 1
        return lo

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(2.0)

    def __repr__(self):
        if self.b == 0:
            return f"QSqrt2({self.a})"
        return f"QSqrt2({self.a} + {self.b}*sqrt2)"


def exact_scalar(x):
    """Coerce ints/Fractions, pass QSqrt2 through."""
    if isinstance(x, QSqrt2):
        return x
    return _as_fraction(x)


def scalar_is_zero(x):
    if isinstance(x, QSqrt2):
        return x.is_zero()
    return x == 0


def scalar_to_float(x):
    return float(x)
