"""Exact dyadic rational arithmetic.

Scalars are integer pairs ``mantissa * 2**exponent`` kept in canonical form
(mantissa odd or zero; zero fixes exponent 0).  All combinatorial interval
work in :mod:`lacuna.lacunary` runs on these scalars; floating point is not
used there at all, so interval identities (tilings, dilations, anchor
arithmetic) are exact set statements rather than approximate ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def _canonical(mantissa: int, exponent: int) -> tuple[int, int]:
    if mantissa == 0:
        return 0, 0
    while mantissa % 2 == 0:
        mantissa //= 2
        exponent += 1
    return mantissa, exponent


@dataclass(frozen=True, order=False)
class DyadicScalar:
    """Exact value ``mantissa * 2**exponent`` with odd-or-zero mantissa."""

    mantissa: int
    exponent: int

    def __post_init__(self) -> None:
        m, e = _canonical(self.mantissa, self.exponent)
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    # -- constructors -------------------------------------------------
    @staticmethod
    def from_int(n: int) -> "DyadicScalar":
        return DyadicScalar(n, 0)

    @staticmethod
    def from_float(x: float) -> "DyadicScalar":
        # binary floats are dyadic rationals, so this is exact
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError("not a finite value")
        num, den = float(x).as_integer_ratio()
        return DyadicScalar(num, -(den.bit_length() - 1))

    @staticmethod
    def from_fraction(q: Fraction) -> "DyadicScalar":
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return DyadicScalar(q.numerator, -(den.bit_length() - 1))

    @staticmethod
    def pow2(k: int) -> "DyadicScalar":
        return DyadicScalar(1, k)

    # -- conversions --------------------------------------------------
    def as_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa * (1 << self.exponent))
        return Fraction(self.mantissa, 1 << (-self.exponent))

    def __float__(self) -> float:
        return self.mantissa * math.ldexp(1.0, self.exponent)

    # -- predicates ----------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    def is_power_of_two(self) -> bool:
        return self.mantissa == 1

    def log2(self) -> int:
        """Exponent k with self == 2**k; requires a (positive) power of two."""
        if self.mantissa != 1:
            raise ValueError(f"{self} is not a power of two")
        return self.exponent

    # -- arithmetic ----------------------------------------------------
    def __neg__(self) -> "DyadicScalar":
        return DyadicScalar(-self.mantissa, self.exponent)

    def __abs__(self) -> "DyadicScalar":
        return DyadicScalar(abs(self.mantissa), self.exponent)

    def _aligned(self, other: "DyadicScalar") -> tuple[int, int, int]:
        e = min(self.exponent, other.exponent)
        return (
            self.mantissa << (self.exponent - e),
            other.mantissa << (other.exponent - e),
            e,
        )

    def __add__(self, other: "DyadicScalar") -> "DyadicScalar":
        a, b, e = self._aligned(other)
        return DyadicScalar(a + b, e)

    def __sub__(self, other: "DyadicScalar") -> "DyadicScalar":
        a, b, e = self._aligned(other)
        return DyadicScalar(a - b, e)

    def __mul__(self, other: "DyadicScalar") -> "DyadicScalar":
        return DyadicScalar(self.mantissa * other.mantissa, self.exponent + other.exponent)

    def scale_pow2(self, k: int) -> "DyadicScalar":
        """Exact multiplication by 2**k."""
        return DyadicScalar(self.mantissa, self.exponent + k)

    # -- ordering -------------------------------------------------------
    def _cmp(self, other: "DyadicScalar") -> int:
        a, b, _ = self._aligned(other)
        return (a > b) - (a < b)

    def __lt__(self, other: "DyadicScalar") -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: "DyadicScalar") -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: "DyadicScalar") -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: "DyadicScalar") -> bool:
        return self._cmp(other) >= 0

    def __repr__(self) -> str:
        return f"Dyadic({self.mantissa}*2^{self.exponent})"


ZERO = DyadicScalar(0, 0)
ONE = DyadicScalar(1, 0)
