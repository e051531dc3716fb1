"""
Exact scalar arithmetic: rationals, binomial coefficients and the quadratic extension ℚ[√d]

Every certificate quantity is a `Rational` (an alias of `fractions.Fraction`).
`QuadScalar` is only needed for the 2×2 eigenvector factor of the biased cube and for
slackness values that carry a √(|F||G|) normalisation.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import RadicandMismatchError, RationalFormatError

Rational = Fraction

RationalLike = Union[int, Fraction]

_RATIONAL_PATTERN = re.compile(r'^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$')


def binom(n: int, r: int) -> int:
    """
    Binomial coefficient with the natural-boundary convention

    Args:
        n: Upper index
        r: Lower index

    Returns:
        C(n, r), or 0 when r < 0, r > n or n < 0
    """
    if n < 0 or r < 0 or r > n:
        return 0
    return math.comb(n, r)


def as_rational(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"Expected an int or Fraction, got {type(value).__name__}")


def parse_rational(text: str) -> Fraction:
    """
    Parse a "num/den" string (or a bare integer) into an exact rational

    Decimal notation is rejected: the command line and JSON documents only carry exact values.
    """
    match = _RATIONAL_PATTERN.match(text)
    if not match:
        raise RationalFormatError(f"Not a rational in num/den form: {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise RationalFormatError(f"Zero denominator in {text!r}")
    return Fraction(numerator, denominator)


def format_rational(value: RationalLike) -> str:
    value = as_rational(value)
    return f"{value.numerator}/{value.denominator}"


def rational_sqrt(value: Fraction):
    """Exact square root of a nonnegative rational, or None when it is irrational."""
    if value < 0:
        return None
    num_root = math.isqrt(value.numerator)
    den_root = math.isqrt(value.denominator)
    if num_root * num_root == value.numerator and den_root * den_root == value.denominator:
        return Fraction(num_root, den_root)
    return None


@dataclass(frozen=True)
class QuadScalar:
    """
    An element a + b·√d of ℚ[√d]

    When d is a perfect rational square the √d part is folded into `a`, so the
    representation stays canonical and equality is componentwise.
    """
    a: Fraction
    b: Fraction
    d: Fraction

    def __post_init__(self):
        a, b, d = as_rational(self.a), as_rational(self.b), as_rational(self.d)
        if d <= 0:
            raise ValueError(f"Radicand must be positive, got {d}")
        root = rational_sqrt(d)
        if root is not None and b != 0:
            a, b = a + b * root, Fraction(0)
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'd', d)

    @classmethod
    def rational(cls, value: RationalLike, d: RationalLike) -> 'QuadScalar':
        return cls(as_rational(value), Fraction(0), as_rational(d))

    @classmethod
    def sqrt_of(cls, d: RationalLike) -> 'QuadScalar':
        """The element √d itself."""
        return cls(Fraction(0), Fraction(1), as_rational(d))

    def _coerce(self, other) -> 'QuadScalar':
        if isinstance(other, QuadScalar):
            if other.d != self.d:
                raise RadicandMismatchError(f"Radicands differ: {self.d} vs {other.d}")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadScalar.rational(other, self.d)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadScalar(self.a + other.a, self.b + other.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadScalar(-self.a, -self.b, self.d)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadScalar(self.a - other.a, self.b - other.b, self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return quad_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadScalar(self.a / other, self.b / other, self.d)
        return NotImplemented

    def conjugate(self) -> 'QuadScalar':
        return QuadScalar(self.a, -self.b, self.d)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def sign(self) -> int:
        """Exact sign of a + b√d, decided by comparing squares."""
        if self.b == 0:
            return (self.a > 0) - (self.a < 0)
        if self.a == 0:
            return (self.b > 0) - (self.b < 0)
        # a and b√d are both nonzero
        if (self.a > 0) == (self.b > 0):
            return 1 if self.a > 0 else -1
        # opposite signs: the larger magnitude wins
        diff = self.a * self.a - self.b * self.b * self.d
        if diff > 0:
            return 1 if self.a > 0 else -1
        return 1 if self.b > 0 else -1

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(float(self.d))

    def to_json(self) -> dict:
        return {'a': format_rational(self.a), 'b': format_rational(self.b), 'd': format_rational(self.d)}


def quad_mul(x: QuadScalar, y: QuadScalar) -> QuadScalar:
    """
    Exact product in ℚ[√d]

    Raises:
        RadicandMismatchError: x and y live in different extensions
    """
    if x.d != y.d:
        raise RadicandMismatchError(f"Radicands differ: {x.d} vs {y.d}")
    return QuadScalar(x.a * y.a + x.b * y.b * x.d, x.a * y.b + x.b * y.a, x.d)
