"""Exact scalars: rationals and elements of real quadratic fields Q(sqrt d).

Rationals are :class:`fractions.Fraction` throughout; this module adds the
quadratic numbers that the cyclic solver needs, an exact quadratic solver and
the ``"p/q"`` wire format used by every fixture file.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import NamedTuple, Optional, Union

from .errors import ComplexRoots, MixedRadicand, ZeroLeadingCoefficient

Rational = Fraction
Scalar = Union[int, Fraction, "QuadraticNumber"]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")

# primes whose squares are stripped out of radicands eagerly
_SMALL_PRIMES = [p for p in range(2, 1000) if all(p % q for q in range(2, math.isqrt(p) + 1))]


def to_rational(value) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are refused: they would silently break exactness.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if not m:
            raise ValueError(f"not an exact rational: {value!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ZeroDivisionError(f"zero denominator in {value!r}")
        return Fraction(num, den)
    if isinstance(value, QuadraticNumber) and value.is_rational():
        return value.a
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(q) -> str:
    """Serialize as ``"p/q"``, dropping ``/1``."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def is_perfect_square(n: int) -> Optional[int]:
    """Return ``r`` with ``r*r == n`` or ``None``."""
    if n < 0:
        raise ValueError("is_perfect_square needs n >= 0")
    r = math.isqrt(n)
    return r if r * r == n else None


def rational_sqrt(q) -> Optional[Fraction]:
    """Exact square root of a non-negative rational, if it is rational."""
    q = Fraction(q)
    if q < 0:
        return None
    rn = is_perfect_square(q.numerator)
    rd = is_perfect_square(q.denominator)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _normalize_radicand(b: Fraction, d: Fraction):
    """Rewrite b*sqrt(d) as b'*sqrt(n) with n a positive integer, small square
    factors removed. Returns (b', n); n == 0 means the value is rational."""
    if b == 0 or d == 0:
        return Fraction(0), 0
    # sqrt(p/q) = sqrt(p*q)/q
    n = d.numerator * d.denominator
    b = b / d.denominator
    root = is_perfect_square(n)
    if root is not None:
        return b * root, 0
    for p in _SMALL_PRIMES:
        pp = p * p
        if pp > n:
            break
        while n % pp == 0:
            n //= pp
            b *= p
    return b, n


class QuadraticNumber:
    """An element ``a + b*sqrt(d)`` of a real quadratic field.

    The radicand is normalized to a positive integer. Rational values carry
    ``d == 0`` and combine with numbers of any radicand; two irrational
    operands must live in the same field, otherwise :class:`MixedRadicand`
    is raised. Ordering uses the real embedding with ``sqrt(d) >= 0``.
    """

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, a=0, b=0, d=0):
        a = to_rational(a)
        b = to_rational(b)
        d = to_rational(d)
        if d < 0:
            raise ValueError("radicand must be non-negative")
        b, n = _normalize_radicand(b, d)
        if n == 0:
            # the square-root part folded into a rational
            a, b = a + b, Fraction(0)
        self._a = a
        self._b = b
        self._d = n

    @property
    def a(self) -> Fraction:
        return self._a

    @property
    def b(self) -> Fraction:
        return self._b

    @property
    def d(self) -> int:
        return self._d

    @classmethod
    def coerce(cls, value) -> "QuadraticNumber":
        if isinstance(value, cls):
            return value
        if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            return cls(value)
        raise TypeError(f"cannot combine QuadraticNumber with {type(value).__name__}")

    def is_rational(self) -> bool:
        return self._b == 0

    def _raw(self, a, b, d):
        obj = object.__new__(QuadraticNumber)
        obj._a, obj._b, obj._d = a, b, (d if b != 0 else 0)
        return obj

    def _align(self, other: "QuadraticNumber"):
        """Return (b_self, b_other, d) expressed over one common radicand."""
        if other._b == 0:
            return self._b, Fraction(0), self._d
        if self._b == 0:
            return Fraction(0), other._b, other._d
        if self._d == other._d:
            return self._b, other._b, self._d
        ratio = rational_sqrt(Fraction(self._d, other._d))
        if ratio is None:
            raise MixedRadicand(f"sqrt({self._d}) and sqrt({other._d}) generate different fields")
        # sqrt(d_self) = ratio * sqrt(d_other)
        return self._b * ratio, other._b, other._d

    def __add__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        b1, b2, d = self._align(other)
        return self._raw(self._a + other._a, b1 + b2, d)

    __radd__ = __add__

    def __neg__(self):
        return self._raw(-self._a, -self._b, self._d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        b1, b2, d = self._align(other)
        a1, a2 = self._a, other._a
        return self._raw(a1 * a2 + b1 * b2 * d, a1 * b2 + a2 * b1, d)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticNumber":
        return self._raw(self._a, -self._b, self._d)

    def norm(self) -> Fraction:
        """Field norm ``a^2 - b^2 d``."""
        return self._a * self._a - self._b * self._b * self._d

    def trace(self) -> Fraction:
        return 2 * self._a

    def inverse(self) -> "QuadraticNumber":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._raw(self._a / n, -self._b / n, self._d)

    def __truediv__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return QuadraticNumber.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadraticNumber(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sign(self) -> int:
        """Exact sign under the real embedding."""
        sa, sb = _sign(self._a), _sign(self._b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        lhs = self._a * self._a
        rhs = self._b * self._b * self._d
        if lhs > rhs:
            return sa
        if lhs < rhs:
            return sb
        return 0

    def __eq__(self, other):
        try:
            other = QuadraticNumber.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        try:
            return (self - other).sign() == 0
        except MixedRadicand:
            return False

    def __hash__(self):
        if self._b == 0:
            return hash(self._a)
        return hash((self._a, self._b, self._d))

    def _cmp(self, other) -> int:
        return (self - QuadraticNumber.coerce(other)).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return self.sign() != 0

    def __repr__(self):
        return f"QuadraticNumber({format_rational(self._a)!r}, {format_rational(self._b)!r}, {self._d})"

    def __str__(self):
        if self._b == 0:
            return format_rational(self._a)
        root = f"sqrt({self._d})"
        b = self._b
        if b == 1:
            tail = root
        elif b == -1:
            tail = f"-{root}"
        else:
            tail = f"{format_rational(b)}*{root}"
        if self._a == 0:
            return tail
        sep = " - " if tail.startswith("-") else " + "
        return f"{format_rational(self._a)}{sep}{tail.lstrip('-')}"

    def to_json(self) -> dict:
        return {"a": format_rational(self._a), "b": format_rational(self._b), "d": format_rational(self._d)}

    @classmethod
    def from_json(cls, obj) -> "QuadraticNumber":
        if isinstance(obj, dict):
            return cls(obj.get("a", 0), obj.get("b", 0), obj.get("d", 0))
        return cls(to_rational(obj))


def scalar_to_json(x):
    """Rationals as ``"p/q"``, quadratic numbers as ``{a, b, d}``."""
    if isinstance(x, QuadraticNumber):
        return format_rational(x.a) if x.is_rational() else x.to_json()
    return format_rational(x)


class RootPair(NamedTuple):
    larger: QuadraticNumber
    smaller: QuadraticNumber
    discriminant: Fraction


def quad_solve(a, b, c) -> RootPair:
    """Both real roots of ``aX^2 + bX + c``, larger first.

    The roots live in ``Q(sqrt(b^2 - 4ac))``; Vieta's relations are checked
    exactly before returning.
    """
    a, b, c = to_rational(a), to_rational(b), to_rational(c)
    if a == 0:
        raise ZeroLeadingCoefficient("quadratic with a = 0")
    disc = b * b - 4 * a * c
    if disc < 0:
        raise ComplexRoots(disc)
    centre = -b / (2 * a)
    half_width = 1 / (2 * a)
    r1 = QuadraticNumber(centre, half_width, disc)
    r2 = QuadraticNumber(centre, -half_width, disc)
    if r1 < r2:
        r1, r2 = r2, r1
    if r1 + r2 != -b / a or r1 * r2 != c / a:
        raise ArithmeticError("Vieta check failed")
    return RootPair(r1, r2, disc)
