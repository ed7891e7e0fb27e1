"""
Exact finite-precision p-adic scalars and vectors.

A nonzero ``PAdic`` is ``u * p**v`` with ``u`` a unit known to ``N``
significant base-p digits. Digits are stored least significant first.

Text grammar (``parse_padic`` / ``format_padic``)::

    literal   := int_part [ "." frac_part ]
    int_part  := digit*        coefficients of p^0, p^1, p^2, ... (low-order first)
    frac_part := digit+        coefficients of p^-1, p^-2, ...  (outward from the point)

Digits are ``0-9a-z`` (so ``p <= 36``); there is no sign character, negative
numbers are written through their p-adic digits. ``"0"`` is zero and
``".1"`` with ``p = 2`` is ``1/2``. ``format_padic`` emits the canonical form
(no zero digits above the leading digit, none below the lowest nonzero
fractional digit), and ``parse_padic`` inverts it exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import MalformedLiteral, NotAUnit, PrimeMismatch

DEFAULT_PRECISION = 16

DIGIT_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"

LITERAL_PATTERN = re.compile(r"^([0-9a-z]*)(?:\.([0-9a-z]+))?$")

Rational = Union[int, Fraction]


def is_prime(n: int) -> bool:
    return n >= 2 and all(n % q for q in range(2, math.isqrt(n) + 1))


def valuation_of_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(q: Rational, p: int) -> Optional[int]:
    """p-adic valuation of a rational; ``None`` for zero."""
    q = Fraction(q)
    if q == 0:
        return None
    return valuation_of_int(q.numerator, p) - valuation_of_int(q.denominator, p)


def rational_norm(q: Rational, p: int) -> Fraction:
    v = valuation(q, p)
    if v is None:
        return Fraction(0)
    return Fraction(p) ** (-v)


@dataclass(frozen=True)
class PAdic:
    """A p-adic number ``sum(digits[i] * p**(valuation + i))``.

    ``valuation`` is ``None`` exactly for the distinguished zero, whose digit
    tuple is empty. Otherwise ``digits[0] != 0`` and ``len(digits) <= precision``
    (zero digits above the leading one are not stored).
    """

    p: int
    valuation: Optional[int]
    digits: Tuple[int, ...]
    precision: int = DEFAULT_PRECISION

    @property
    def is_zero(self) -> bool:
        return self.valuation is None

    @property
    def unit(self) -> int:
        """The unit part ``u`` as an integer in ``[0, p**precision)``."""
        u = 0
        for digit in reversed(self.digits):
            u = u * self.p + digit
        return u

    @classmethod
    def zero(cls, p: int, precision: int = DEFAULT_PRECISION) -> "PAdic":
        return cls(p, None, (), precision)

    @classmethod
    def _normalized(cls, p: int, precision: int, v: int, u: int) -> "PAdic":
        if u == 0:
            return cls.zero(p, precision)
        while u % p == 0:
            u //= p
            v += 1
        u %= p**precision
        digits: List[int] = []
        while u:
            u, r = divmod(u, p)
            digits.append(r)
        return cls(p, v, tuple(digits), precision)

    @classmethod
    def from_int(cls, n: int, p: int, precision: int = DEFAULT_PRECISION) -> "PAdic":
        return cls._normalized(p, precision, 0, n)

    @classmethod
    def from_fraction(cls, q: Rational, p: int, precision: int = DEFAULT_PRECISION) -> "PAdic":
        """Expand a rational; the unit part of the denominator is inverted mod ``p**precision``."""
        q = Fraction(q)
        if q == 0:
            return cls.zero(p, precision)
        num_v = valuation_of_int(q.numerator, p)
        den_v = valuation_of_int(q.denominator, p)
        num_unit = q.numerator // p**num_v
        den_unit = q.denominator // p**den_v
        modulus = p**precision
        u = (num_unit * pow(den_unit, -1, modulus)) % modulus
        return cls._normalized(p, precision, num_v - den_v, u)

    def to_fraction(self) -> Fraction:
        """The finite expansion as a nonnegative rational."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.valuation

    @property
    def absolute_precision(self) -> int:
        """First digit position that is no longer known."""
        if self.is_zero:
            return self.precision
        return self.valuation + self.precision

    def __add__(self, other: "PAdic") -> "PAdic":
        return add(self, other)

    def __neg__(self) -> "PAdic":
        return neg(self)

    def __sub__(self, other: "PAdic") -> "PAdic":
        return sub(self, other)

    def __mul__(self, other: "PAdic") -> "PAdic":
        return mul(self, other)

    def __str__(self) -> str:
        return format_padic(self)


@dataclass(frozen=True)
class PAdicVec:
    """A vector in Q_p^d with max-norm."""

    components: Tuple[PAdic, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("PAdicVec needs at least one component")
        primes = {c.p for c in self.components}
        if len(primes) != 1:
            raise PrimeMismatch(f"components use different primes: {sorted(primes)}")

    @property
    def p(self) -> int:
        return self.components[0].p

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def precision(self) -> int:
        return min(c.precision for c in self.components)

    @classmethod
    def from_fractions(
        cls, coords: Sequence[Rational], p: int, precision: int = DEFAULT_PRECISION
    ) -> "PAdicVec":
        return cls(tuple(PAdic.from_fraction(c, p, precision) for c in coords))

    @classmethod
    def from_ints(cls, coords: Sequence[int], p: int, precision: int = DEFAULT_PRECISION) -> "PAdicVec":
        return cls(tuple(PAdic.from_int(c, p, precision) for c in coords))

    def to_fractions(self) -> Tuple[Fraction, ...]:
        return tuple(c.to_fraction() for c in self.components)

    @property
    def absolute_precision(self) -> int:
        """Lowest absolute precision over the nonzero components (``precision`` if all vanish)."""
        known = [c.absolute_precision for c in self.components if not c.is_zero]
        return min(known) if known else self.precision


@dataclass(frozen=True)
class UnitComplex:
    """``exp(2 pi i * phase)`` with an exact rational phase in ``[0, 1)``."""

    phase: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase", Fraction(self.phase) % 1)

    def __mul__(self, other: "UnitComplex") -> "UnitComplex":
        return UnitComplex(self.phase + other.phase)

    def __pow__(self, exponent: int) -> "UnitComplex":
        return UnitComplex(self.phase * exponent)

    def conjugate(self) -> "UnitComplex":
        return UnitComplex(-self.phase)

    def value(self) -> complex:
        return complex(np.exp(2j * np.pi * float(self.phase)))


def _check_same_prime(x: PAdic, y: PAdic) -> None:
    if x.p != y.p:
        raise PrimeMismatch(f"cannot combine {x.p}-adic and {y.p}-adic numbers")


def add(x: PAdic, y: PAdic) -> PAdic:
    """Exact sum; carries beyond the common ``N``-digit window are dropped."""
    _check_same_prime(x, y)
    precision = min(x.precision, y.precision)
    if x.is_zero:
        return PAdic._normalized(y.p, precision, y.valuation or 0, y.unit)
    if y.is_zero:
        return PAdic._normalized(x.p, precision, x.valuation, x.unit)
    m = min(x.valuation, y.valuation)
    total = x.unit * x.p ** (x.valuation - m) + y.unit * y.p ** (y.valuation - m)
    total %= x.p**precision
    return PAdic._normalized(x.p, precision, m, total)


def neg(x: PAdic) -> PAdic:
    if x.is_zero:
        return x
    return PAdic._normalized(x.p, x.precision, x.valuation, -x.unit % x.p**x.precision)


def sub(x: PAdic, y: PAdic) -> PAdic:
    return add(x, neg(y))


def pow_p(x: PAdic, k: int) -> PAdic:
    """``p**k * x``: shifts the valuation, digits unchanged."""
    if x.is_zero:
        return x
    return PAdic(x.p, x.valuation + k, x.digits, x.precision)


def mul(x: PAdic, y: PAdic) -> PAdic:
    _check_same_prime(x, y)
    precision = min(x.precision, y.precision)
    if x.is_zero or y.is_zero:
        return PAdic.zero(x.p, precision)
    return PAdic._normalized(x.p, precision, x.valuation + y.valuation, x.unit * y.unit)


def invert_unit(x: PAdic) -> PAdic:
    if x.is_zero or x.valuation != 0:
        raise NotAUnit(f"{format_padic(x)} has norm {norm(x)}, not 1")
    modulus = x.p**x.precision
    return PAdic._normalized(x.p, x.precision, 0, pow(x.unit, -1, modulus))


def norm(x: Union[PAdic, PAdicVec]) -> Fraction:
    """``p**(-v)`` exactly; zero for zero; max over components for vectors."""
    if isinstance(x, PAdicVec):
        return max(norm(c) for c in x.components)
    if x.is_zero:
        return Fraction(0)
    return Fraction(x.p) ** (-x.valuation)


def character(x: PAdic) -> UnitComplex:
    """The additive character ``chi(x) = exp(2 pi i {x}_p)``."""
    if x.is_zero or x.valuation >= 0:
        return UnitComplex()
    k = -x.valuation
    return UnitComplex(Fraction(x.unit % x.p**k, x.p**k))


def parse_padic(text: str, p: int, precision: int = DEFAULT_PRECISION) -> PAdic:
    """Parse a literal in the grammar documented at module level."""
    if not is_prime(p):
        raise MalformedLiteral(f"{p} is not a prime")
    if p > len(DIGIT_CHARS):
        raise MalformedLiteral(f"prime {p} is outside the supported digit alphabet")
    text = text.strip().lower()
    match = LITERAL_PATTERN.match(text)
    if not text or not match or not (match.group(1) or match.group(2)):
        raise MalformedLiteral(f"not a {p}-adic literal: {text!r}")

    int_part, frac_part = match.group(1), match.group(2) or ""
    value = Fraction(0)
    for position, char in enumerate(int_part):
        value += _digit_value(char, p) * Fraction(p) ** position
    for offset, char in enumerate(frac_part, start=1):
        value += _digit_value(char, p) * Fraction(p) ** (-offset)
    return PAdic.from_fraction(value, p, precision)


def _digit_value(char: str, p: int) -> int:
    digit = DIGIT_CHARS.index(char)
    if digit >= p:
        raise MalformedLiteral(f"digit {char!r} is not below p={p}")
    return digit


def format_padic(x: PAdic) -> str:
    if x.is_zero:
        return "0"
    by_position: Dict[int, int] = {x.valuation + i: digit for i, digit in enumerate(x.digits)}
    top = x.valuation + len(x.digits) - 1
    int_part = "".join(DIGIT_CHARS[by_position.get(j, 0)] for j in range(0, top + 1))
    if x.valuation >= 0:
        return int_part
    frac_part = "".join(DIGIT_CHARS[by_position.get(j, 0)] for j in range(-1, x.valuation - 1, -1))
    return f"{int_part}.{frac_part}"


__all__ = [
    "DEFAULT_PRECISION",
    "is_prime",
    "PAdic",
    "PAdicVec",
    "UnitComplex",
    "add",
    "neg",
    "sub",
    "pow_p",
    "mul",
    "invert_unit",
    "norm",
    "character",
    "parse_padic",
    "format_padic",
    "valuation",
    "rational_norm",
]
