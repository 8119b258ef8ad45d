"""Coefficient arithmetic for the two computation modes.

Exact mode uses :class:`GaussQ`, a Gaussian rational ``re + i*im`` with
``fractions.Fraction`` parts. Float mode uses the builtin ``complex``.
A polynomial never mixes the two.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = [
    "GaussQ",
    "FLOAT_PRUNE",
    "imag_unit",
    "as_coeff",
    "is_exact_value",
    "to_complex",
    "coeff_to_json",
    "coeff_from_json",
    "parse_number",
    "format_number",
]

#: relative pruning threshold for float-mode polynomials
FLOAT_PRUNE = 1e-14


class GaussQ:
    """Exact Gaussian rational number."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> "GaussQ":
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if type(other) is GaussQ:
            return GaussQ._raw(self.re + other.re, self.im + other.im)
        if isinstance(other, Rational):
            return GaussQ._raw(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is GaussQ:
            return GaussQ._raw(self.re - other.re, self.im - other.im)
        if isinstance(other, Rational):
            return GaussQ._raw(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Rational):
            return GaussQ._raw(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if type(other) is GaussQ:
            a, b, c, d = self.re, self.im, other.re, other.im
            if not b:
                return GaussQ._raw(a * c, a * d)
            if not d:
                return GaussQ._raw(a * c, b * c)
            return GaussQ._raw(a * c - b * d, a * d + b * c)
        if isinstance(other, Rational):
            return GaussQ._raw(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Rational):
            other = GaussQ(other)
        if type(other) is not GaussQ:
            return NotImplemented
        c, d = other.re, other.im
        den = c * c + d * d
        if not den:
            raise ZeroDivisionError("GaussQ division by zero")
        return GaussQ._raw((self.re * c + self.im * d) / den, (self.im * c - self.re * d) / den)

    def __rtruediv__(self, other):
        if isinstance(other, Rational):
            return GaussQ(other) / self
        return NotImplemented

    def __neg__(self):
        return GaussQ._raw(-self.re, -self.im)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussQ(1) / (self ** (-k))
        result = GaussQ(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "GaussQ":
        return GaussQ._raw(self.re, -self.im)

    def __abs__(self) -> float:
        return abs(complex(self))

    # comparisons ----------------------------------------------------------
    def __eq__(self, other):
        if type(other) is GaussQ:
            return self.re == other.re and self.im == other.im
        if isinstance(other, Rational):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    @property
    def real(self) -> Fraction:
        return self.re

    @property
    def imag(self) -> Fraction:
        return self.im

    def __repr__(self):
        if not self.im:
            return f"GaussQ({self.re})"
        return f"GaussQ({self.re}, {self.im})"


def imag_unit(exact: bool):
    return GaussQ(0, 1) if exact else 1j


def is_exact_value(v) -> bool:
    return isinstance(v, (Rational, GaussQ))


def as_coeff(value, exact: bool):
    """Convert ``value`` to a coefficient of the requested mode.

    Floats are refused in exact mode; binary floats would silently turn
    into odd-looking rationals.
    """
    if exact:
        if type(value) is GaussQ:
            return value
        if isinstance(value, Rational):
            return GaussQ(value)
        if isinstance(value, str):
            return GaussQ(parse_number(value, exact=True))
        raise TypeError(f"cannot use {value!r} as an exact coefficient")
    if type(value) is GaussQ:
        return complex(value)
    if isinstance(value, str):
        return complex(parse_number(value, exact=False))
    return complex(value)


def to_complex(c) -> complex:
    return complex(c)


def parse_number(s, exact: bool | None = None):
    """Parse ``"p/q"``, an integer or a decimal string.

    With ``exact=None`` rationals and integers come back as ``Fraction`` and
    anything with a decimal point or exponent as ``float``.
    """
    if isinstance(s, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(s, (int, Fraction)):
        return Fraction(s) if exact is not False else float(s)
    if isinstance(s, float):
        if exact:
            raise TypeError(f"float {s!r} given where an exact value is required")
        return s
    s = str(s).strip()
    looks_float = any(ch in s for ch in ".eE") or s.lower() in {"nan", "inf", "-inf"}
    if exact is None:
        return float(s) if looks_float else Fraction(s)
    if exact:
        if looks_float:
            raise TypeError(f"{s!r} is not an exact rational")
        return Fraction(s)
    return float(Fraction(s)) if not looks_float else float(s)


def format_number(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def coeff_to_json(c) -> tuple[str, str]:
    if type(c) is GaussQ:
        return str(c.re), str(c.im)
    c = complex(c)
    return repr(c.real), repr(c.imag)


def coeff_from_json(re, im, exact: bool):
    if exact:
        return GaussQ(parse_number(re, exact=True), parse_number(im, exact=True))
    return complex(float(parse_number(re, exact=False)), float(parse_number(im, exact=False)))
