"""Exact Gaussian-rational scalars.

Every coefficient in the engine lives in Q(i). Values are immutable and
hashable; no floating point is ever involved.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

__all__ = ["GaussianRational", "as_scalar", "parse_scalar", "ZERO", "ONE", "I"]


class GaussianRational:
    """An element ``re + im*i`` with ``re`` and ``im`` arbitrary precision rationals."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> "GaussianRational":
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    def __add__(self, other):
        if type(other) is not GaussianRational:
            other = as_scalar(other)
        return GaussianRational._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is not GaussianRational:
            other = as_scalar(other)
        return GaussianRational._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_scalar(other) - self

    def __mul__(self, other):
        if type(other) is not GaussianRational:
            if isinstance(other, (int, Fraction)):
                return GaussianRational._raw(self.re * other, self.im * other)
            other = as_scalar(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational._raw(a * c, b)
        return GaussianRational._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_scalar(other)
        if not other:
            raise ZeroDivisionError("division by the Gaussian rational zero")
        return self * other.inverse()

    def __rtruediv__(self, other):
        return as_scalar(other) * self.inverse()

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers are exact")
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "GaussianRational":
        norm = self.re * self.re + self.im * self.im
        if not norm:
            raise ZeroDivisionError("Gaussian rational zero has no inverse")
        return GaussianRational._raw(self.re / norm, -self.im / norm)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._raw(self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if type(other) is GaussianRational:
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Rational)):
            return not self.im and self.re == other
        if isinstance(other, complex):
            return self.re == other.real and self.im == other.imag
        return NotImplemented

    def __hash__(self) -> int:
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return not self.im

    def __repr__(self) -> str:
        return f"GaussianRational({str(self)!r})"

    def __str__(self) -> str:
        return format_scalar(self)


ZERO = GaussianRational._raw(Fraction(0), Fraction(0))
ONE = GaussianRational._raw(Fraction(1), Fraction(0))
I = GaussianRational._raw(Fraction(0), Fraction(1))


def as_scalar(value) -> GaussianRational:
    """Coerce ints, Fractions, strings and exactly representable complex values."""
    if type(value) is GaussianRational:
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational._raw(Fraction(value), Fraction(0))
    if isinstance(value, Rational):
        return GaussianRational(Fraction(value.numerator, value.denominator))
    if isinstance(value, str):
        return parse_scalar(value)
    if isinstance(value, complex):
        # floats are converted exactly; callers should not rely on this path
        return GaussianRational(Fraction(value.real), Fraction(value.imag))
    raise TypeError(f"cannot convert {type(value).__name__} to an exact scalar")


_RAT = r"\d+(?:/\d+)?"
_TERM = re.compile(
    rf"(?P<sign>[+-]?)\s*(?:(?P<num>{_RAT})\s*\*?\s*(?P<i1>i)?|(?P<i2>i)\s*(?:/\s*(?P<den>\d+))?|(?P<i3>i)\s*\*\s*(?P<num2>{_RAT}))"
)


def parse_scalar(text: str) -> GaussianRational:
    """Parse strings such as ``"-1/3"``, ``"i/2"``, ``"3/4-1/2i"``, ``"-i"``.

    The unicode minus sign is accepted.
    """
    s = text.strip().replace("−", "-").replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    re_part, im_part = Fraction(0), Fraction(0)
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse exact scalar {text!r}")
        if pos > 0 and not m.group("sign"):
            raise ValueError(f"cannot parse exact scalar {text!r}")
        sign = -1 if m.group("sign") == "-" else 1
        if m.group("num") is not None:
            value = Fraction(m.group("num")) * sign
            if m.group("i1"):
                im_part += value
            else:
                re_part += value
        elif m.group("i2"):
            den = int(m.group("den")) if m.group("den") else 1
            im_part += Fraction(sign, den)
        else:
            im_part += Fraction(m.group("num2")) * sign
        pos = m.end()
    return GaussianRational(re_part, im_part)


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(z: GaussianRational) -> str:
    """Canonical string form, inverse of :func:`parse_scalar`."""
    re_part, im_part = z.re, z.im
    if not im_part:
        return _frac(re_part)
    if abs(im_part) == 1:
        imag = "i"
    else:
        imag = f"{_frac(abs(im_part))}i"
    if not re_part:
        return imag if im_part > 0 else f"-{imag}"
    return f"{_frac(re_part)}{'+' if im_part > 0 else '-'}{imag}"
