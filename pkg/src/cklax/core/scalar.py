"""Gaussian rationals.

Real values are kept as plain ``gmpy2.mpq`` so the common case runs at C
speed; a :class:`Scalar` object only appears when the imaginary part is
nonzero.  Every arithmetic result is passed through :func:`norm`, so a
complex value whose imaginary part cancels collapses back to ``mpq``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

__all__ = ["Scalar", "norm", "real_part", "imag_part", "parse_scalar", "is_scalar", "I"]

_MPQ = type(mpq(0))
_RATIONAL_TYPES = (int, _MPQ, Fraction)


class Scalar:
    """Exact complex number ``re + im*I`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def _make(re, im):
        if not im:
            return re
        s = object.__new__(Scalar)
        s.re = re
        s.im = im
        return s

    def __add__(self, other):
        if isinstance(other, Scalar):
            return Scalar._make(self.re + other.re, self.im + other.im)
        if isinstance(other, _RATIONAL_TYPES):
            return Scalar._make(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Scalar):
            return Scalar._make(self.re - other.re, self.im - other.im)
        if isinstance(other, _RATIONAL_TYPES):
            return Scalar._make(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _RATIONAL_TYPES):
            return Scalar._make(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return Scalar._make(self.re * other.re - self.im * other.im,
                                self.re * other.im + self.im * other.re)
        if isinstance(other, _RATIONAL_TYPES):
            return Scalar._make(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            d = other.re * other.re + other.im * other.im
            return Scalar._make((self.re * other.re + self.im * other.im) / d,
                                (self.im * other.re - self.re * other.im) / d)
        if isinstance(other, _RATIONAL_TYPES):
            if not other:
                raise ZeroDivisionError("division by zero scalar")
            return Scalar._make(self.re / other, self.im / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _RATIONAL_TYPES):
            d = self.re * self.re + self.im * self.im
            return Scalar._make(other * self.re / d, -other * self.im / d)
        return NotImplemented

    def __neg__(self):
        return Scalar._make(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return 1 / (self ** -n)
        result, base = mpq(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self):
        return Scalar._make(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        if isinstance(other, _RATIONAL_TYPES):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"Scalar({self.re}, {self.im})"

    def __str__(self):
        return format_scalar(self)


I = Scalar(0, 1)


def is_scalar(x) -> bool:
    return isinstance(x, (Scalar,) + _RATIONAL_TYPES)


def norm(x):
    """Canonical form of a scalar: ``mpq`` when real, ``Scalar`` otherwise."""
    if isinstance(x, _MPQ):
        return x
    if isinstance(x, Scalar):
        return x.re if not x.im else x
    if isinstance(x, (int, Fraction)):
        return mpq(x)
    if isinstance(x, str):
        return parse_scalar(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def real_part(x):
    return x.re if isinstance(x, Scalar) else mpq(x)


def imag_part(x):
    return x.im if isinstance(x, Scalar) else mpq(0)


def format_scalar(x) -> str:
    re_, im_ = real_part(x), imag_part(x)
    if not im_:
        return str(re_)
    if not re_:
        return f"{im_}*I"
    sign = "+" if im_ > 0 else "-"
    return f"({re_}{sign}{abs(im_)}*I)"


_SCALAR_RE = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\s*$")


def parse_scalar(text: str):
    """Parse ``"3"``, ``"-2/5"``, ``"(1/2+3*I)"`` or ``"2*I"``."""
    s = text.strip()
    m = _SCALAR_RE.match(s)
    if m:
        return mpq(m.group(1))
    # fall back to the polynomial grammar for the complex forms
    from .poly import MultiPoly

    p = MultiPoly.parse(s)
    if not p.is_constant():
        raise ValueError(f"not a scalar: {text!r}")
    return p.constant_term()
