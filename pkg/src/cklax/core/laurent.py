"""Truncated Laurent series in lambda with polynomial coefficients."""

from __future__ import annotations

from typing import NamedTuple

from .poly import MultiPoly
from .scalar import norm

__all__ = [
    "Window",
    "DEFAULT_WINDOW",
    "LaurentElement",
    "PoleOverflow",
    "WindowMismatch",
    "laurent_mul",
    "minimal_subtraction",
    "r_matrix",
]


class PoleOverflow(ArithmeticError):
    """A result has a pole deeper than the window allows."""


class WindowMismatch(ValueError):
    pass


class Window(NamedTuple):
    lo: int
    hi: int

    def enlarged(self, by: int) -> "Window":
        return Window(self.lo - by, self.hi + by)


DEFAULT_WINDOW = Window(-8, 8)


class LaurentElement:
    """Element of C[lambda^-1, lambda]] restricted to exponents ``[lo, hi]``.

    Anything generated above ``hi`` is dropped (series tail); a nonzero
    coefficient below ``lo`` raises :class:`PoleOverflow`.
    """

    __slots__ = ("window", "coeffs")

    def __init__(self, coeffs=None, window: Window = DEFAULT_WINDOW):
        lo, hi = window
        if lo > hi:
            raise ValueError(f"empty window {window}")
        clean = {}
        for e, p in (coeffs or {}).items():
            p = MultiPoly.coerce(p)
            if not p:
                continue
            if e < lo:
                raise PoleOverflow(f"exponent {e} below window_lo={lo}")
            if e <= hi:
                clean[e] = p
        self.window = Window(lo, hi)
        self.coeffs = clean

    @classmethod
    def zero(cls, window: Window = DEFAULT_WINDOW) -> "LaurentElement":
        return cls({}, window)

    @classmethod
    def one(cls, window: Window = DEFAULT_WINDOW) -> "LaurentElement":
        return cls({0: MultiPoly.const(1)}, window)

    @classmethod
    def monomial(cls, exponent: int, coeff=1, window: Window = DEFAULT_WINDOW) -> "LaurentElement":
        return cls({exponent: MultiPoly.coerce(coeff)}, window)

    @classmethod
    def _raw(cls, coeffs, window):
        obj = object.__new__(cls)
        obj.window = window
        obj.coeffs = coeffs
        return obj

    # queries ------------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def coefficient(self, k: int) -> MultiPoly:
        return self.coeffs.get(k, MultiPoly())

    def exponents(self) -> list[int]:
        return sorted(self.coeffs)

    def min_exponent(self):
        return min(self.coeffs) if self.coeffs else None

    def max_exponent(self):
        return max(self.coeffs) if self.coeffs else None

    def pole_order(self) -> int:
        m = self.min_exponent()
        return 0 if m is None or m >= 0 else -m

    def is_holomorphic(self) -> bool:
        return self.pole_order() == 0

    def variables(self) -> list[str]:
        names = set()
        for p in self.coeffs.values():
            names.update(p.variables())
        return sorted(names)

    def degree(self, name: str) -> int:
        return max((p.degree(name) for p in self.coeffs.values()), default=-1)

    # arithmetic ------------------------------------------------------------
    def _check(self, other: "LaurentElement"):
        if self.window != other.window:
            raise WindowMismatch(f"windows differ: {self.window} vs {other.window}")

    def __add__(self, other):
        if not isinstance(other, LaurentElement):
            return self + LaurentElement({0: MultiPoly.coerce(other)}, self.window)
        self._check(other)
        out = dict(self.coeffs)
        for e, p in other.coeffs.items():
            q = out.get(e)
            if q is None:
                out[e] = p
            else:
                q = q + p
                if q:
                    out[e] = q
                else:
                    del out[e]
        return LaurentElement._raw(out, self.window)

    __radd__ = __add__

    def __neg__(self):
        return LaurentElement._raw({e: -p for e, p in self.coeffs.items()}, self.window)

    def __sub__(self, other):
        if not isinstance(other, LaurentElement):
            other = LaurentElement({0: MultiPoly.coerce(other)}, self.window)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentElement):
            return laurent_mul(self, other)
        if isinstance(other, MultiPoly):
            if not other:
                return LaurentElement._raw({}, self.window)
            out = {}
            for e, p in self.coeffs.items():
                q = p * other
                if q:
                    out[e] = q
            return LaurentElement._raw(out, self.window)
        try:
            c = norm(other)
        except TypeError:
            return NotImplemented
        if not c:
            return LaurentElement._raw({}, self.window)
        return LaurentElement._raw({e: p * c for e, p in self.coeffs.items()}, self.window)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = norm(other)
        return LaurentElement._raw({e: p / c for e, p in self.coeffs.items()}, self.window)

    def shift(self, k: int) -> "LaurentElement":
        """Multiply by ``lambda**k``."""
        return LaurentElement({e + k: p for e, p in self.coeffs.items()}, self.window)

    def __eq__(self, other):
        if isinstance(other, LaurentElement):
            return self.coeffs == other.coeffs
        if other == 0:
            return not self.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    # coefficientwise maps -------------------------------------------------------
    def map(self, fn) -> "LaurentElement":
        """Apply ``fn: MultiPoly -> MultiPoly`` to every coefficient."""
        out = {}
        for e, p in self.coeffs.items():
            q = fn(p)
            if q:
                out[e] = q
        return LaurentElement._raw(out, self.window)

    def diff(self, name: str) -> "LaurentElement":
        return self.map(lambda p: p.diff(name))

    def subs(self, assignment) -> "LaurentElement":
        return self.map(lambda p: p.subs(assignment))

    def rewindow(self, window: Window) -> "LaurentElement":
        return LaurentElement(self.coeffs, window)

    def truncate_above(self, k: int) -> "LaurentElement":
        return LaurentElement._raw({e: p for e, p in self.coeffs.items() if e <= k}, self.window)

    # text ---------------------------------------------------------------------
    def __repr__(self):
        return f"LaurentElement({str(self)!r}, window={tuple(self.window)})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs):
            p = self.coeffs[e]
            lam = "" if e == 0 else ("lam" if e == 1 else f"lam^{e}" if e > 0 else f"lam^({e})")
            body = str(p)
            if lam:
                body = lam if body == "1" else f"({body})*{lam}"
            parts.append(body)
        return " + ".join(parts)

    def to_json(self) -> list:
        return [[e, str(self.coeffs[e])] for e in sorted(self.coeffs)]

    @classmethod
    def from_json(cls, data, window: Window = DEFAULT_WINDOW) -> "LaurentElement":
        return cls({int(e): MultiPoly.parse(str(c)) for e, c in data}, window)


def laurent_mul(a: LaurentElement, b: LaurentElement) -> LaurentElement:
    """Cauchy product truncated at ``window.hi``; poles below ``window.lo`` raise."""
    a._check(b)
    lo, hi = a.window
    acc: dict = {}
    for e1, p1 in a.coeffs.items():
        t1 = p1.terms
        for e2, p2 in b.coeffs.items():
            e = e1 + e2
            if e > hi:
                continue
            d = acc.get(e)
            if d is None:
                d = acc[e] = {}
            get = d.get
            for m2, c2 in p2.terms.items():
                for m1, c1 in t1.items():
                    k = m1 + m2
                    v = get(k)
                    d[k] = c1 * c2 if v is None else v + c1 * c2
    out = {}
    for e, d in acc.items():
        d = {m: c for m, c in d.items() if c}
        if d:
            if e < lo:
                raise PoleOverflow(f"product has a pole of order {-e}, window_lo={lo}")
            out[e] = MultiPoly(d)
    return LaurentElement._raw(out, a.window)


def minimal_subtraction(a: LaurentElement) -> tuple[LaurentElement, LaurentElement]:
    """Split ``a`` into its pole part and its holomorphic part."""
    neg = {e: p for e, p in a.coeffs.items() if e < 0}
    pos = {e: p for e, p in a.coeffs.items() if e >= 0}
    return LaurentElement._raw(neg, a.window), LaurentElement._raw(pos, a.window)


def r_matrix(a: LaurentElement) -> LaurentElement:
    """``R = pi_+ - pi_-``: identity on the holomorphic part, minus identity on poles."""
    return LaurentElement._raw(
        {e: (p if e >= 0 else -p) for e, p in a.coeffs.items()}, a.window
    )

