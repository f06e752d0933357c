"""Sparse multivariate polynomials with exact Gaussian-rational coefficients.

A monomial is packed into one Python int: variable number ``i`` owns bits
``[16*i, 16*i + 16)`` and stores its exponent there.  Multiplying monomials
is then integer addition, and comparing packed ints is a lexicographic
monomial order (later-registered variables are most significant), which is
all the exact division routine needs.
"""

from __future__ import annotations

import re
import threading

from gmpy2 import mpq

from .scalar import I, format_scalar, imag_part, norm, real_part

__all__ = ["MultiPoly", "var_index", "var_name", "poly", "const", "symbols"]

_BITS = 16
_MASK = (1 << _BITS) - 1
_MAX_EXP = _MASK

_NAMES: list[str] = ["t", "s"]
_NAMES += [f"x{i}" for i in range(1, 17)]
_NAMES += [f"x{i}s" for i in range(1, 17)]
_INDEX = {n: i for i, n in enumerate(_NAMES)}
_LOCK = threading.Lock()
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def var_index(name: str) -> int:
    """Bit-slot of a variable; new names are appended (append-only table)."""
    try:
        return _INDEX[name]
    except KeyError:
        pass
    if not _NAME_RE.match(name) or name == "I":
        raise ValueError(f"invalid variable name {name!r}")
    with _LOCK:
        if name not in _INDEX:
            _INDEX[name] = len(_NAMES)
            _NAMES.append(name)
        return _INDEX[name]


def var_name(index: int) -> str:
    return _NAMES[index]


def _decode(m: int):
    out = []
    i = 0
    while m:
        e = m & _MASK
        if e:
            out.append((i, e))
        m >>= _BITS
        i += 1
    return out


def _exponent(m: int, i: int) -> int:
    return (m >> (_BITS * i)) & _MASK


def _divides(small: int, big: int) -> bool:
    while small:
        if (small & _MASK) > (big & _MASK):
            return False
        small >>= _BITS
        big >>= _BITS
    return True


def _clean(terms: dict) -> dict:
    return {m: c for m, c in terms.items() if c}


class MultiPoly:
    """Immutable sparse polynomial; ``terms`` maps packed monomial -> coefficient."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        self.terms = {} if terms is None else terms
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, c) -> "MultiPoly":
        c = norm(c)
        return cls({0: c} if c else {})

    @classmethod
    def var(cls, name: str, exponent: int = 1) -> "MultiPoly":
        return cls({exponent << (_BITS * var_index(name)): mpq(1)})

    @classmethod
    def from_dict(cls, mapping) -> "MultiPoly":
        """Build from ``{((name, exp), ...): coeff}``."""
        terms: dict = {}
        for mono, c in mapping.items():
            m = 0
            for name, e in mono:
                m += e << (_BITS * var_index(name))
            terms[m] = terms.get(m, 0) + norm(c)
        return cls(_clean(terms))

    @staticmethod
    def coerce(x) -> "MultiPoly":
        if isinstance(x, MultiPoly):
            return x
        if isinstance(x, str):
            return MultiPoly.parse(x)
        return MultiPoly.const(x)

    # queries ----------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_term(self):
        return self.terms.get(0, mpq(0))

    def variables(self) -> list[str]:
        seen = set()
        for m in self.terms:
            for i, _ in _decode(m):
                seen.add(i)
        return [_NAMES[i] for i in sorted(seen)]

    def degree(self, name: str | None = None) -> int:
        """Total degree, or degree in one variable; ``-1`` for the zero polynomial."""
        if not self.terms:
            return -1
        if name is None:
            return max(sum(e for _, e in _decode(m)) for m in self.terms)
        i = var_index(name)
        return max(_exponent(m, i) for m in self.terms)

    def coeff(self, name: str, k: int) -> "MultiPoly":
        """Coefficient of ``name**k`` as a polynomial in the remaining variables."""
        i = var_index(name)
        shift = _BITS * i
        out = {}
        for m, c in self.terms.items():
            if (m >> shift) & _MASK == k:
                out[m - (k << shift)] = c
        return MultiPoly(out)

    def coefficients_in(self, name: str) -> list["MultiPoly"]:
        """``[c_0, c_1, ...]`` with ``self = sum c_k * name**k``."""
        return [self.coeff(name, k) for k in range(self.degree(name) + 1)]

    def monomials(self):
        """Yield ``(((name, exp), ...), coeff)`` in a deterministic order."""
        for m in sorted(self.terms, key=_sort_key):
            yield tuple((_NAMES[i], e) for i, e in _decode(m)), self.terms[m]

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            try:
                other = MultiPoly.const(other)
            except TypeError:
                return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return MultiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            try:
                other = MultiPoly.const(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            try:
                c = norm(other)
            except TypeError:
                return NotImplemented
            if not c:
                return MultiPoly()
            return MultiPoly({m: v * c for m, v in self.terms.items()})
        a, b = self.terms, other.terms
        if not a or not b:
            return MultiPoly()
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        get = out.get
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                k = m1 + m2
                v = get(k)
                out[k] = c1 * c2 if v is None else v + c1 * c2
        return MultiPoly(_clean(out))

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = norm(other)
        return MultiPoly({m: v / c for m, v in self.terms.items()})

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result, base = MultiPoly.const(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.terms == other.terms
        try:
            return self.terms == MultiPoly.const(other).terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # calculus and substitution ---------------------------------------------
    def diff(self, name: str) -> "MultiPoly":
        i = var_index(name)
        shift = _BITS * i
        unit = 1 << shift
        out = {}
        for m, c in self.terms.items():
            e = (m >> shift) & _MASK
            if e:
                out[m - unit] = c * e
        return MultiPoly(out)

    def subs(self, assignment) -> "MultiPoly":
        """Substitute polynomials or scalars for variables (simultaneously)."""
        idx = {var_index(k): MultiPoly.coerce(v) for k, v in assignment.items()}
        if not idx:
            return self
        out = MultiPoly()
        power_cache: dict = {}
        for m, c in self.terms.items():
            rest = m
            term = MultiPoly({0: c})
            for i, e in _decode(m):
                if i in idx:
                    rest -= e << (_BITS * i)
                    key = (i, e)
                    if key not in power_cache:
                        power_cache[key] = idx[i] ** e
                    term = term * power_cache[key]
            out = out + term * MultiPoly({rest: mpq(1)})
        return out

    def evaluate(self, assignment):
        """Full evaluation to an exact scalar; every variable must be assigned."""
        vals = {var_index(k): norm(v) for k, v in assignment.items()}
        total = mpq(0)
        for m, c in self.terms.items():
            term = c
            for i, e in _decode(m):
                if i not in vals:
                    raise KeyError(f"no value for variable {_NAMES[i]!r}")
                term = term * vals[i] ** e
            total = total + term
        return total

    def evaluate_float(self, assignment) -> complex:
        total = 0j
        for m, c in self.terms.items():
            term = complex(float(real_part(c)), float(imag_part(c)))
            for i, e in _decode(m):
                term *= assignment[_NAMES[i]] ** e
            total += term
        return total

    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        """Quotient of an exact division; raises ``ValueError`` if not exact."""
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        lead = max(other.terms)
        lc = other.terms[lead]
        rem = dict(self.terms)
        quot: dict = {}
        while rem:
            top = max(rem)
            if not _divides(lead, top):
                raise ValueError("polynomial division is not exact")
            qm = top - lead
            qc = rem[top] / lc
            quot[qm] = qc
            for m, c in other.terms.items():
                k = m + qm
                v = rem.get(k, 0) - qc * c
                if v:
                    rem[k] = v
                else:
                    rem.pop(k, None)
        return MultiPoly(quot)

    # text ---------------------------------------------------------------------
    def __repr__(self):
        return f"MultiPoly({str(self)!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.monomials():
            factors = [n if e == 1 else f"{n}^{e}" for n, e in mono]
            neg = not imag_part(c) and real_part(c) < 0
            mag = -c if neg else c
            if factors:
                body = "*".join(factors)
                text = body if mag == 1 else f"{format_scalar(mag)}*{body}"
            else:
                text = format_scalar(mag)
            parts.append(("-" if neg else "+", text))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, text in parts[1:]:
            out += f" {sign} {text}"
        return out

    @classmethod
    def parse(cls, text: str) -> "MultiPoly":
        return _Parser(text).parse()


def _sort_key(m: int):
    dec = _decode(m)
    return (sum(e for _, e in dec), [(i, -e) for i, e in dec])


def poly(x) -> MultiPoly:
    """Coerce a scalar, string or polynomial to :class:`MultiPoly`."""
    if isinstance(x, str):
        return MultiPoly.parse(x)
    return MultiPoly.coerce(x)


def const(c) -> MultiPoly:
    return MultiPoly.const(c)


def symbols(*names: str) -> list[MultiPoly]:
    return [MultiPoly.var(n) for n in names]


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


class _Parser:
    """Recursive-descent parser for ``1/2*x1^2 - (3+2*I)*x3s*t + 4``."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = self._tokenize(text)
        self.pos = 0

    def _tokenize(self, text):
        tokens = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                raise ValueError(f"cannot parse polynomial {self.text!r} at column {pos + 1}")
            num, name, op = m.groups()
            if num is not None:
                tokens.append(("num", int(num)))
            elif name is not None:
                tokens.append(("name", name))
            else:
                tokens.append(("op", "^" if op == "**" else op))
            pos = m.end()
        return tokens

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def _take(self):
        tok = self._peek()
        self.pos += 1
        return tok

    def _error(self, msg):
        raise ValueError(f"cannot parse polynomial {self.text!r}: {msg}")

    def parse(self) -> MultiPoly:
        if not self.tokens:
            self._error("empty input")
        p = self._expr()
        if self.pos != len(self.tokens):
            self._error(f"unexpected token {self._peek()[1]!r}")
        return p

    def _expr(self):
        sign = 1
        kind, val = self._peek()
        if kind == "op" and val in "+-":
            self._take()
            sign = -1 if val == "-" else 1
        total = self._term() * sign
        while True:
            kind, val = self._peek()
            if kind == "op" and val in "+-":
                self._take()
                t = self._term()
                total = total + t if val == "+" else total - t
            else:
                return total

    def _term(self):
        p = self._factor()
        while True:
            kind, val = self._peek()
            if kind == "op" and val == "*":
                self._take()
                p = p * self._factor()
            elif kind == "op" and val == "/":
                self._take()
                k2, v2 = self._take()
                if k2 != "num":
                    self._error("only division by integer literals is supported")
                p = p / v2
            else:
                return p

    def _factor(self):
        kind, val = self._take()
        if kind == "num":
            base = MultiPoly.const(val)
        elif kind == "name":
            base = MultiPoly.const(I) if val == "I" else MultiPoly.var(val)
        elif kind == "op" and val == "(":
            base = self._expr()
            k2, v2 = self._take()
            if v2 != ")":
                self._error("missing ')'")
        elif kind == "op" and val == "-":
            return -self._factor()
        else:
            self._error(f"unexpected token {val!r}")
        k2, v2 = self._peek()
        if k2 == "op" and v2 == "^":
            self._take()
            k3, v3 = self._take()
            if k3 != "num":
                self._error("exponent must be a nonnegative integer")
            base = base ** v3
        return base

