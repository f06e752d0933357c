"""Rooted trees, forests and the Connes-Kreimer Hopf algebra.

Trees are written as nested brackets: the single vertex is ``[]``, the
two-vertex ladder ``[[]]``, the cherry ``[[][]]``.  Children are kept sorted
by their encoding, which makes the encoding canonical.

The coproduct is oriented pruned part on the left, trunk (the piece that
keeps the root) on the right:

    Delta(T) = T (x) 1 + 1 (x) T + sum over admissible cuts  P^c(T) (x) R^c(T)
"""

from __future__ import annotations

import contextlib
import contextvars
from collections import defaultdict
from functools import lru_cache

from gmpy2 import mpq

from .core.scalar import format_scalar, norm

__all__ = [
    "RootedTree",
    "Forest",
    "HopfElement",
    "TensorElement",
    "enumerate_trees",
    "enumerate_forests",
    "tree_coproduct",
    "forest_coproduct",
    "coproduct",
    "antipode",
    "grading_Y",
    "counit",
    "flipped_coproduct",
    "hopf_axiom_failures",
    "DOT",
    "LADDER2",
    "LADDER3",
    "CHERRY",
    "COROLLA3",
    "COROLLA4",
]


class RootedTree:
    """Unlabelled, non-planar rooted tree in canonical form."""

    __slots__ = ("children", "code", "degree", "_hash")

    def __init__(self, children=()):
        kids = tuple(sorted(children, key=lambda c: c.code))
        self.children = kids
        self.code = "[" + "".join(c.code for c in kids) + "]"
        self.degree = 1 + sum(c.degree for c in kids)
        self._hash = hash(self.code)

    @classmethod
    def parse(cls, code: str) -> "RootedTree":
        code = code.strip()
        stack: list[list] = []
        root = None
        for pos, ch in enumerate(code):
            if ch == "[":
                stack.append([])
            elif ch == "]":
                if not stack:
                    raise ValueError(f"unbalanced tree encoding {code!r} at column {pos + 1}")
                node = cls(stack.pop())
                if stack:
                    stack[-1].append(node)
                elif root is None and pos == len(code) - 1:
                    root = node
                else:
                    raise ValueError(f"trailing characters in tree encoding {code!r}")
            else:
                raise ValueError(f"unexpected character {ch!r} in tree encoding {code!r}")
        if root is None:
            raise ValueError(f"incomplete tree encoding {code!r}")
        return root

    def sort_key(self):
        return (self.degree, self.code)

    def __eq__(self, other):
        return isinstance(other, RootedTree) and self.code == other.code

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"RootedTree({self.code!r})"

    def __str__(self):
        return self.code


DOT = RootedTree.parse("[]")
LADDER2 = RootedTree.parse("[[]]")
LADDER3 = RootedTree.parse("[[[]]]")
CHERRY = RootedTree.parse("[[][]]")
COROLLA3 = RootedTree.parse("[[][][]]")
COROLLA4 = RootedTree.parse("[[][][][]]")


class Forest(tuple):
    """Commutative monomial of trees; the empty forest is the unit ``1``."""

    __slots__ = ()

    def __new__(cls, trees=()):
        return super().__new__(cls, sorted(trees, key=RootedTree.sort_key))

    @property
    def degree(self) -> int:
        return sum(t.degree for t in self)

    def __mul__(self, other):
        return Forest(tuple(self) + tuple(other))

    def __add__(self, other):
        raise TypeError("forests multiply; use HopfElement for sums")

    @classmethod
    def parse(cls, text: str) -> "Forest":
        text = text.strip()
        if text in ("", "1"):
            return cls()
        return cls(RootedTree.parse(part) for part in text.split(","))

    def __str__(self):
        return ",".join(t.code for t in self) if self else "1"

    def __repr__(self):
        return f"Forest({str(self)!r})"


UNIT = Forest()


# -- enumeration ------------------------------------------------------------------

@lru_cache(maxsize=None)
def _trees_of_degree(n: int) -> tuple:
    if n == 1:
        return (DOT,)
    trees = {RootedTree(f) for f in _forests_of_degree(n - 1)}
    return tuple(sorted(trees, key=RootedTree.sort_key))


@lru_cache(maxsize=None)
def _forests_of_degree(n: int) -> tuple:
    if n == 0:
        return (UNIT,)
    pool = [t for d in range(1, n + 1) for t in _trees_of_degree(d)]
    out = []

    def rec(start, remaining, acc):
        if remaining == 0:
            out.append(Forest(acc))
            return
        for i in range(start, len(pool)):
            t = pool[i]
            if t.degree <= remaining:
                rec(i, remaining - t.degree, acc + [t])

    rec(0, n, [])
    return tuple(sorted(set(out), key=lambda f: [t.sort_key() for t in f]))


def enumerate_trees(max_degree: int) -> list[RootedTree]:
    """All rooted trees with at most ``max_degree`` vertices, sorted by (degree, encoding)."""
    if max_degree < 1:
        raise ValueError("max_degree must be at least 1")
    return [t for d in range(1, max_degree + 1) for t in _trees_of_degree(d)]


def enumerate_forests(max_degree: int) -> list[Forest]:
    """All forests (including the empty one) of total degree at most ``max_degree``."""
    return [f for d in range(max_degree + 1) for f in _forests_of_degree(d)]


# -- coproduct ----------------------------------------------------------------------

_FLIPPED = contextvars.ContextVar("cklax_flipped_coproduct", default=False)


@contextlib.contextmanager
def flipped_coproduct():
    """Debug switch: swap tensor factors (trunk on the left).  Used for mutation tests."""
    token = _FLIPPED.set(True)
    try:
        yield
    finally:
        _FLIPPED.reset(token)


def _mul_tensor_terms(a: dict, b: dict) -> dict:
    out: dict = defaultdict(int)
    for (p1, r1), c1 in a.items():
        for (p2, r2), c2 in b.items():
            out[(p1 * p2, r1 * r2)] += c1 * c2
    return dict(out)


@lru_cache(maxsize=None)
def _cut_coproduct(tree: RootedTree) -> dict:
    # Delta(B+(F)) = B+(F) (x) 1 + (id (x) B+) Delta(F)
    terms = {(UNIT, UNIT): 1}
    for child in tree.children:
        terms = _mul_tensor_terms(terms, _cut_coproduct(child))
    out = {(Forest([tree]), UNIT): 1}
    for (pruned, trunk_forest), c in terms.items():
        key = (pruned, Forest([RootedTree(trunk_forest)]))
        out[key] = out.get(key, 0) + c
    return out


@lru_cache(maxsize=None)
def _flip(tree: RootedTree) -> dict:
    return {(r, p): c for (p, r), c in _cut_coproduct(tree).items()}


def tree_coproduct(tree: RootedTree) -> dict:
    """``{(left_forest, right_forest): multiplicity}`` for a single tree."""
    return _flip(tree) if _FLIPPED.get() else _cut_coproduct(tree)


def forest_coproduct(forest: Forest) -> dict:
    terms = {(UNIT, UNIT): 1}
    for t in forest:
        terms = _mul_tensor_terms(terms, tree_coproduct(t))
    return terms


# -- algebra elements ------------------------------------------------------------------

class HopfElement:
    """Finite linear combination of forests with exact coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for f, c in (terms or {}).items():
            c = norm(c)
            if c:
                clean[f if isinstance(f, Forest) else Forest(f)] = c
        self.terms = clean

    @classmethod
    def of(cls, *items) -> "HopfElement":
        """``HopfElement.of(tree_or_forest, ...)`` -- the product of the items."""
        f = UNIT
        for it in items:
            f = f * (Forest([it]) if isinstance(it, RootedTree) else Forest(it))
        return cls({f: 1})

    @classmethod
    def one(cls) -> "HopfElement":
        return cls({UNIT: 1})

    def __add__(self, other):
        out = dict(self.terms)
        for f, c in other.terms.items():
            out[f] = out.get(f, 0) + c
        return HopfElement(out)

    def __neg__(self):
        return HopfElement({f: -c for f, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, HopfElement):
            out: dict = {}
            for f1, c1 in self.terms.items():
                for f2, c2 in other.terms.items():
                    f = f1 * f2
                    out[f] = out.get(f, 0) + c1 * c2
            return HopfElement(out)
        c = norm(other)
        return HopfElement({f: v * c for f, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, HopfElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def component(self, degree: int) -> "HopfElement":
        return HopfElement({f: c for f, c in self.terms.items() if f.degree == degree})

    def degrees(self) -> list[int]:
        return sorted({f.degree for f in self.terms})

    def __str__(self):
        if not self.terms:
            return "0"
        items = sorted(self.terms.items(), key=lambda fc: (fc[0].degree, str(fc[0])))
        return " + ".join(f"{format_scalar(c)}*{f}" for f, c in items)

    __repr__ = __str__


class TensorElement:
    """Finite linear combination of ``forest (x) forest``."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: norm(c) for k, c in (terms or {}).items() if c}

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return TensorElement(out)

    def __neg__(self):
        return TensorElement({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, TensorElement):
            out: dict = {}
            for (a1, b1), c1 in self.terms.items():
                for (a2, b2), c2 in other.terms.items():
                    k = (a1 * a2, b1 * b2)
                    out[k] = out.get(k, 0) + c1 * c2
            return TensorElement(out)
        c = norm(other)
        return TensorElement({k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, TensorElement) and self.terms == other.terms

    def map_left(self, fn) -> "TensorElement":
        return _map_side(self, fn, left=True)

    def map_right(self, fn) -> "TensorElement":
        return _map_side(self, fn, left=False)

    def multiply(self) -> HopfElement:
        """The algebra product mu: H (x) H -> H."""
        out: dict = {}
        for (a, b), c in self.terms.items():
            f = a * b
            out[f] = out.get(f, 0) + c
        return HopfElement(out)

    def __str__(self):
        if not self.terms:
            return "0"
        items = sorted(self.terms.items(), key=lambda kc: (str(kc[0][0]), str(kc[0][1])))
        return " + ".join(f"{format_scalar(c)}*({a} x {b})" for (a, b), c in items)

    __repr__ = __str__


def _map_side(t: TensorElement, fn, left: bool) -> TensorElement:
    out: dict = {}
    for (a, b), c in t.terms.items():
        image = fn(HopfElement({a if left else b: 1}))
        for f, v in image.terms.items():
            k = (f, b) if left else (a, f)
            out[k] = out.get(k, 0) + c * v
    return TensorElement(out)


def coproduct(x: HopfElement) -> TensorElement:
    out: dict = {}
    for f, c in x.terms.items():
        for k, m in forest_coproduct(f).items():
            out[k] = out.get(k, 0) + c * m
    return TensorElement(out)


def counit(x: HopfElement):
    return x.terms.get(UNIT, mpq(0))


@lru_cache(maxsize=None)
def _antipode_tree(tree: RootedTree, flipped: bool) -> HopfElement:
    # S(T) = -T - sum' S(P) R   from mu (S (x) id) Delta = u eps
    out = -HopfElement.of(tree)
    for (left, right), c in tree_coproduct(tree).items():
        if not left or not right:
            continue
        out = out - _antipode_forest(left, flipped) * HopfElement({right: c})
    return out


def _antipode_forest(forest: Forest, flipped: bool) -> HopfElement:
    out = HopfElement.one()
    for t in forest:
        out = out * _antipode_tree(t, flipped)
    return out


def antipode(x: HopfElement) -> HopfElement:
    flipped = _FLIPPED.get()
    out = HopfElement()
    for f, c in x.terms.items():
        out = out + _antipode_forest(f, flipped) * c
    return out


def grading_Y(x: HopfElement) -> HopfElement:
    """The grading biderivation: multiplies each degree-n component by n."""
    return HopfElement({f: c * f.degree for f, c in x.terms.items()})


# -- axiom checks -------------------------------------------------------------------

def _coassoc_sides(forest: Forest):
    left: dict = {}
    right: dict = {}
    for (a, b), c in forest_coproduct(forest).items():
        for (a1, a2), c1 in forest_coproduct(a).items():
            k = (a1, a2, b)
            left[k] = left.get(k, 0) + c * c1
        for (b1, b2), c2 in forest_coproduct(b).items():
            k = (a, b1, b2)
            right[k] = right.get(k, 0) + c * c2
    return left, right


def hopf_axiom_failures(max_degree: int, pairs=None) -> list[str]:
    """Every violated axiom on forests of degree <= ``max_degree``, as readable strings.

    Checks coassociativity, both counit laws, both antipode laws and the
    biderivation property of ``Y``; ``pairs`` (forest pairs) are used for
    multiplicativity of the coproduct and for ``Y``.
    """
    bad = []
    for f in enumerate_forests(max_degree):
        left, right = _coassoc_sides(f)
        if left != right:
            bad.append(f"coassociativity fails on {f}")
        x = HopfElement({f: 1})
        d = coproduct(x)
        lhs = HopfElement({b: c for (a, b), c in d.terms.items() if not a})
        rhs = HopfElement({a: c for (a, b), c in d.terms.items() if not b})
        if lhs != x or rhs != x:
            bad.append(f"counit law fails on {f}")
        unit_eps = HopfElement.one() * counit(x)
        if d.map_left(antipode).multiply() != unit_eps:
            bad.append(f"mu(S x id)Delta != u eps on {f}")
        if d.map_right(antipode).multiply() != unit_eps:
            bad.append(f"mu(id x S)Delta != u eps on {f}")
    if not bad:
        zero_part = [f for f in enumerate_forests(max_degree) if f.degree == 0]
        if zero_part != [UNIT]:
            bad.append("degree-0 part is not spanned by 1")
    for f, g in pairs or ():
        x, y = HopfElement({f: 1}), HopfElement({g: 1})
        if coproduct(x * y) != coproduct(x) * coproduct(y):
            bad.append(f"Delta is not multiplicative on {f} * {g}")
        if grading_Y(x * y) != grading_Y(x) * y + x * grading_Y(y):
            bad.append(f"Y is not a derivation on {f} * {g}")
    return bad
