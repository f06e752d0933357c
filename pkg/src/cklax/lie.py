"""Truncated Lie algebras of infinitesimal characters and their doubles."""

from __future__ import annotations

import json
from functools import lru_cache

from gmpy2 import mpq

from .characters import InfChar, basis_for, check_closed, lie_bracket
from .core.linalg import ExactMatrix, rref
from .core.laurent import Window
from .core.poly import MultiPoly
from .core.scalar import format_scalar, norm
from .trees import CHERRY, COROLLA3, COROLLA4, DOT, LADDER2

__all__ = [
    "LieData",
    "NotNilpotent",
    "truncated_lie_algebra",
    "double",
    "nilpotency_step",
    "ad_matrix",
    "lie_poisson_matrix",
    "coordinate_names",
    "named_algebra",
    "ALGEBRA_NAMES",
    "H1_TREES",
    "H2_TREES",
    "H3_TREES",
]

H1_TREES = (DOT, LADDER2, CHERRY)
H2_TREES = H1_TREES + (COROLLA3,)
H3_TREES = H2_TREES + (COROLLA4,)


class NotNilpotent(ArithmeticError):
    pass


class LieData:
    """Structure constants on a named basis.

    ``brackets[(a, b)]`` maps ``c -> coefficient`` for ``[e_a, e_b]`` and is
    stored for both orders.  ``k`` is the number of unstarred basis vectors;
    for a double the basis is ``X1..Xk, X1s..Xks``.
    """

    def __init__(self, basis_names, degrees, brackets, k=None, trees=None):
        self.basis_names = list(basis_names)
        self.dim = len(self.basis_names)
        self.degrees = list(degrees)
        self.k = self.dim if k is None else k
        self.trees = tuple(trees) if trees else None
        clean: dict = {}
        for (a, b), terms in brackets.items():
            terms = {c: norm(v) for c, v in terms.items() if v}
            if a == b and terms:
                raise ValueError(f"nonzero self-bracket on {self.basis_names[a]}")
            if terms:
                clean[(a, b)] = terms
                clean[(b, a)] = {c: -v for c, v in terms.items()}
        self.brackets = clean

    @property
    def is_double(self) -> bool:
        return self.dim == 2 * self.k

    def bracket_coeff(self, a: int, b: int, c: int):
        return self.brackets.get((a, b), {}).get(c, mpq(0))

    def bracket_vectors(self, u, v) -> list:
        """Bracket of two coordinate vectors (scalars or polynomials)."""
        out = [MultiPoly() if _is_poly(u, v) else mpq(0)] * self.dim
        out = list(out)
        for (a, b), terms in self.brackets.items():
            if not u[a] or not v[b]:
                continue
            w = u[a] * v[b]
            for c, coef in terms.items():
                out[c] = out[c] + w * coef
        return out

    def structure_table(self) -> list[tuple]:
        """Nonzero ``(a, b, c, coeff)`` with ``a < b``, sorted."""
        rows = []
        for (a, b), terms in self.brackets.items():
            if a < b:
                for c, v in terms.items():
                    rows.append((a, b, c, v))
        return sorted(rows, key=lambda r: (r[0], r[1], r[2]))

    def format_table(self) -> list[str]:
        lines = []
        for a, b, c, v in self.structure_table():
            coef = format_scalar(v)
            lines.append(f"[{self.basis_names[a]},{self.basis_names[b]}] = {coef}*{self.basis_names[c]}")
        return lines

    def check_antisymmetry(self) -> bool:
        return all(self.brackets.get((b, a)) == {c: -v for c, v in t.items()}
                   for (a, b), t in self.brackets.items())

    def jacobi_violations(self) -> list[tuple]:
        """Basis triples where the Jacobi identity fails (empty when it holds)."""
        bad = []
        n = self.dim
        e = [[mpq(1) if i == j else mpq(0) for i in range(n)] for j in range(n)]
        for a in range(n):
            for b in range(a + 1, n):
                ab = self.bracket_vectors(e[a], e[b])
                for c in range(b + 1, n):
                    bc = self.bracket_vectors(e[b], e[c])
                    ca = self.bracket_vectors(e[c], e[a])
                    tot = [x + y + z for x, y, z in zip(self.bracket_vectors(ab, e[c]),
                                                        self.bracket_vectors(bc, e[a]),
                                                        self.bracket_vectors(ca, e[b]))]
                    if any(tot):
                        bad.append((a, b, c))
        return bad

    def to_json(self) -> dict:
        return {
            "basis": self.basis_names,
            "degrees": self.degrees,
            "brackets": [[self.basis_names[a], self.basis_names[b], self.basis_names[c], format_scalar(v)]
                         for a, b, c, v in self.structure_table()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, data) -> "LieData":
        if isinstance(data, str):
            data = json.loads(data)
        names = data["basis"]
        idx = {n: i for i, n in enumerate(names)}
        brackets: dict = {}
        for a, b, c, v in data["brackets"]:
            brackets.setdefault((idx[a], idx[b]), {})[idx[c]] = norm(v)
        starred = sum(1 for n in names if n.endswith("s"))
        k = len(names) - starred if starred else None
        return cls(names, data["degrees"], brackets, k=k)

    def __eq__(self, other):
        return isinstance(other, LieData) and self.basis_names == other.basis_names \
            and self.brackets == other.brackets

    __hash__ = None

    def __repr__(self):
        return f"LieData({self.basis_names}, {len(self.structure_table())} brackets)"


def _is_poly(u, v) -> bool:
    return any(isinstance(x, MultiPoly) for x in list(u) + list(v))


def truncated_lie_algebra(generators, k: int) -> LieData:
    """Lie algebra spanned by ``Z_T`` for ``T`` in ``generators`` with ``deg T <= k``.

    Brackets come from convolution of infinitesimal characters; a bracket
    of total degree above ``k`` is set to zero.
    """
    basis = basis_for(trees=generators)
    check_closed(basis)
    span = [t for t in basis if t.degree <= k]
    window = Window(0, 0)
    z = [InfChar.basis_element(basis, t, window) for t in span]
    pos = {t: i for i, t in enumerate(span)}
    brackets = {}
    for i in range(len(span)):
        for j in range(i + 1, len(span)):
            if span[i].degree + span[j].degree > k:
                continue
            br = lie_bracket(z[i], z[j])
            terms = {}
            for t, v in br.values.items():
                c = v.coefficient(0).constant_term()
                if t not in pos:
                    from .characters import NotClosed
                    raise NotClosed(f"[Z_{span[i]}, Z_{span[j]}] has a component on {t} outside the span")
                terms[pos[t]] = c
            if terms:
                brackets[(i, j)] = terms
    names = [f"X{i + 1}" for i in range(len(span))]
    return LieData(names, [t.degree for t in span], brackets, trees=span)


def double(g: LieData) -> LieData:
    """``g + g*`` with ``g`` acting on ``g*`` by the coadjoint action and ``g*`` abelian.

    ``[X_a, X_b*] = sum_c -C[a][c][b] X_c*``, i.e. ``ad*_X = -(ad_X)^T``.
    """
    k = g.dim
    brackets = {}
    for (a, b), terms in g.brackets.items():
        if a < b:
            brackets[(a, b)] = dict(terms)
    for a in range(k):
        for b in range(k):
            terms = {}
            for c in range(k):
                v = g.bracket_coeff(a, c, b)
                if v:
                    terms[k + c] = -v
            if terms:
                brackets[(a, k + b)] = terms
    names = g.basis_names + [f"{n}s" for n in g.basis_names]
    return LieData(names, g.degrees + g.degrees, brackets, k=k, trees=g.trees)


def _span_rank(vectors) -> list:
    if not vectors:
        return []
    red, piv = rref(vectors)
    return red[: len(piv)]


def nilpotency_step(g: LieData) -> int:
    """Smallest ``m`` with every ``(m+1)``-fold bracket zero."""
    n = g.dim
    e = [[mpq(1) if i == j else mpq(0) for i in range(n)] for j in range(n)]
    current = _span_rank(e)
    if not current:
        return 1
    step = 0
    while True:
        step += 1
        nxt = [g.bracket_vectors(x, y) for x in e for y in current]
        nxt = _span_rank([v for v in nxt if any(v)])
        if not nxt:
            return step
        if len(nxt) == len(current):
            raise NotNilpotent(f"lower central series stabilizes at dimension {len(nxt)}")
        current = nxt


def coordinate_names(g: LieData) -> list[str]:
    """Coordinate functions ``x1..xk`` followed by ``x1s..xks`` on a double."""
    names = [f"x{i + 1}" for i in range(g.k)]
    if g.is_double and g.dim > g.k:
        names += [f"x{i + 1}s" for i in range(g.k)]
    return names


def _point(g: LieData, x):
    if x is None:
        return [MultiPoly.var(n) for n in coordinate_names(g)]
    if len(x) != g.dim:
        raise ValueError(f"point has {len(x)} coordinates, algebra has dimension {g.dim}")
    return [MultiPoly.coerce(v) for v in x]


def ad_matrix(g: LieData, x=None) -> ExactMatrix:
    """Matrix of ``ad_x``: column ``j`` holds ``[x, e_j]``.  ``x=None`` means symbolic."""
    pt = _point(g, x)
    n = g.dim
    rows = [[MultiPoly() for _ in range(n)] for _ in range(n)]
    for (a, j), terms in g.brackets.items():
        if not pt[a]:
            continue
        for i, v in terms.items():
            rows[i][j] = rows[i][j] + pt[a] * v
    return ExactMatrix(rows)


def _swap(g: LieData, c: int) -> int:
    # the coordinate paired with basis vector c: X_c <-> x_c*, X_c* <-> x_c
    if not g.is_double:
        return c
    return c + g.k if c < g.k else c - g.k


def lie_poisson_matrix(g: LieData, x=None) -> ExactMatrix:
    """``P[a][b] = {x_a, x_b}`` at the point ``x`` (symbolic by default)."""
    pt = _point(g, x)
    n = g.dim
    rows = [[MultiPoly() for _ in range(n)] for _ in range(n)]
    for (a, b), terms in g.brackets.items():
        for c, v in terms.items():
            rows[a][b] = rows[a][b] + pt[_swap(g, c)] * v
    return ExactMatrix(rows)


ALGEBRA_NAMES = ("g1", "g2", "g3", "delta1", "delta2", "delta3")


@lru_cache(maxsize=None)
def named_algebra(name: str) -> LieData:
    """``g1``/``g2``/``g3`` from the small Hopf subalgebras; ``deltaN`` their doubles."""
    table = {"g1": (H1_TREES, 3), "g2": (H2_TREES, 4), "g3": (H3_TREES, 5)}
    if name in table:
        trees, k = table[name]
        return truncated_lie_algebra(trees, k)
    if name.startswith("delta") and f"g{name[5:]}" in table:
        return double(named_algebra(f"g{name[5:]}"))
    raise KeyError(f"unknown algebra {name!r}; choose from {', '.join(ALGEBRA_NAMES)}")
