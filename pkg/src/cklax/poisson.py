"""Polynomial functions on a double Lie algebra and their Lie-Poisson bracket."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from gmpy2 import mpq

from .core.linalg import ExactMatrix, exact_rank, solve_linear
from .core.poly import MultiPoly
from .core.scalar import norm
from .lie import LieData, coordinate_names, lie_poisson_matrix, named_algebra

__all__ = [
    "PoissonPoly",
    "AlgebraMismatch",
    "InconsistentSystem",
    "poisson_bracket",
    "InvolutionReport",
    "check_involution",
    "jacobian",
    "jacobian_rank",
    "independence_certificate",
    "gradient",
    "HamiltonianAnsatz",
    "HamiltonianFit",
    "fit_hamiltonian",
    "paper_family",
    "random_points",
]


class AlgebraMismatch(ValueError):
    pass


class InconsistentSystem(ArithmeticError):
    def __init__(self, msg, n_equations=0, n_unknowns=0, rank=0):
        super().__init__(msg)
        self.n_equations = n_equations
        self.n_unknowns = n_unknowns
        self.rank = rank


class PoissonPoly:
    """A polynomial in the coordinates of ``algebra``."""

    __slots__ = ("algebra", "poly")

    def __init__(self, algebra: LieData, poly):
        if isinstance(poly, str):
            poly = MultiPoly.parse(poly)
        poly = MultiPoly.coerce(poly)
        allowed = set(coordinate_names(algebra))
        extra = set(poly.variables()) - allowed
        if extra:
            raise ValueError(f"variables {sorted(extra)} are not coordinates of this algebra")
        self.algebra = algebra
        self.poly = poly

    def _check(self, other):
        if isinstance(other, PoissonPoly):
            if other.algebra is not self.algebra and other.algebra != self.algebra:
                raise AlgebraMismatch("polynomials live on different algebras")
            return other.poly
        return MultiPoly.coerce(other)

    def __add__(self, other):
        return PoissonPoly(self.algebra, self.poly + self._check(other))

    __radd__ = __add__

    def __sub__(self, other):
        return PoissonPoly(self.algebra, self.poly - self._check(other))

    def __neg__(self):
        return PoissonPoly(self.algebra, -self.poly)

    def __mul__(self, other):
        return PoissonPoly(self.algebra, self.poly * self._check(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, PoissonPoly):
            return self.poly == other.poly
        return self.poly == other

    __hash__ = None

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def diff(self, name: str) -> "PoissonPoly":
        return PoissonPoly(self.algebra, self.poly.diff(name))

    def __str__(self):
        return str(self.poly)

    def __repr__(self):
        return f"PoissonPoly({str(self.poly)!r})"


def _entries(algebra: LieData):
    # nonzero entries of the symbolic Poisson matrix, cached on the algebra
    cached = getattr(algebra, "_poisson_entries", None)
    if cached is None:
        P = lie_poisson_matrix(algebra)
        names = coordinate_names(algebra)
        cached = [(names[a], names[b], P[a, b])
                  for a in range(P.nrows) for b in range(P.ncols) if P[a, b]]
        algebra._poisson_entries = cached
    return cached


def poisson_bracket(F: PoissonPoly, G: PoissonPoly) -> PoissonPoly:
    """``{F, G} = sum_ab dF/dx_a dG/dx_b {x_a, x_b}``."""
    F._check(G)
    fv, gv = set(F.poly.variables()), set(G.poly.variables())
    out = MultiPoly()
    dF: dict = {}
    dG: dict = {}
    for a, b, pab in _entries(F.algebra):
        if a not in fv or b not in gv:
            continue
        da = dF.get(a)
        if da is None:
            da = dF[a] = F.poly.diff(a)
        db = dG.get(b)
        if db is None:
            db = dG[b] = G.poly.diff(b)
        out = out + da * db * pab
    return PoissonPoly(F.algebra, out)


@dataclass
class InvolutionReport:
    n_functions: int
    pairs_checked: int
    witnesses: list = field(default_factory=list)  # (i, j, bracket string)

    @property
    def ok(self) -> bool:
        return not self.witnesses


def check_involution(funcs) -> InvolutionReport:
    funcs = list(funcs)
    rep = InvolutionReport(len(funcs), 0)
    for i in range(len(funcs)):
        for j in range(i + 1, len(funcs)):
            rep.pairs_checked += 1
            br = poisson_bracket(funcs[i], funcs[j])
            if not br.is_zero():
                rep.witnesses.append((i, j, str(br)))
    return rep


def gradient(F: PoissonPoly) -> list[PoissonPoly]:
    """Partial derivatives in coordinate order (``x1..xk`` then starred)."""
    return [F.diff(n) for n in coordinate_names(F.algebra)]


def jacobian(funcs) -> ExactMatrix:
    funcs = list(funcs)
    names = coordinate_names(funcs[0].algebra)
    return ExactMatrix([[f.poly.diff(n) for n in names] for f in funcs])


def random_points(names, n: int, rng: random.Random, bound: int = 9) -> list[dict]:
    """``n`` random rational points with small numerators and denominators."""
    pts = []
    for _ in range(n):
        pts.append({v: mpq(rng.randint(-bound, bound), rng.randint(1, bound)) for v in names})
    return pts


def jacobian_rank(funcs, points) -> int:
    """Largest rank of the Jacobian over ``points``."""
    J = jacobian(funcs)
    names = coordinate_names(funcs[0].algebra)
    pts = [{n: p.get(n, 0) for n in names} for p in points]
    return exact_rank(J, pts)


def independence_certificate(funcs):
    """A maximal minor of the Jacobian that is not identically zero, or ``None``.

    Returns ``(columns, minor)``; full row rank over the fraction field is
    then witnessed by the nonzero polynomial ``minor``.
    """
    from itertools import combinations

    J = jacobian(funcs)
    rows = list(range(J.nrows))
    if J.symbolic_rank() < J.nrows:
        return None
    for cols in combinations(range(J.ncols), J.nrows):
        m = J.minor(rows, cols)
        if m:
            return cols, m
    return None


# -- Hamiltonian fitting ------------------------------------------------------------

@dataclass(frozen=True)
class HamiltonianAnsatz:
    """Quadratic ``H = sum k_i x_i + l_i x_i^2/2 (+ sum_{j<p} xi_jp x_j x_p)`` on ``x1..xk``."""

    k: int
    cross_terms: bool = True

    def unknowns(self) -> list[str]:
        names = [f"k{i}" for i in range(1, self.k + 1)] + [f"l{i}" for i in range(1, self.k + 1)]
        if self.cross_terms:
            names += [f"xi{j},{p}" for j in range(1, self.k + 1) for p in range(j + 1, self.k + 1)]
        return names

    @property
    def n_unknowns(self) -> int:
        return len(self.unknowns())

    def gradient_rows(self, point) -> list[list]:
        """``grad H(point)`` as rows of coefficients on the unknowns (linear in the unknowns)."""
        unk = {u: i for i, u in enumerate(self.unknowns())}
        rows = []
        for i in range(1, self.k + 1):
            row = [MultiPoly()] * len(unk)
            row[unk[f"k{i}"]] = MultiPoly.const(1)
            row[unk[f"l{i}"]] = MultiPoly.coerce(point[i - 1])
            if self.cross_terms:
                for p in range(1, self.k + 1):
                    if p != i:
                        j, q = min(i, p), max(i, p)
                        row[unk[f"xi{j},{q}"]] = MultiPoly.coerce(point[p - 1])
            rows.append(row)
        return rows

    def build(self, algebra: LieData, values) -> PoissonPoly:
        vals = dict(zip(self.unknowns(), values))
        x = [MultiPoly.var(f"x{i}") for i in range(1, self.k + 1)]
        H = MultiPoly()
        for i in range(1, self.k + 1):
            H = H + x[i - 1] * vals[f"k{i}"] + x[i - 1] * x[i - 1] * (norm(vals[f"l{i}"]) / 2)
        if self.cross_terms:
            for j in range(1, self.k + 1):
                for p in range(j + 1, self.k + 1):
                    H = H + x[j - 1] * x[p - 1] * vals[f"xi{j},{p}"]
        return PoissonPoly(algebra, H)


@dataclass
class HamiltonianFit:
    hamiltonian: PoissonPoly
    solution: tuple
    unknowns: tuple
    n_equations: int
    n_nontrivial_equations: int
    n_unknowns: int
    rank: int


def fit_hamiltonian(beta0, beta_next, ansatz: HamiltonianAnsatz, algebra: LieData = None,
                    details: bool = False):
    """Solve ``grad H(beta0(t)) = beta_next(t)`` for the ansatz coefficients.

    ``beta0`` and ``beta_next`` are vectors of polynomials in ``t``.  Matching
    the coefficients of each power of ``t`` gives an exact linear system; the
    pivot-minimal solution is returned (free unknowns set to zero).
    Raises :class:`InconsistentSystem` when there is no solution.
    """
    beta0 = [MultiPoly.coerce(v) for v in beta0]
    beta_next = [MultiPoly.coerce(v) for v in beta_next]
    if len(beta0) != ansatz.k or len(beta_next) != ansatz.k:
        raise ValueError(f"vectors must have {ansatz.k} components")
    for v in beta0 + beta_next:
        if set(v.variables()) - {"t"}:
            raise ValueError("flow vectors must be polynomials in t only")
    if algebra is None:
        algebra = named_algebra({3: "delta1", 4: "delta2", 5: "delta3"}[ansatz.k])
    rows = ansatz.gradient_rows(beta0)
    top = max([v.degree("t") for v in beta0 + beta_next] + [0])
    A, b = [], []
    nontrivial = 0
    for i, row in enumerate(rows):
        for d in range(top + 1):
            coeffs = [c.coeff("t", d).constant_term() for c in row]
            rhs = beta_next[i].coeff("t", d).constant_term()
            A.append(coeffs)
            b.append(rhs)
            if any(coeffs) or rhs:
                nontrivial += 1
    sol = solve_linear(A, b)
    if not sol.consistent:
        raise InconsistentSystem(
            f"no Hamiltonian of this form: rank {sol.rank} system with {len(A)} equations is inconsistent",
            len(A), ansatz.n_unknowns, sol.rank,
        )
    H = ansatz.build(algebra, sol.solution)
    if not details:
        return H
    return HamiltonianFit(H, sol.solution, tuple(ansatz.unknowns()), len(A), nontrivial,
                          ansatz.n_unknowns, sol.rank)


# -- the published families -----------------------------------------------------------

_FAMILIES = {
    "delta1": [
        "1/2*x1^2 + 1/2*x2^2",
        "1/2*x3^2",
        "1/2*x1s^2",
        "1/2*x2s^2",
        "1/2*x3s^2 + 1/2*x1^2 + 1/2*x2^2",
    ],
    "delta2": [
        "1/2*x1^2 + 1/2*x3^2",
        "1/2*x4^2",
        "1/2*x1s^2",
        "1/2*x2s^2",
        "1/2*x4s^2 + 1/2*x1^2 + 1/2*x3^2",
        "1/2*x2^2 + 1/2*x3s^2 + 1/2*x4s^2 + 1/2*x1^2 + 1/2*x3^2",
    ],
    "delta3": [
        "1/2*x1^2 + 1/2*x4^2",
        "1/2*x5^2",
        "1/2*x1s^2",
        "1/2*x2s^2",
        "1/2*x2^2 + 1/2*x3s^2",
        "1/2*x3^2 + 1/2*x4s^2",
        "1/2*x5s^2",
    ],
}


def paper_family(name: str) -> list[PoissonPoly]:
    """The quadratic functions ``H_1, H_2, ...`` listed for ``delta1``/``delta2``/``delta3``."""
    g = named_algebra(name)
    return [PoissonPoly(g, s) for s in _FAMILIES[name]]
