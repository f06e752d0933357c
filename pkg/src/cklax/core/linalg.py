"""Exact matrices: rank, determinants and linear solves without rounding."""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .poly import MultiPoly
from .scalar import norm

__all__ = [
    "DimensionMismatch",
    "ExactMatrix",
    "scalar_rank",
    "rref",
    "solve_linear",
    "LinearSolution",
    "exact_rank",
]


class DimensionMismatch(ValueError):
    pass


class ExactMatrix:
    """Dense matrix of :class:`MultiPoly` entries (scalars are promoted)."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows):
        rows = [tuple(MultiPoly.coerce(x) for x in r) for r in rows]
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise DimensionMismatch(f"ragged rows of lengths {sorted(widths)}")
        self.rows = tuple(rows)
        self.nrows = len(rows)
        self.ncols = widths.pop() if widths else 0

    @classmethod
    def zeros(cls, n: int, m: int) -> "ExactMatrix":
        return cls([[0] * m for _ in range(n)])

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, ExactMatrix) and self.rows == other.rows

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other.rows))
        return ExactMatrix(
            [[sum((a * b for a, b in zip(r, c)), MultiPoly()) for c in cols] for r in self.rows]
        )

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(list(zip(*self.rows)) if self.rows else [])

    def variables(self) -> list[str]:
        names = set()
        for r in self.rows:
            for p in r:
                names.update(p.variables())
        return sorted(names)

    def is_antisymmetric(self) -> bool:
        n = self.nrows
        return n == self.ncols and all(
            self.rows[i][j] == -self.rows[j][i] for i in range(n) for j in range(n)
        )

    def evaluate(self, point) -> list[list]:
        """Substitute every variable; returns a list-of-lists of scalars."""
        cache: dict = {}
        out = []
        for r in self.rows:
            row = []
            for p in r:
                if p.is_constant():
                    row.append(p.constant_term())
                    continue
                key = id(p)
                if key not in cache:
                    cache[key] = p.evaluate(point)
                row.append(cache[key])
            out.append(row)
        return out

    def rank_at(self, point) -> int:
        return scalar_rank(self.evaluate(point))

    def symbolic_rank(self) -> int:
        """Rank over the fraction field of the coefficient ring (Bareiss elimination)."""
        return _bareiss(self.rows)[0]

    def determinant(self) -> MultiPoly:
        if self.nrows != self.ncols:
            raise DimensionMismatch(f"determinant of non-square {self.shape} matrix")
        if self.nrows == 0:
            return MultiPoly.const(1)
        rank, det = _bareiss(self.rows)
        return det if rank == self.nrows else MultiPoly()

    def minor(self, rows, cols) -> MultiPoly:
        return ExactMatrix([[self.rows[i][j] for j in cols] for i in rows]).determinant()

    def to_strings(self) -> list[list[str]]:
        return [[str(p) for p in r] for r in self.rows]

    def __str__(self):
        cells = self.to_strings()
        width = max((len(c) for r in cells for c in r), default=1)
        return "\n".join(" ".join(c.rjust(width) for c in r) for r in cells)


def _bareiss(rows):
    """Fraction-free elimination with full pivoting; returns (rank, signed last pivot)."""
    a = [list(r) for r in rows]
    n = len(a)
    m = len(a[0]) if a else 0
    prev = MultiPoly.const(1)
    sign = 1
    rank = 0
    col_order = list(range(m))
    for k in range(min(n, m)):
        pivot = None
        for i in range(k, n):
            for j in range(k, m):
                if a[i][j]:
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            break
        i, j = pivot
        if i != k:
            a[k], a[i] = a[i], a[k]
            sign = -sign
        if j != k:
            for r in a:
                r[k], r[j] = r[j], r[k]
            col_order[k], col_order[j] = col_order[j], col_order[k]
            sign = -sign
        rank += 1
        piv = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, m):
                num = a[i][j] * piv - a[i][k] * a[k][j]
                a[i][j] = num.exact_div(prev) if prev != 1 else num
            a[i][k] = MultiPoly()
        prev = piv
    det = prev if sign > 0 else -prev
    return rank, det


def scalar_rank(rows) -> int:
    return len(rref(rows)[1])


def rref(rows):
    """Reduced row echelon form over the Gaussian rationals.

    Pivots are taken left to right, first nonzero row downward, so the
    output is deterministic.  Returns ``(matrix, pivot_columns)``.
    """
    a = [[norm(x) for x in r] for r in rows]
    n = len(a)
    m = len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(m):
        if r >= n:
            break
        p = next((i for i in range(r, n) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(n):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


@dataclass(frozen=True)
class LinearSolution:
    consistent: bool
    solution: tuple | None
    rank: int
    n_equations: int
    n_unknowns: int
    free_columns: tuple


def solve_linear(a_rows, b) -> LinearSolution:
    """Solve ``A u = b`` exactly; free unknowns are set to zero."""
    n_eq = len(a_rows)
    n_unk = len(a_rows[0]) if a_rows else 0
    if len(b) != n_eq:
        raise DimensionMismatch(f"{n_eq} equations but {len(b)} right-hand sides")
    aug = [list(r) + [bi] for r, bi in zip(a_rows, b)]
    red, pivots = rref(aug)
    if n_unk in pivots:
        return LinearSolution(False, None, len(pivots) - 1, n_eq, n_unk,
                              tuple(c for c in range(n_unk) if c not in pivots))
    sol = [mpq(0)] * n_unk
    for row, c in zip(red, pivots):
        sol[c] = row[-1]
    return LinearSolution(True, tuple(sol), len(pivots), n_eq, n_unk,
                          tuple(c for c in range(n_unk) if c not in pivots))


def exact_rank(m: ExactMatrix, eval_points=()) -> int:
    """Largest rank over the given evaluation points (a lower bound on generic rank).

    A matrix with no variables is ranked directly and needs no points.
    """
    if not m.variables():
        return scalar_rank(m.evaluate({}))
    if not eval_points:
        raise ValueError("polynomial matrix needs at least one evaluation point")
    needed = set(m.variables())
    best = 0
    for pt in eval_points:
        missing = needed - set(pt)
        if missing:
            raise DimensionMismatch(f"evaluation point leaves {sorted(missing)} unassigned")
        best = max(best, m.rank_at(pt))
    return best
