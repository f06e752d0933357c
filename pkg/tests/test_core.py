import itertools
import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from cklax.core import (
    I,
    DEFAULT_WINDOW,
    ExactMatrix,
    LaurentElement,
    MultiPoly,
    PoleOverflow,
    Scalar,
    Window,
    WindowMismatch,
    exact_rank,
    format_scalar,
    minimal_subtraction,
    parse_scalar,
    r_matrix,
    solve_linear,
)

rationals = st.builds(lambda n, d: mpq(n, d), st.integers(-9, 9), st.integers(1, 5))
scalars = st.one_of(rationals, st.builds(Scalar, rationals, rationals))

VARS = ["x1", "x2", "t"]


@st.composite
def polys(draw, max_terms=4):
    p = MultiPoly()
    for _ in range(draw(st.integers(0, max_terms))):
        mono = MultiPoly.const(draw(scalars))
        for v in VARS:
            mono = mono * MultiPoly.var(v) ** draw(st.integers(0, 2))
        p = p + mono
    return p


@st.composite
def laurents(draw, lo=-2, hi=2, window=DEFAULT_WINDOW):
    return LaurentElement({e: draw(rationals) for e in range(lo, hi + 1) if draw(st.booleans())}, window)


# -- scalars ---------------------------------------------------------------------------------

def test_gaussian_rationals_exact():
    z = Scalar(mpq(1, 2), 3)
    assert z * z.conjugate() == mpq(1, 4) + 9
    assert (z / z) == 1
    assert I * I == -1
    assert format_scalar(mpq(3, 2)) == "3/2"
    assert parse_scalar("-7/3") == mpq(-7, 3)


@given(scalars, scalars, scalars)
def test_scalar_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    if b != 0:
        assert (a / b) * b == a


# -- polynomials ----------------------------------------------------------------------------

@settings(max_examples=60)
@given(polys(), polys(), polys())
def test_poly_ring_axioms(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p - p == MultiPoly()


@settings(max_examples=60)
@given(polys(), polys())
def test_poly_derivation_and_parse(p, q):
    assert (p * q).diff("x1") == p.diff("x1") * q + p * q.diff("x1")
    assert MultiPoly.parse(str(p)) == p


@settings(max_examples=40)
@given(polys(), rationals, rationals)
def test_poly_evaluate_is_a_homomorphism(p, a, b):
    point = {"x1": a, "x2": b, "t": a - b}
    q = p * p + p
    assert q.evaluate(point) == p.evaluate(point) ** 2 + p.evaluate(point)
    assert p.subs(point).constant_term() == p.evaluate(point)


def test_poly_coefficients_in_t():
    p = MultiPoly.parse("3*t^2*x1 - t + 5")
    assert p.degree("t") == 2
    assert p.coeff("t", 2) == MultiPoly.var("x1") * 3
    assert p.coeff("t", 0) == MultiPoly.const(5)


def test_poly_parse_rejects_garbage():
    with pytest.raises(ValueError):
        MultiPoly.parse("x1 + * 2")


# -- Laurent series -----------------------------------------------------------------------------

@settings(max_examples=60)
@given(laurents(), laurents(), laurents())
def test_laurent_ring_axioms_inside_window(a, b, c):
    # exponents stay in [-6, 6], well inside the default window, so nothing is truncated
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@settings(max_examples=60)
@given(laurents(), laurents())
def test_minimal_subtraction_is_rota_baxter(a, b):
    neg = lambda x: minimal_subtraction(x)[0]  # noqa: E731
    assert neg(a) * neg(b) == neg(neg(a) * b + a * neg(b) - a * b)


@settings(max_examples=60)
@given(laurents(), laurents())
def test_r_matrix_modified_yang_baxter(a, b):
    # R = pi_+ - pi_- satisfies R(a)R(b) - R(R(a)b + aR(b)) = -ab
    assert r_matrix(a) * r_matrix(b) - r_matrix(r_matrix(a) * b + a * r_matrix(b)) == -(a * b)


@given(laurents())
def test_projections_split(a):
    neg, pos = minimal_subtraction(a)
    assert neg + pos == a
    assert pos.is_holomorphic()
    assert all(e < 0 for e in neg.exponents())
    assert r_matrix(a) == pos - neg


def test_pole_overflow_and_window_mismatch():
    w = Window(-2, 2)
    a = LaurentElement({-2: 1}, w)
    with pytest.raises(PoleOverflow):
        _ = a * LaurentElement({-1: 1}, w)
    with pytest.raises(PoleOverflow):
        LaurentElement({-3: 1}, w)
    with pytest.raises(WindowMismatch):
        _ = a + LaurentElement({0: 1}, Window(-3, 3))
    # the positive tail is a series truncation, not an error
    assert (LaurentElement({2: 1}, w) * LaurentElement({1: 1}, w)).is_zero()


def test_laurent_json_round_trip():
    a = LaurentElement({-1: mpq(2, 3), 0: MultiPoly.parse("t - 1"), 3: 5})
    assert LaurentElement.from_json(a.to_json(), a.window) == a


# -- linear algebra -------------------------------------------------------------------------------

def _leibniz_det(rows):
    # permutation expansion: independent of the elimination code
    n = len(rows)
    total = MultiPoly()
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = MultiPoly.const(-1 if inv % 2 else 1)
        for i in range(n):
            term = term * MultiPoly.coerce(rows[i][perm[i]])
        total = total + term
    return total


def _random_poly_matrix(rng, n, m):
    names = ["x1", "x2"]
    rows = []
    for _ in range(n):
        row = []
        for _ in range(m):
            p = MultiPoly.const(rng.randint(-3, 3))
            if rng.random() < 0.5:
                p = p + MultiPoly.var(rng.choice(names)) * rng.randint(-2, 2)
            row.append(p)
        rows.append(row)
    return rows


def test_symbolic_determinant_matches_leibniz():
    rng = random.Random(11)
    for n in (1, 2, 3, 4):
        for _ in range(8):
            rows = _random_poly_matrix(rng, n, n)
            assert ExactMatrix(rows).determinant() == _leibniz_det(rows)


def test_hand_computed_determinant():
    x2, s, t = MultiPoly.var("x2"), MultiPoly.var("s"), MultiPoly.var("t")
    m = ExactMatrix([[1, t, 0], [s, t, 1], [1 + s, 2 * t, 1 - x2]])
    assert m.determinant() == _leibniz_det(m.rows)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_rank_invariant_under_row_operations(seed):
    rng = random.Random(seed)
    rows = _random_poly_matrix(rng, 3, 4)
    base = ExactMatrix(rows).symbolic_rank()
    c = mpq(rng.randint(1, 5), rng.randint(1, 3))
    i, j = rng.sample(range(3), 2)
    mixed = [list(r) for r in rows]
    mixed[i] = [a + c * b for a, b in zip(mixed[i], mixed[j])]
    mixed[0], mixed[2] = mixed[2], mixed[0]
    assert ExactMatrix(mixed).symbolic_rank() == base
    assert ExactMatrix(rows).transpose().symbolic_rank() == base


def test_pointwise_rank_never_exceeds_symbolic():
    x1 = MultiPoly.var("x1")
    m = ExactMatrix([[x1, 0], [0, x1]])
    assert m.symbolic_rank() == 2
    assert m.rank_at({"x1": 0}) == 0
    assert exact_rank(m, [{"x1": 0}, {"x1": 3}]) == 2


def test_solve_linear_consistency():
    sol = solve_linear([[1, 1], [2, 2]], [3, 6])
    assert sol.consistent and sol.rank == 1
    x = sol.solution
    assert x[0] + x[1] == 3
    bad = solve_linear([[1, 1], [2, 2]], [3, 7])
    assert not bad.consistent
