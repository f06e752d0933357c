import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from cklax.core import MultiPoly
from cklax.lie import coordinate_names, named_algebra
from cklax.poisson import (
    AlgebraMismatch,
    HamiltonianAnsatz,
    InconsistentSystem,
    PoissonPoly,
    check_involution,
    fit_hamiltonian,
    gradient,
    independence_certificate,
    jacobian_rank,
    paper_family,
    poisson_bracket,
    random_points,
)

D1 = named_algebra("delta1")
D2 = named_algebra("delta2")


@st.composite
def functions(draw, g=D2, max_terms=3):
    names = coordinate_names(g)
    p = MultiPoly()
    for _ in range(draw(st.integers(1, max_terms))):
        mono = MultiPoly.const(mpq(draw(st.integers(-5, 5)), draw(st.integers(1, 3))))
        for _ in range(draw(st.integers(0, 2))):
            mono = mono * MultiPoly.var(draw(st.sampled_from(names)))
        p = p + mono
    return PoissonPoly(g, p)


def _jacobiator(f, g, h):
    pb = poisson_bracket
    return pb(f, pb(g, h)) + pb(g, pb(h, f)) + pb(h, pb(f, g))


@settings(max_examples=30, deadline=None)
@given(functions(), functions(), functions())
def test_bracket_antisymmetry_and_leibniz(f, g, h):
    pb = poisson_bracket
    assert (pb(f, g) + pb(g, f)).is_zero()
    assert pb(f, g * h) == pb(f, g) * h + g * pb(f, h)


@settings(max_examples=30, deadline=None)
@given(functions(D1), functions(D1), functions(D1))
def test_jacobi_on_delta1(f, g, h):
    assert _jacobiator(f, g, h).is_zero()


def test_printed_tables_break_jacobi_beyond_delta1():
    # the star-swapped tables on delta2 are not a Poisson structure; this pins the witness
    x2, x3, x3s = (PoissonPoly(D2, v) for v in ("x2", "x3", "x3s"))
    assert _jacobiator(x2, x3, x3s) == PoissonPoly(D2, "6*x4s")


def test_coordinate_brackets_are_structure_constants():
    x1, x2 = PoissonPoly(D1, "x1"), PoissonPoly(D1, "x2")
    assert poisson_bracket(x1, x2) == PoissonPoly(D1, "2*x3s")
    assert poisson_bracket(PoissonPoly(D1, "x1s"), PoissonPoly(D1, "x2s")).is_zero()


def test_listed_families_are_in_involution():
    for name in ("delta1", "delta2", "delta3"):
        rep = check_involution(paper_family(name))
        assert rep.ok, rep.witnesses
        assert rep.pairs_checked == rep.n_functions * (rep.n_functions - 1) // 2


def test_involution_witness_on_failure():
    rep = check_involution([PoissonPoly(D1, "x1"), PoissonPoly(D1, "x2")])
    assert not rep.ok
    assert rep.witnesses == [(0, 1, "2*x3s")]


def test_jacobian_rank_and_certificate():
    rng = random.Random(4)
    fam = paper_family("delta2")
    assert jacobian_rank(fam, random_points(coordinate_names(D2), 5, rng)) == 6
    cols, minor = independence_certificate(fam)
    assert len(cols) == 6 and minor
    dependent = [PoissonPoly(D1, "x1^2"), PoissonPoly(D1, "2*x1^2 + 1")]
    assert independence_certificate(dependent) is None


def test_gradient_order():
    H = PoissonPoly(D1, "x1*x2 + x3s^2")
    assert [str(g) for g in gradient(H)] == ["x2", "x1", "0", "0", "0", "2*x3s"]


def test_poly_validation():
    with pytest.raises(ValueError):
        PoissonPoly(D1, "x4")
    with pytest.raises(AlgebraMismatch):
        PoissonPoly(D1, "x1") + PoissonPoly(D2, "x1")


def test_ansatz_sizes():
    assert HamiltonianAnsatz(3, cross_terms=False).n_unknowns == 6
    assert HamiltonianAnsatz(4).n_unknowns == 14
    assert HamiltonianAnsatz(5).n_unknowns == 20


def _random_t_vector(rng, k, degree):
    t = MultiPoly.var("t")
    return [sum((t ** d * mpq(rng.randint(-5, 5), rng.randint(1, 3)) for d in range(degree + 1)),
                MultiPoly()) for _ in range(k)]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(3, False, 1), (4, True, 2), (5, True, 3)]))
def test_fit_recovers_a_planted_hamiltonian(seed, case):
    k, cross, degree = case
    rng = random.Random(seed)
    ansatz = HamiltonianAnsatz(k, cross_terms=cross)
    planted = ansatz.build(named_algebra({3: "delta1", 4: "delta2", 5: "delta3"}[k]),
                           [mpq(rng.randint(-4, 4), rng.randint(1, 3)) for _ in ansatz.unknowns()])
    beta0 = _random_t_vector(rng, k, degree)
    point = {f"x{i + 1}": v for i, v in enumerate(beta0)}
    target = [g.poly.subs(point) for g in gradient(planted)[:k]]
    fit = fit_hamiltonian(beta0, target, ansatz, details=True)
    assert [g.poly.subs(point) for g in gradient(fit.hamiltonian)[:k]] == target
    assert fit.n_equations == k * (degree + 1)


def test_fit_reports_inconsistency():
    t = MultiPoly.var("t")
    # a constant beta0 cannot produce a t-dependent gradient
    with pytest.raises(InconsistentSystem) as exc:
        fit_hamiltonian([1, 2, 3], [t, 0, 0], HamiltonianAnsatz(3, cross_terms=False))
    assert exc.value.n_equations == 6 and exc.value.n_unknowns == 6


def test_fit_rejects_bad_shapes():
    with pytest.raises(ValueError):
        fit_hamiltonian([1, 2], [1, 2], HamiltonianAnsatz(3))
    with pytest.raises(ValueError):
        fit_hamiltonian(["x1", 0, 0], [0, 0, 0], HamiltonianAnsatz(3))


def test_polynomial_string_round_trip():
    H = PoissonPoly(D1, "1/2*x1^2 + x3s^2")
    assert PoissonPoly(D1, str(H)) == H
