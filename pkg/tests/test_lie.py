import pytest
from gmpy2 import mpq

from cklax.characters import NotClosed
from cklax.core import MultiPoly
from cklax.lie import (
    ALGEBRA_NAMES,
    H1_TREES,
    H2_TREES,
    H3_TREES,
    LieData,
    NotNilpotent,
    ad_matrix,
    coordinate_names,
    double,
    lie_poisson_matrix,
    named_algebra,
    nilpotency_step,
    truncated_lie_algebra,
)
from cklax.trees import LADDER3, Forest, tree_coproduct


def _oracle_brackets(trees, k):
    # [Z_a, Z_b](T) = n(a, b; T) - n(b, a; T), n = multiplicity of a (x) b in the coproduct of T
    span = [t for t in trees if t.degree <= k]
    out = {}
    for i, a in enumerate(span):
        for j, b in enumerate(span):
            if i >= j or a.degree + b.degree > k:
                continue
            terms = {}
            for c, T in enumerate(span):
                cop = tree_coproduct(T)
                v = cop.get((Forest([a]), Forest([b])), 0) - cop.get((Forest([b]), Forest([a])), 0)
                if v:
                    terms[c] = mpq(v)
            if terms:
                out[(i, j)] = terms
    return out


@pytest.mark.parametrize("trees,k,name", [(H1_TREES, 3, "g1"), (H2_TREES, 4, "g2"), (H3_TREES, 5, "g3")])
def test_structure_constants_match_coproduct_oracle(trees, k, name):
    g = named_algebra(name)
    got = {(a, b): terms for (a, b), terms in g.brackets.items() if a < b}
    assert got == _oracle_brackets(trees, k)


def test_published_tables():
    assert named_algebra("g1").format_table() == ["[X1,X2] = 2*X3"]
    assert named_algebra("g3").format_table() == ["[X1,X2] = 2*X3", "[X1,X3] = 3*X4", "[X1,X4] = 4*X5"]
    assert named_algebra("delta1").format_table() == [
        "[X1,X2] = 2*X3",
        "[X1,X3s] = -2*X2s",
        "[X2,X3s] = 2*X1s",
    ]
    d2 = named_algebra("delta2")
    assert d2.bracket_coeff(0, 3, 4) == 0
    assert named_algebra("delta3").bracket_coeff(0, 3, 4) == 4


@pytest.mark.parametrize("name", ALGEBRA_NAMES)
def test_jacobi_and_antisymmetry(name):
    g = named_algebra(name)
    assert g.check_antisymmetry()
    assert g.jacobi_violations() == []


@pytest.mark.parametrize("name", ["g1", "g2", "g3"])
def test_coadjoint_action_preserves_pairing(name):
    # <[X_a, xi_b], X_c> = -<xi_b, [X_a, X_c]>
    g = named_algebra(name)
    d = double(g)
    k = g.dim
    for a in range(k):
        for b in range(k):
            for c in range(k):
                assert d.bracket_coeff(a, k + b, k + c) == -g.bracket_coeff(a, c, b)
    # the dual block is abelian
    for a in range(k, 2 * k):
        for b in range(k, 2 * k):
            assert not d.brackets.get((a, b))


def test_nilpotency_steps():
    steps = {n: nilpotency_step(named_algebra(n)) for n in ALGEBRA_NAMES}
    assert steps == {"g1": 2, "g2": 3, "g3": 4, "delta1": 2, "delta2": 3, "delta3": 4}


def test_non_nilpotent_algebra_is_rejected():
    # sl2-like brackets never terminate
    g = LieData(["H", "E", "F"], [0, 0, 0], {(0, 1): {1: 2}, (0, 2): {2: -2}, (1, 2): {0: 1}})
    with pytest.raises(NotNilpotent):
        nilpotency_step(g)


def test_truncation_drops_high_degree_brackets():
    g = truncated_lie_algebra(H2_TREES, 3)
    assert g.dim == 3
    assert g.format_table() == ["[X1,X2] = 2*X3"]
    with pytest.raises(NotClosed):
        truncated_lie_algebra([LADDER3], 3)


@pytest.mark.parametrize("name", ALGEBRA_NAMES)
def test_json_round_trip(name):
    g = named_algebra(name)
    back = LieData.from_json(g.dumps())
    assert back == g
    assert back.k == g.k


def test_unknown_algebra():
    with pytest.raises(KeyError):
        named_algebra("delta9")


def test_ad_matrix_columns_are_brackets():
    g = named_algebra("delta2")
    x = [mpq(i + 1, 2) for i in range(g.dim)]
    A = ad_matrix(g, x)
    for j in range(g.dim):
        e = [mpq(int(i == j)) for i in range(g.dim)]
        col = [A[i, j].constant_term() for i in range(g.dim)]
        assert col == g.bracket_vectors(x, e)


@pytest.mark.parametrize("name", ["delta1", "delta2", "delta3"])
def test_poisson_matrix_antisymmetric_and_linear(name):
    g = named_algebra(name)
    P = lie_poisson_matrix(g)
    assert P.is_antisymmetric()
    names = coordinate_names(g)
    for a in range(g.dim):
        for b in range(g.dim):
            assert P[a, b].degree() <= 1
            assert set(P[a, b].variables()) <= set(names)


def test_delta1_poisson_entries():
    # X_c pairs with the starred coordinate x_cs and vice versa
    P = lie_poisson_matrix(named_algebra("delta1"))
    assert P[0, 1] == MultiPoly.var("x3s") * 2
    assert P[0, 5] == MultiPoly.var("x2") * -2
    assert P[1, 5] == MultiPoly.var("x1") * 2
