import random

import pytest
from gmpy2 import mpq

from cklax.characters import Character, beta_function, lie_bracket
from cklax.claims import rk4_check
from cklax.core import LaurentElement, PoleOverflow, Window, r_matrix
from cklax.lax import (
    FlowParams,
    auto_window,
    beta_hierarchy,
    conservation_report,
    gauge_transform,
    infchar_coefficient,
    lax_rhs,
    random_L0,
    solve_lax,
    trajectory_from_json,
    trajectory_to_json,
    vector_to_infchar,
    verify_beta0_equation,
    verify_lax_identity,
)
from cklax.lie import named_algebra, nilpotency_step
from cklax.poisson import PoissonPoly

CASES = [(alg, p) for alg in ("g1", "g2", "g3") for p in (0, -1)]


def _flow(alg, p, seed=0):
    L0 = random_L0(alg, random.Random(f"{alg}:{p}:{seed}"))
    return solve_lax(FlowParams(p, alg, L0))


@pytest.mark.parametrize("alg,p", CASES)
def test_closed_form_solves_the_lax_equation(alg, p):
    for seed in range(3):
        traj = _flow(alg, p, seed)
        rep = verify_lax_identity(traj)
        assert rep.ok, rep.residuals
        assert traj.g_minus.subs({"t": 0}).equals(Character.counit(traj.g_minus.basis, traj.params.window))
        assert traj.g_plus.subs({"t": 0}).equals(Character.counit(traj.g_plus.basis, traj.params.window))


@pytest.mark.parametrize("alg", ["g1", "g2", "g3"])
def test_opposite_r_sign_does_not_solve_it(alg):
    # M = -R(lam^p L) would be the 2 pi_- - id convention; the exact trajectory does not satisfy it
    traj = _flow(alg, 0)
    L = traj.L_of_t
    lhs = L.map_values(lambda v: v.diff("t"))
    flipped = lie_bracket(L, L.map_values(lambda v: -r_matrix(v)))
    assert not lhs.equals(flipped)
    assert lhs.equals(lax_rhs(L, 0))


def test_both_printed_forms_of_M_coincide():
    traj = _flow("g2", -1)
    L = traj.L_of_t
    half_of_two = L.map_values(lambda v: r_matrix(v.shift(-1) * 2) / 2)
    direct = L.map_values(lambda v: r_matrix(v.shift(-1)))
    assert half_of_two.equals(direct)


@pytest.mark.parametrize("alg,p", CASES)
def test_t_degree_bounded_by_nilpotency(alg, p):
    traj = _flow(alg, p)
    step = nilpotency_step(named_algebra(alg))
    assert all(v.degree("t") <= step - 1 for v in traj.L_of_t.values.values())


@pytest.mark.parametrize("alg", ["g1", "g2", "g3"])
@pytest.mark.parametrize("p", [1, 2])
def test_trivial_regime(alg, p):
    traj = _flow(alg, p)
    assert "t" not in traj.phi_t.variables()
    assert verify_beta0_equation(traj).ok


@pytest.mark.parametrize("alg,p", CASES)
def test_beta_hierarchy_identities(alg, p):
    traj = _flow(alg, p, seed=7)
    rep = verify_beta0_equation(traj)
    assert rep.ok, rep.residuals
    assert all(rep.details[k] for k in ("beta0_equation", "hierarchy", "beta_next_derivative",
                                        "beta0_second_derivative", "degree_bound"))


def test_beta_tilde_shifts_L_by_one():
    # beta~_k of phi_t is the lam^(k-1) coefficient of L(t)
    traj = _flow("g3", 0, seed=2)
    coeffs = beta_hierarchy(traj)
    for k, vec in coeffs.items():
        assert vec == infchar_coefficient(traj.L_of_t, "g3", k - 1)


def test_holomorphic_start_gives_trivial_beta0():
    L0 = random_L0("g2", random.Random(1), exponents=(0, 1))
    traj = solve_lax(FlowParams(0, "g2", L0))
    assert not any(beta_hierarchy(traj).get(0, []))


@pytest.mark.parametrize("alg,p", CASES)
def test_exact_against_rk4(alg, p):
    assert rk4_check(alg, _flow(alg, p, seed=3)) <= 1e-8


def test_window_enlargement_changes_nothing():
    traj = _flow("g3", -1)
    wide = traj.params.window.enlarged(4)
    again = solve_lax(FlowParams(-1, "g3", traj.params.L0.rewindow(wide), wide))
    assert again.L_of_t.equals(traj.L_of_t.rewindow(wide))


def test_auto_window_and_overflow():
    assert auto_window("g1", 0, (-1, 1)) == Window(-8, 8)
    L0 = random_L0("g2", random.Random(0))
    with pytest.raises(PoleOverflow):
        solve_lax(FlowParams(0, "g2", L0, Window(-2, 2)))
    with pytest.raises(ValueError):
        FlowParams(0, "delta1", L0)


def test_vector_round_trip():
    vec = {-1: [1, 2, 3], 0: [0, mpq(1, 2), 0]}
    z = vector_to_infchar("g1", vec, Window(-4, 4))
    assert [c.constant_term() for c in infchar_coefficient(z, "g1", 0)] == vec[0]


def test_trajectory_json_round_trip():
    traj = _flow("g2", 0)
    data = trajectory_to_json(traj)
    back = trajectory_from_json(data)
    assert back.L_of_t.equals(traj.L_of_t)
    assert data["schema"] == "1"
    data["L"]["values"]["[]"] = [[0, "99"]]
    with pytest.raises(ValueError):
        trajectory_from_json(data)


def test_conservation_report_lists_drift():
    traj = _flow("g1", 0)
    dual = named_algebra("delta1")
    rep = conservation_report(traj, [PoissonPoly(dual, "x1"), PoissonPoly(dual, "x3"), PoissonPoly(dual, "x1s")])
    # x1 is constant along the flow, x3 is not, starred coordinates are zero
    assert [i for i, _ in rep.residuals] == [1]


def test_gauge_transform_matches_beta_function():
    traj = _flow("g1", 0, seed=4)
    expected = infchar_coefficient(beta_function(traj.phi_t), "g1", 0)
    assert gauge_transform(traj) == expected


def test_starting_point_is_recovered():
    traj = _flow("g1", -1)
    assert traj.L_of_t.subs({"t": 0}).equals(traj.params.L0)
    assert isinstance(traj.L_of_t.tree_value(named_algebra("g1").trees[0]), LaurentElement)
