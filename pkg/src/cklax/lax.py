"""Lax flows on truncated character Lie algebras, solved by Birkhoff factorization.

For ``dL/dt = [L, M]`` with ``M = 1/2 R(f(L))``, ``f(L) = 2 lam^p L`` and
``R = pi_+ - pi_-``, the solution is ``L(t) = Ad(g_-(t)) L0 = Ad(g_+(t)) L0``
where ``exp(-t f(L0)) = g_-(t)^-1 * g_+(t)``.  Nilpotency makes every object
polynomial in ``t``, so ``t`` is kept as an indeterminate and all claims
become polynomial identities.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from gmpy2 import mpq

from .characters import (
    Character,
    InfChar,
    adjoint_action,
    basis_for,
    beta_tilde,
    birkhoff,
    evaluate_at_zero,
    lie_bracket,
    star_exp,
    tilde_R_inv,
)
from .core.laurent import LaurentElement, Window, r_matrix
from .core.poly import MultiPoly
from .lie import LieData, named_algebra, nilpotency_step

__all__ = [
    "FlowParams",
    "FlowTrajectory",
    "NotHolomorphicBeta",
    "auto_window",
    "random_L0",
    "vector_to_infchar",
    "infchar_coefficient",
    "solve_lax",
    "lax_rhs",
    "verify_lax_identity",
    "beta_hierarchy",
    "verify_beta0_equation",
    "conservation_report",
    "gauge_transform",
    "IdentityReport",
    "trajectory_to_json",
    "trajectory_from_json",
]

T = MultiPoly.var("t")


class NotHolomorphicBeta(ValueError):
    pass


def auto_window(algebra: str, p: int, L0_exponents=(-1, 1)) -> Window:
    """Symmetric window wide enough that no intermediate product is truncated."""
    g = named_algebra(algebra)
    top = max(g.degrees)
    lo, hi = L0_exponents
    span_x = max(abs(lo + p), abs(hi + p))
    span_l = max(abs(lo), abs(hi))
    w = top * (span_x + span_l) + 2
    return Window(-w, w)


@dataclass
class FlowParams:
    p: int
    algebra: str
    L0: InfChar
    window: Window = None

    def __post_init__(self):
        if self.algebra not in ("g1", "g2", "g3"):
            raise ValueError(f"flows run on g1, g2 or g3, not {self.algebra!r}")
        if self.window is None:
            exps = [e for v in self.L0.values.values() for e in v.exponents()] or [0]
            self.window = auto_window(self.algebra, self.p, (min(exps), max(exps)))
        self.window = Window(*self.window)
        if self.L0.window != self.window:
            self.L0 = self.L0.rewindow(self.window)

    @property
    def lie(self) -> LieData:
        return named_algebra(self.algebra)


@dataclass
class FlowTrajectory:
    params: FlowParams
    L_of_t: InfChar
    L_plus_route: InfChar
    g_minus: Character
    g_plus: Character
    phi_t: Character
    beta_tilde_coeffs: dict = field(default_factory=dict)

    @property
    def routes_agree(self) -> bool:
        return self.L_of_t.equals(self.L_plus_route)


@dataclass
class IdentityReport:
    name: str
    ok: bool
    residuals: list = field(default_factory=list)
    details: dict = field(default_factory=dict)


def _basis(algebra: str):
    return basis_for(trees=named_algebra(algebra).trees)


def vector_to_infchar(algebra: str, coeffs: dict, window: Window) -> InfChar:
    """``coeffs[exponent] = [c_1..c_k]`` -> infinitesimal character on the algebra's trees."""
    g = named_algebra(algebra)
    vals = {}
    for i, tree in enumerate(g.trees):
        vals[tree] = LaurentElement({e: vec[i] for e, vec in coeffs.items()}, window)
    return InfChar(_basis(algebra), vals, window)


def infchar_coefficient(z: InfChar, algebra: str, exponent: int) -> list:
    """Vector of the ``lam^exponent`` coefficients over ``X1..Xk``."""
    g = named_algebra(algebra)
    return [z.tree_value(t).coefficient(exponent) for t in g.trees]


def random_L0(algebra: str, rng: random.Random, exponents=(-1, 0, 1), bound: int = 5,
              window: Window = None) -> InfChar:
    """Random rational ``L0`` with a simple pole (nonzero integers over small denominators)."""
    g = named_algebra(algebra)

    def coef():
        n = 0
        while n == 0:
            n = rng.randint(-bound, bound)
        return mpq(n, rng.randint(1, 3))

    coeffs = {e: [MultiPoly.const(coef()) for _ in g.trees] for e in exponents}
    if window is None:
        window = Window(-8, 8)
    return vector_to_infchar(algebra, coeffs, window)


def solve_lax(params: FlowParams) -> FlowTrajectory:
    """Closed-form trajectory through the factorization of ``exp(-t * 2 lam^p L0)``."""
    L0 = params.L0
    X = L0.map_values(lambda v: v.shift(params.p) * 2)
    flow = star_exp(X.scale(-T))
    pair = birkhoff(flow)
    L_minus = adjoint_action(pair.neg, L0)
    L_plus = adjoint_action(pair.pos, L0)
    phi_t = tilde_R_inv(L_minus)
    return FlowTrajectory(params, L_minus, L_plus, pair.neg, pair.pos, phi_t)


def lax_rhs(L: InfChar, p: int) -> InfChar:
    """``[L, M]`` with ``M = 1/2 R(2 lam^p L) = R(lam^p L)``."""
    f = L.map_values(lambda v: v.shift(p) * 2)
    M = f.map_values(lambda v: r_matrix(v) / 2)
    return lie_bracket(L, M)


def _diff_t(z):
    return z.map_values(lambda v: v.diff("t"))


def verify_lax_identity(traj: FlowTrajectory, params: FlowParams = None) -> IdentityReport:
    params = params or traj.params
    lhs = _diff_t(traj.L_of_t)
    rhs = lax_rhs(traj.L_of_t, params.p)
    res = []
    for t in lhs.basis:
        d = lhs.tree_value(t) - rhs.tree_value(t)
        if d:
            res.append((t.code, str(d)))
    at_zero = traj.L_of_t.subs({"t": 0})
    ok = not res and at_zero.equals(params.L0) and traj.routes_agree
    return IdentityReport("lax_identity", ok, res, {
        "initial_condition": at_zero.equals(params.L0),
        "g_plus_route_agrees": traj.routes_agree,
    })


def beta_hierarchy(traj: FlowTrajectory) -> dict:
    """Taylor coefficients ``k -> [beta~_k(t) components]`` of ``beta~`` of ``phi_t``."""
    if traj.beta_tilde_coeffs:
        return traj.beta_tilde_coeffs
    beta = beta_tilde(traj.phi_t)
    alg = traj.params.algebra
    if not beta.is_holomorphic():
        raise NotHolomorphicBeta("beta~ of phi_t has poles; the input is not local")
    top = max([e for v in beta.values.values() for e in v.exponents()] or [0])
    out = {k: infchar_coefficient(beta, alg, k) for k in range(0, top + 1)}
    traj.beta_tilde_coeffs = out
    return out


def _zero_vec(k):
    return [MultiPoly() for _ in range(k)]


def _vec(coeffs, k, n):
    return coeffs.get(k) or _zero_vec(n)


def _dt(vec):
    return [v.diff("t") for v in vec]


def verify_beta0_equation(traj: FlowTrajectory, params: FlowParams = None) -> IdentityReport:
    """``d beta~_0/dt = 2 [beta~_0, beta~_{1-p}]`` plus the hierarchy ODE and its consequences."""
    params = params or traj.params
    g = params.lie
    n = g.dim
    p = params.p
    coeffs = beta_hierarchy(traj)
    b = lambda k: _vec(coeffs, k, n)  # noqa: E731
    br = g.bracket_vectors
    q = 1 - p
    details = {}
    residuals = []

    if p >= 1:
        ok = not any(_dt(b(0)))
        details["beta0_constant"] = ok
        if not ok:
            residuals.append(("beta0_constant", [str(v) for v in _dt(b(0))]))
        return IdentityReport("beta0_equation", ok, residuals, details)

    # d beta0 / dt = 2 [beta0, beta_{1-p}]
    lhs = _dt(b(0))
    rhs = [2 * v for v in br(b(0), b(q))]
    main = lhs == rhs
    details["beta0_equation"] = main
    if not main:
        residuals.append(("beta0_equation", [str(x - y) for x, y in zip(lhs, rhs)]))

    # hierarchy: d beta~/dt = -2 [sum_{k>=q} b_k lam^(k-q), sum_{j<=-p} b_j lam^j]
    top = max(coeffs) if coeffs else 0
    hier_ok = True
    for e in range(0, top + 1 - q):
        acc = _zero_vec(n)
        for j in range(0, -p + 1):
            k = e - j + q
            if k < q or k > top:
                continue
            acc = [x - 2 * y for x, y in zip(acc, br(b(k), b(j)))]
        if _dt(b(e)) != acc:
            hier_ok = False
            residuals.append((f"hierarchy[{e}]", [str(x - y) for x, y in zip(_dt(b(e)), acc)]))
    details["hierarchy"] = hier_ok

    # d beta_{1-p}/dt = -2 sum_{k=0}^{-p} [beta_{q+1+k}, beta_{-p-k}]
    acc = _zero_vec(n)
    for k in range(0, -p + 1):
        acc = [x - 2 * y for x, y in zip(acc, br(b(q + 1 + k), b(-p - k)))]
    next_ok = _dt(b(q)) == acc
    details["beta_next_derivative"] = next_ok
    if not next_ok:
        residuals.append(("beta_next_derivative", [str(x - y) for x, y in zip(_dt(b(q)), acc)]))

    # second derivative of beta0 from the product rule
    d2 = _dt(_dt(b(0)))
    inner = br(b(0), b(q))
    expect = [4 * x + 2 * y for x, y in zip(br(inner, b(q)), br(b(0), _dt(b(q))))]
    second_ok = d2 == expect
    details["beta0_second_derivative"] = second_ok
    if not second_ok:
        residuals.append(("beta0_second_derivative", [str(x - y) for x, y in zip(d2, expect)]))

    # nilpotency step bounds the t-degree: step 2 means d^2 beta0/dt^2 = 0, and so on
    step = nilpotency_step(g)
    deg = max((v.degree("t") for v in b(0)), default=-1)
    details["beta0_t_degree"] = deg
    details["nilpotency_step"] = step
    details["degree_bound"] = deg <= step - 1
    ok = main and hier_ok and next_ok and second_ok and deg <= step - 1
    return IdentityReport("beta0_equation", ok, residuals, details)


def conservation_report(traj: FlowTrajectory, hamiltonians) -> IdentityReport:
    """Substitute ``beta~_0(t)`` (starred coordinates zero) into each function; drift must vanish."""
    g = traj.params.lie
    b0 = beta_hierarchy(traj).get(0) or _zero_vec(g.dim)
    point = {f"x{i + 1}": v for i, v in enumerate(b0)}
    point.update({f"x{i + 1}s": MultiPoly() for i in range(g.dim)})
    residuals = []
    values = []
    for idx, H in enumerate(hamiltonians):
        val = H.poly.subs(point)
        values.append(str(val))
        drift = val - val.subs({"t": 0})
        if drift:
            residuals.append((idx, str(drift)))
    return IdentityReport("conservation", not residuals, residuals, {"values": values})


def gauge_transform(traj: FlowTrajectory) -> list:
    """``Ad((phi_t)_+(0)) beta~_0(t)`` as a vector of t-polynomials."""
    alg = traj.params.algebra
    coeffs = beta_hierarchy(traj)
    window = traj.params.window
    b0 = vector_to_infchar(alg, {0: coeffs.get(0) or _zero_vec(named_algebra(alg).dim)}, window)
    pos0 = evaluate_at_zero(birkhoff(traj.phi_t).pos)
    return infchar_coefficient(adjoint_action(pos0, b0), alg, 0)


def trajectory_to_json(traj: FlowTrajectory) -> dict:
    """Parameters, ``L(t)``, ``phi_t`` and the ``beta~`` coefficients as plain JSON."""
    prm = traj.params
    try:
        beta = {str(k): [str(v) for v in vec] for k, vec in sorted(beta_hierarchy(traj).items())}
    except NotHolomorphicBeta:
        beta = None
    return {
        "schema": "1",
        "algebra": prm.algebra,
        "p": prm.p,
        "window": list(prm.window),
        "L0": prm.L0.to_json(),
        "L": traj.L_of_t.to_json(),
        "phi_t": traj.phi_t.to_json(),
        "beta_tilde": beta,
    }


def trajectory_from_json(data) -> FlowTrajectory:
    """Re-solve the flow from the stored parameters and check it against the stored ``L(t)``."""
    if isinstance(data, str):
        data = json.loads(data)
    L0 = InfChar.from_json(data["L0"])
    if not isinstance(L0, InfChar):
        raise ValueError("L0 must be an infinitesimal character")
    params = FlowParams(int(data["p"]), data["algebra"], L0, Window(*data["window"]))
    traj = solve_lax(params)
    if "L" in data and not InfChar.from_json(data["L"]).equals(traj.L_of_t):
        raise ValueError("stored trajectory does not match its own parameters")
    return traj
