"""Machine checks for every published claim, one function per acceptance criterion."""

from __future__ import annotations

import random
import time
import traceback
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from gmpy2 import mpq

from . import trees as tr
from .characters import (
    Character,
    InfChar,
    basis_for,
    birkhoff,
    birkhoff_via_inverse,
    convolve,
    inverse,
    is_local,
    tilde_R_inv,
)
from .core.laurent import LaurentElement, Window
from .core.linalg import exact_rank
from .core.poly import MultiPoly
from .core.scalar import format_scalar
from .lax import (
    FlowParams,
    beta_hierarchy,
    conservation_report,
    random_L0,
    solve_lax,
    verify_beta0_equation,
    verify_lax_identity,
)
from .lie import (
    H1_TREES,
    H2_TREES,
    H3_TREES,
    coordinate_names,
    double,
    lie_poisson_matrix,
    named_algebra,
    nilpotency_step,
    truncated_lie_algebra,
)
from .numeric import LaxODE, relative_error, rk4_integrate
from .poisson import (
    HamiltonianAnsatz,
    InconsistentSystem,
    PoissonPoly,
    check_involution,
    fit_hamiltonian,
    gradient,
    independence_certificate,
    jacobian_rank,
    paper_family,
    random_points,
)

__all__ = ["RunConfig", "ClaimResult", "CLAIMS", "CLAIM_IDS", "run_claim", "run_all", "otter_counts",
           "random_character", "generated_flows", "flow_hamiltonian", "numeric_state", "rk4_check"]


@dataclass(frozen=True)
class RunConfig:
    degree_cap: int = 6
    window: tuple | None = None
    seed: int = 0
    n_flows: int = 20
    n_random: int = 100
    p_values: tuple = (0, -1)
    flip_coproduct: bool = False
    timing: bool = False

    def rng(self, tag: str) -> random.Random:
        return random.Random(f"{self.seed}:{tag}")


@dataclass
class ClaimResult:
    claim_id: str
    criterion: int
    status: str
    witness: object = None
    details: dict = field(default_factory=dict)
    timing_ms: float | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self, timing: bool = False) -> dict:
        out = asdict(self)
        if not timing:
            out.pop("timing_ms")
        return out


def _result(cid, n, ok, witness=None, **details) -> ClaimResult:
    return ClaimResult(cid, n, "pass" if ok else "fail", witness if not ok else None, details)


# -- oracles ---------------------------------------------------------------------------

def otter_counts(n: int) -> list[int]:
    """Rooted-tree counts a(1..n) from a(m+1) = (1/m) sum_k (sum_{d|k} d a(d)) a(m-k+1)."""
    a = [0, 1]
    for m in range(1, n):
        total = 0
        for k in range(1, m + 1):
            s = sum(d * a[d] for d in range(1, k + 1) if k % d == 0)
            total += s * a[m - k + 1]
        a.append(total // m)
    return a[1: n + 1]


def random_character(basis, rng: random.Random, window: Window, exps=(-2, 2), density=0.7) -> Character:
    vals = {}
    for t in basis:
        coeffs = {}
        for e in range(exps[0], exps[1] + 1):
            if rng.random() < density:
                coeffs[e] = mpq(rng.randint(-6, 6), rng.randint(1, 4))
        vals[t] = LaurentElement(coeffs, window)
    return Character(basis, vals, window)


# -- shared flows ------------------------------------------------------------------------

@lru_cache(maxsize=8)
def generated_flows(config: RunConfig, include_trivial: bool = False):
    """``[(algebra, p, trajectory)]`` for the configured random initial data."""
    out = []
    ps = tuple(config.p_values) + ((1,) if include_trivial else ())
    for alg in ("g1", "g2", "g3"):
        for p in ps:
            rng = config.rng(f"flow:{alg}:{p}")
            count = config.n_flows if p <= 0 else max(3, config.n_flows // 4)
            for _ in range(count):
                L0 = random_L0(alg, rng)
                params = FlowParams(p, alg, L0, config.window)
                out.append((alg, p, solve_lax(params)))
    return tuple(out)


_K = {"g1": 3, "g2": 4, "g3": 5}


def flow_hamiltonian(alg: str, traj, details=False):
    """Fit the quadratic Hamiltonian of a flow (diagonal ansatz on g1, full on g2/g3)."""
    coeffs = beta_hierarchy(traj)
    k = _K[alg]
    zero = [MultiPoly()] * k
    q = 1 - traj.params.p
    ansatz = HamiltonianAnsatz(k, cross_terms=(alg != "g1"))
    dual = named_algebra("delta" + alg[1:])
    return fit_hamiltonian(coeffs.get(0, zero), coeffs.get(q, zero), ansatz, dual, details=details)


# -- the claims --------------------------------------------------------------------------------

def claim_hopf_axioms(config: RunConfig) -> ClaimResult:
    cap = config.degree_cap
    forests = tr.enumerate_forests(cap)
    pairs = [(a, b) for a in forests for b in forests if a and b and a.degree + b.degree <= cap]
    bad = tr.hopf_axiom_failures(cap, pairs)
    return _result("hopf.axioms", 1, not bad, bad[:10], forests=len(forests), pairs=len(pairs))


def claim_tree_counts(config: RunConfig) -> ClaimResult:
    cap = config.degree_cap
    trees = tr.enumerate_trees(cap)
    counts = [sum(1 for t in trees if t.degree == d) for d in range(1, cap + 1)]
    oracle = otter_counts(cap)
    ordered = trees == sorted(trees, key=tr.RootedTree.sort_key)
    ok = counts == oracle and ordered
    return _result("trees.otter_counts", 2, ok, {"enumerated": counts, "oracle": oracle},
                   counts=counts)


_EXPECTED_TABLES = {
    "g1": ["[X1,X2] = 2*X3"],
    "g2": ["[X1,X2] = 2*X3", "[X1,X3] = 3*X4"],
    "g3": ["[X1,X2] = 2*X3", "[X1,X3] = 3*X4", "[X1,X4] = 4*X5"],
    "delta1": ["[X1,X2] = 2*X3", "[X1,X3s] = -2*X2s", "[X2,X3s] = 2*X1s"],
    "delta2": ["[X1,X2] = 2*X3", "[X1,X3] = 3*X4", "[X1,X3s] = -2*X2s", "[X1,X4s] = -3*X3s",
               "[X2,X3s] = 2*X1s", "[X3,X4s] = 3*X1s"],
    "delta3": ["[X1,X2] = 2*X3", "[X1,X3] = 3*X4", "[X1,X4] = 4*X5", "[X1,X3s] = -2*X2s",
               "[X1,X4s] = -3*X3s", "[X1,X5s] = -4*X4s", "[X2,X3s] = 2*X1s", "[X3,X4s] = 3*X1s",
               "[X4,X5s] = 4*X1s"],
}


def _fresh_algebras():
    # built without the module cache so a flipped coproduct is seen
    g1 = truncated_lie_algebra(H1_TREES, 3)
    g2 = truncated_lie_algebra(H2_TREES, 4)
    g3 = truncated_lie_algebra(H3_TREES, 5)
    return {"g1": g1, "g2": g2, "g3": g3, "delta1": double(g1), "delta2": double(g2), "delta3": double(g3)}


def claim_structure_constants(config: RunConfig) -> ClaimResult:
    if config.flip_coproduct:
        with tr.flipped_coproduct():
            algs = _fresh_algebras()
    else:
        algs = _fresh_algebras()
    mismatches = []
    for name, expected in _EXPECTED_TABLES.items():
        got = algs[name].format_table()
        if got != expected:
            extra = [g for g in got if g not in expected]
            missing = [e for e in expected if e not in got]
            shown = [s.replace("X", "Z") for s in extra] if name.startswith("g") else extra
            mismatches.append({"algebra": name, "computed": shown, "expected_missing": missing})
    d2, d3 = algs["delta2"], algs["delta3"]
    truncation = d2.bracket_coeff(0, 3, 4) == 0 and d3.bracket_coeff(0, 3, 4) == 4
    if not truncation:
        mismatches.append({"truncation": "[X1,X4] should vanish in delta2 and equal 4*X5 in delta3"})
    return _result("g1.structure_constants", 3, not mismatches, mismatches)


def _normal_coords(phi: Character):
    v = lambda t: phi.tree_value(t).coefficient(0).constant_term()  # noqa: E731
    x1, x2, x4 = v(tr.DOT), v(tr.LADDER2), v(tr.CHERRY)
    return (x1, x2 - x1 * x1 / 2, x4 - x1 * x2 + x1 ** 3 / 6)


def claim_group_law(config: RunConfig) -> ClaimResult:
    rng = config.rng("group_law")
    basis = basis_for(trees=H1_TREES)
    w = Window(0, 0)
    bad = []
    for _ in range(config.n_random):
        a = random_character(basis, rng, w, exps=(0, 0), density=1.0)
        b = random_character(basis, rng, w, exps=(0, 0), density=1.0)
        x, y = _normal_coords(a), _normal_coords(b)
        z = _normal_coords(convolve(a, b))
        want = (x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1] - x[1] * y[0])
        if z != want:
            bad.append({"x": [format_scalar(c) for c in x], "y": [format_scalar(c) for c in y],
                        "product": [format_scalar(c) for c in z]})
    return _result("h1.group_law", 4, not bad, bad[:3], pairs=config.n_random)


def claim_nilpotency(config: RunConfig) -> ClaimResult:
    want = {"g1": 2, "delta1": 2, "g2": 3, "delta2": 3, "g3": 4, "delta3": 4}
    got = {n: nilpotency_step(named_algebra(n)) for n in want}
    return _result("lie.nilpotency", 5, got == want, {"computed": got, "expected": want}, steps=got)


def claim_poisson_ranks(config: RunConfig) -> ClaimResult:
    rng = config.rng("poisson_ranks")
    want = {"delta1": 2, "delta2": 4, "delta3": 6}
    got = {}
    for name in want:
        g = named_algebra(name)
        P = lie_poisson_matrix(g)
        pts = random_points(coordinate_names(g), 5, rng)
        got[name] = {"symbolic": P.symbolic_rank(), "points": exact_rank(P, pts)}
    ok = all(v["symbolic"] == want[n] and v["points"] == want[n] for n, v in got.items())
    return _result("poisson.ranks", 6, ok, got, ranks=got)


def _fitted(config, alg):
    hs = []
    for a, p, traj in generated_flows(config):
        if a != alg:
            continue
        try:
            hs.append(flow_hamiltonian(a, traj))
        except InconsistentSystem:
            pass
    return hs


def _generic_quadratic(g, rng):
    k = g.k
    poly = MultiPoly()
    for i in range(1, k + 1):
        xi = MultiPoly.var(f"x{i}")
        poly = poly + xi * mpq(rng.randint(-5, 5), rng.randint(1, 3))
        for j in range(i, k + 1):
            poly = poly + xi * MultiPoly.var(f"x{j}") * mpq(rng.randint(-5, 5), rng.randint(1, 3))
    return PoissonPoly(g, poly)


def _delta1_family(H):
    return [H] + paper_family("delta1")[1:]


def _delta3_family(H):
    f = paper_family("delta3")
    return [H, f[1], f[2], f[3], f[0] + f[4] + f[5] + f[6]]


def claim_involution(config: RunConfig) -> ClaimResult:
    rng = config.rng("involution")
    witnesses = []
    checked = {"delta1": 0, "delta2": 0, "delta3": 0}
    d1, d3 = named_algebra("delta1"), named_algebra("delta3")
    h1 = _fitted(config, "g1") + [_generic_quadratic(d1, rng) for _ in range(3)]
    for H in h1:
        rep = check_involution(_delta1_family(H))
        checked["delta1"] += 1
        if not rep.ok:
            witnesses.append({"family": "delta1", "H": str(H), "brackets": rep.witnesses})
    rep = check_involution(paper_family("delta2"))
    checked["delta2"] += 1
    if not rep.ok:
        witnesses.append({"family": "delta2", "brackets": rep.witnesses})
    h3 = _fitted(config, "g3") + [_generic_quadratic(d3, rng) for _ in range(3)]
    for H in h3:
        rep = check_involution(_delta3_family(H))
        checked["delta3"] += 1
        if not rep.ok:
            witnesses.append({"family": "delta3", "H": str(H), "brackets": rep.witnesses})
    return _result("poisson.involution", 7, not witnesses, witnesses[:5], families_checked=checked)


def claim_independence(config: RunConfig) -> ClaimResult:
    rng = config.rng("independence")
    d1, d3 = named_algebra("delta1"), named_algebra("delta3")
    fits1 = _fitted(config, "g1") or [_generic_quadratic(d1, rng)]
    fits3 = _fitted(config, "g3") or [_generic_quadratic(d3, rng)]
    cases = [("delta1", _delta1_family(H), 5) for H in fits1]
    cases.append(("delta2", paper_family("delta2"), 6))
    cases += [("delta3", _delta3_family(H), 5) for H in fits3]
    bad = []
    ranks = {}
    for name, fam, want in cases:
        pts = random_points(coordinate_names(fam[0].algebra), 5, rng)
        r = jacobian_rank(fam, pts)
        cert = independence_certificate(fam)
        ranks.setdefault(name, set()).add(r)
        if r != want or cert is None:
            bad.append({"family": name, "rank": r, "expected": want, "H": str(fam[0]),
                        "certificate": cert is not None})
    return _result("poisson.independence", 8, not bad, bad[:5],
                   ranks={k: sorted(v) for k, v in ranks.items()})


def numeric_state(z: InfChar, alg: str, window: Window, t=None):
    g = named_algebra(alg)
    lo, hi = window
    A = np.zeros((g.dim, hi - lo + 1))
    for i, tree in enumerate(g.trees):
        for e, c in z.tree_value(tree).coeffs.items():
            val = c.evaluate({"t": t}) if t is not None else c.constant_term()
            A[i, e - lo] = float(val)
    return A


def rk4_check(alg: str, traj, times=None) -> float:
    """Largest relative error between the exact trajectory and RK4 at ``t = 0.1 .. 1.0``."""
    times = times or [mpq(k, 10) for k in range(1, 11)]
    g = named_algebra(alg)
    lo, hi = traj.params.window
    structure = [(a, b, c, v) for (a, b), terms in g.brackets.items() for c, v in terms.items()]
    ode = LaxODE(structure, g.dim, lo, hi, traj.params.p)
    y0 = numeric_state(traj.params.L0, alg, traj.params.window)
    num = rk4_integrate(ode, y0, [float(t) for t in times])
    return max(relative_error(numeric_state(traj.L_of_t, alg, traj.params.window, t), y)
               for t, y in zip(times, num))


def claim_lax_solution(config: RunConfig) -> ClaimResult:
    bad = []
    worst = 0.0
    counts: dict = {}
    for alg, p, traj in generated_flows(config):
        rep = verify_lax_identity(traj)
        err = rk4_check(alg, traj)
        worst = max(worst, err)
        counts[f"{alg}:p={p}"] = counts.get(f"{alg}:p={p}", 0) + 1
        if not rep.ok or not err <= 1e-8:
            bad.append({"algebra": alg, "p": p, "identity": rep.ok, "residuals": rep.residuals[:2],
                        "rk4_relative_error": err})
    # the same initial data on a window widened by 4 must give the same trajectory
    widened_ok = True
    seen = set()
    for alg, p, traj in generated_flows(config):
        if (alg, p) in seen:
            continue
        seen.add((alg, p))
        wide = traj.params.window.enlarged(4)
        again = solve_lax(FlowParams(p, alg, traj.params.L0.rewindow(wide), wide))
        if not again.L_of_t.equals(traj.L_of_t.rewindow(wide)):
            widened_ok = False
            bad.append({"algebra": alg, "p": p, "window_enlargement": "trajectory changed"})
    ok = not bad and all(v >= 20 for v in counts.values())
    return _result("lax.solution", 9, ok, bad[:5], flows=counts, max_rk4_relative_error=worst,
                   window_invariant=widened_ok)


def claim_trivial_regime(config: RunConfig) -> ClaimResult:
    bad = []
    n = 0
    for alg, p, traj in generated_flows(config, include_trivial=True):
        if p != 1:
            continue
        n += 1
        phi = tilde_R_inv(traj.params.L0)
        const_phi = "t" not in traj.phi_t.variables() and traj.phi_t.equals(phi)
        rep = verify_beta0_equation(traj)
        if not const_phi or not rep.ok:
            bad.append({"algebra": alg, "phi_constant": const_phi, "beta0_constant": rep.ok})
    return _result("lax.trivial_regime", 10, not bad and n > 0, bad[:5], flows=n)


def claim_beta0_equation(config: RunConfig) -> ClaimResult:
    bad = []
    n = 0
    for alg, p, traj in generated_flows(config):
        n += 1
        rep = verify_beta0_equation(traj)
        if not rep.ok:
            bad.append({"algebra": alg, "p": p, "details": rep.details, "residuals": rep.residuals[:2]})
    return _result("lax.beta0_equation", 11, not bad and n > 0, bad[:5], flows=n)


def claim_degree_bounds(config: RunConfig) -> ClaimResult:
    bound = {"g1": 1, "g2": 2, "g3": 3}
    top = {"g1": -1, "g2": -1, "g3": -1}
    bad = []
    for alg, p, traj in generated_flows(config):
        b0 = beta_hierarchy(traj).get(0, [])
        d = max((v.degree("t") for v in b0), default=-1)
        top[alg] = max(top[alg], d)
        if d > bound[alg]:
            bad.append({"algebra": alg, "p": p, "degree": d})
    attained = {a: top[a] == bound[a] for a in bound}
    ok = not bad and all(attained.values())
    return _result("lax.degree_bounds", 12, ok, {"exceeding": bad[:5], "max_degree": top},
                   max_degree=top, bound=bound, equality_attained=attained)


def _grad_identity(H: PoissonPoly, traj) -> bool:
    coeffs = beta_hierarchy(traj)
    k = H.algebra.k
    zero = [MultiPoly()] * k
    b0 = coeffs.get(0, zero)
    target = coeffs.get(1 - traj.params.p, zero)
    point = {f"x{i + 1}": v for i, v in enumerate(b0)}
    grad = gradient(H)[:k]
    return [gi.poly.subs(point) for gi in grad] == list(target)


def _degenerate(traj) -> bool:
    # a quadratic gradient along beta0(t) cannot exceed beta0's t-degree
    coeffs = beta_hierarchy(traj)
    b0 = coeffs.get(0, [])
    bn = coeffs.get(1 - traj.params.p, [])
    d0 = max((v.degree("t") for v in b0), default=-1)
    dn = max((v.degree("t") for v in bn), default=-1)
    return dn > max(d0, 0)


def claim_hamiltonian_fit(config: RunConfig) -> ClaimResult:
    stats: dict = {}
    failures = []
    degenerate = []
    for alg, p, traj in generated_flows(config):
        key = f"{alg}:p={p}"
        s = stats.setdefault(key, {"flows": 0, "consistent": 0, "identity": 0, "conserved": 0,
                                   "degenerate": 0, "equations": None, "unknowns": None})
        s["flows"] += 1
        try:
            fit = flow_hamiltonian(alg, traj, details=True)
        except InconsistentSystem as exc:
            s["equations"], s["unknowns"] = exc.n_equations, exc.n_unknowns
            if _degenerate(traj):
                s["degenerate"] += 1
                degenerate.append({"flow": key, "reason": str(exc)})
            else:
                failures.append({"flow": key, "inconsistent": str(exc),
                                 "beta0": [str(v) for v in beta_hierarchy(traj).get(0, [])]})
            continue
        s["equations"], s["unknowns"] = fit.n_equations, fit.n_unknowns
        s["consistent"] += 1
        H = fit.hamiltonian
        if _grad_identity(H, traj):
            s["identity"] += 1
        else:
            failures.append({"flow": key, "gradient_identity": False, "H": str(H)})
        cons = conservation_report(traj, [H])
        if cons.ok:
            s["conserved"] += 1
        else:
            failures.append({"flow": key, "H": str(H), "drift": cons.residuals[0][1]})
    g1_consistent = sum(v["consistent"] for k, v in stats.items() if k.startswith("g1"))
    ok = not failures and g1_consistent >= 20
    return _result("hamiltonian.fit", 13, ok, failures[:6], per_flow_family=stats,
                   degenerate_flows=degenerate[:5])


def claim_birkhoff(config: RunConfig) -> ClaimResult:
    rng = config.rng("birkhoff")
    cap = min(config.degree_cap, 4)
    basis = basis_for(cap)
    window = Window(*config.window) if config.window else Window(-10, 10)
    bad = []
    n_hol = max(1, config.n_random // 5)
    for i in range(config.n_random + n_hol):
        holo = i >= config.n_random
        phi = random_character(basis, rng, window, exps=(0, 2) if holo else (-2, 2))
        pair = birkhoff(phi)
        issues = []
        if not convolve(inverse(pair.neg), pair.pos).equals(phi):
            issues.append("recomposition")
        if any(e >= 0 for v in pair.neg.values.values() for e in v.exponents()):
            issues.append("neg not pure pole")
        if not pair.pos.is_holomorphic():
            issues.append("pos not holomorphic")
        alt = birkhoff_via_inverse(phi)
        if not (alt.neg.equals(pair.neg) and alt.pos.equals(pair.pos)):
            issues.append("second route disagrees")
        if holo and pair.neg.values:
            issues.append("holomorphic input has nontrivial counterterm")
        if issues:
            bad.append({"character": str(phi), "issues": issues})
    return _result("birkhoff.factorization", 14, not bad, bad[:3], random=config.n_random,
                   holomorphic=n_hol, basis_size=len(basis))


def claim_locality(config: RunConfig) -> ClaimResult:
    rng = config.rng("locality")
    basis = basis_for(trees=H3_TREES)
    window = Window(-6, 6)
    bad = []
    n_hol = max(1, config.n_random // 5)
    for _ in range(n_hol):
        phi = random_character(basis, rng, window, exps=(0, 2))
        if not is_local(phi):
            bad.append({"holomorphic": str(phi)})
    n_flows = 0
    for alg, p, traj in generated_flows(config, include_trivial=True):
        n_flows += 1
        if not is_local(traj.phi_t):
            bad.append({"flow": f"{alg}:p={p}", "phi_t": str(traj.phi_t)})
    return _result("characters.locality", 15, not bad, bad[:3], holomorphic=n_hol, flows=n_flows)


CLAIMS = [
    claim_hopf_axioms,
    claim_tree_counts,
    claim_structure_constants,
    claim_group_law,
    claim_nilpotency,
    claim_poisson_ranks,
    claim_involution,
    claim_independence,
    claim_lax_solution,
    claim_trivial_regime,
    claim_beta0_equation,
    claim_degree_bounds,
    claim_hamiltonian_fit,
    claim_birkhoff,
    claim_locality,
]

CLAIM_IDS = [
    "hopf.axioms",
    "trees.otter_counts",
    "g1.structure_constants",
    "h1.group_law",
    "lie.nilpotency",
    "poisson.ranks",
    "poisson.involution",
    "poisson.independence",
    "lax.solution",
    "lax.trivial_regime",
    "lax.beta0_equation",
    "lax.degree_bounds",
    "hamiltonian.fit",
    "birkhoff.factorization",
    "characters.locality",
]


def run_claim(index: int, config: RunConfig) -> ClaimResult:
    """Run one claim; any exception becomes a failed claim carrying the diagnostic."""
    fn = CLAIMS[index]
    start = time.perf_counter()
    try:
        res = fn(config)
    except Exception as exc:  # surfaced in the report, never swallowed silently
        res = ClaimResult(CLAIM_IDS[index], index + 1, "fail",
                          f"{type(exc).__name__}: {exc}",
                          {"traceback": traceback.format_exc(limit=3).splitlines()[-3:]})
    res.timing_ms = round((time.perf_counter() - start) * 1000, 1)
    return res


def _run_indexed(args):
    return run_claim(*args)


def run_all(config: RunConfig, jobs: int = 1) -> list[ClaimResult]:
    idx = list(range(len(CLAIMS)))
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_indexed, [(i, config) for i in idx]))
    return [run_claim(i, config) for i in idx]
