"""Command-line front end: ``cklax verify-all | gen-structure | flow | fit | hopf-dump``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import random
import sys

import numpy as np
from gmpy2 import mpq

from . import trees as tr
from .characters import InfChar
from .claims import CLAIM_IDS, RunConfig, numeric_state, rk4_check, run_all
from .core.laurent import PoleOverflow, Window, WindowMismatch
from .core.scalar import format_scalar
from .lax import (
    FlowParams,
    NotHolomorphicBeta,
    beta_hierarchy,
    random_L0,
    solve_lax,
    trajectory_from_json,
    trajectory_to_json,
)
from .lie import ALGEBRA_NAMES, named_algebra
from .numeric import LaxODE, rk4_integrate
from .poisson import HamiltonianAnsatz, InconsistentSystem, PoissonPoly, fit_hamiltonian

log = logging.getLogger("cklax")

SCHEMA = "1"


class ConfigError(ValueError):
    pass


def _setup_logging():
    level = os.environ.get("CK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n"


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- config --------------------------------------------------------------------------------

_FIELD_TYPES = {
    "degree_cap": int,
    "window": list,
    "seed": int,
    "n_flows": int,
    "n_random": int,
    "p_values": list,
    "flip_coproduct": bool,
    "timing": bool,
}


def _line_of(text: str, key: str) -> int:
    for i, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return i
    return 0


def load_config(path: str) -> dict:
    """Read a JSON run configuration, reporting the line and field of any problem."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1: top level must be an object")
    out = {}
    for key, value in data.items():
        where = f"{path}:{_line_of(text, key)}"
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{where}: unknown field {key!r}")
        want = _FIELD_TYPES[key]
        if want is int and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigError(f"{where}: field {key!r} must be an integer")
        if want is not int and not isinstance(value, want):
            raise ConfigError(f"{where}: field {key!r} must be of type {want.__name__}")
        if key == "window":
            if len(value) != 2 or not all(isinstance(v, int) for v in value) or value[0] > value[1]:
                raise ConfigError(f"{where}: field 'window' must be [lo, hi] with lo <= hi")
            value = tuple(value)
        if key == "p_values":
            if not value or not all(isinstance(v, int) and v <= 0 for v in value):
                raise ConfigError(f"{where}: field 'p_values' must list integers <= 0")
            value = tuple(value)
        if key == "degree_cap" and value < 1:
            raise ConfigError(f"{where}: field 'degree_cap' must be at least 1")
        out[key] = value
    return out


def _config_from_args(args) -> RunConfig:
    fields = load_config(args.config) if args.config else {}
    if args.degree_cap is not None:
        fields["degree_cap"] = args.degree_cap
    if args.window is not None:
        fields["window"] = tuple(args.window)
    if args.seed is not None:
        fields["seed"] = args.seed
    if args.p is not None:
        fields["p_values"] = tuple(args.p)
    if args.flip_coproduct:
        fields["flip_coproduct"] = True
    if args.timing:
        fields["timing"] = True
    return RunConfig(**fields)


# -- subcommands -----------------------------------------------------------------------------

def build_report(config: RunConfig, results) -> dict:
    cfg = dataclasses.asdict(config)
    claims = [r.to_json(timing=config.timing) for r in results]
    passed = sum(r.passed for r in results)
    return {
        "schema": SCHEMA,
        "config": cfg,
        "claims": claims,
        "summary": {"total": len(results), "passed": passed, "failed": len(results) - passed},
    }


def cmd_verify_all(args) -> int:
    config = _config_from_args(args)
    log.info("running %d claims with %s", len(CLAIM_IDS), config)
    results = run_all(config, jobs=args.jobs)
    for r in results:
        line = f"[{'PASS' if r.passed else 'FAIL'}] {r.criterion:2d} {r.claim_id}"
        if not r.passed:
            line += f"  witness: {json.dumps(r.witness, default=str)[:200]}"
        print(line, file=sys.stderr)
    _write(args.out, _dump(build_report(config, results)))
    return 0 if all(r.passed for r in results) else 1


def cmd_gen_structure(args) -> int:
    g = named_algebra(args.algebra)
    if args.json:
        _write(args.out, g.dumps() + "\n")
    else:
        _write(args.out, "\n".join(g.format_table()) + "\n")
    return 0


def _load_L0(args, algebra: str) -> InfChar:
    if args.L0:
        with open(args.L0, encoding="utf-8") as fh:
            z = InfChar.from_json(fh.read())
        if not isinstance(z, InfChar):
            raise ValueError(f"{args.L0}: L0 must be an infinitesimal character")
        return z
    rng = random.Random(f"{args.seed or 0}:cli-flow:{algebra}:{args.p[0]}")
    return random_L0(algebra, rng)


def _trace_rows(traj, hamiltonians, samples: int, t_max):
    g = traj.params.lie
    try:
        b0 = beta_hierarchy(traj).get(0) or []
    except NotHolomorphicBeta:
        b0 = []
    times = [t_max * mpq(i, samples - 1) for i in range(samples)] if samples > 1 else [mpq(0)]
    numeric = _rk4_beta0(traj, times)
    header = ["t"] + [f"beta0_x{i + 1}" for i in range(g.dim)] \
        + [f"H{j + 1}" for j in range(len(hamiltonians))] + [f"rk4_beta0_x{i + 1}" for i in range(g.dim)]
    rows = [header]
    for t, nb in zip(times, numeric):
        vals = [v.subs({"t": t}).constant_term() for v in b0] if b0 else [mpq(0)] * g.dim
        point = {f"x{i + 1}": v for i, v in enumerate(vals)}
        point.update({f"x{i + 1}s": 0 for i in range(g.dim)})
        hs = [H.poly.evaluate(point) for H in hamiltonians]
        rows.append([format_scalar(t)] + [format_scalar(v) for v in vals] + [format_scalar(h) for h in hs]
                    + [f"{x:.12f}" for x in nb])
    return rows


def _rk4_beta0(traj, times):
    # beta~_0 is the lam^-1 coefficient of L(t); integrate the same ODE numerically
    alg = traj.params.algebra
    g = named_algebra(alg)
    lo, hi = traj.params.window
    structure = [(a, b, c, v) for (a, b), terms in g.brackets.items() for c, v in terms.items()]
    ode = LaxODE(structure, g.dim, lo, hi, traj.params.p)
    y0 = numeric_state(traj.params.L0, alg, traj.params.window)
    positive = [float(t) for t in times if t > 0]
    states = rk4_integrate(ode, y0, positive) if positive else []
    out = []
    it = iter(states)
    for t in times:
        y = next(it) if t > 0 else np.asarray(y0)
        out.append([float(y[i, -1 - lo]) for i in range(g.dim)])
    return out


def cmd_flow(args) -> int:
    algebra = args.algebra
    if algebra not in ("g1", "g2", "g3"):
        raise ValueError("flows run on g1, g2 or g3")
    p = args.p[0]
    L0 = _load_L0(args, algebra)
    window = Window(*args.window) if args.window else None
    traj = solve_lax(FlowParams(p, algebra, L0, window))
    data = trajectory_to_json(traj)
    data["constant"] = "t" not in traj.L_of_t.variables()
    emits = [e for e in (args.emit or "").split(",") if e]
    json_out = [e for e in emits if not e.endswith(".csv")]
    csv_out = [e for e in emits if e.endswith(".csv")]
    if not json_out:
        _write(args.out, _dump(data))
    for path in json_out:
        _write(path, _dump(data))
    if csv_out:
        dual = named_algebra("delta" + algebra[1:])
        hams = [PoissonPoly(dual, h) for h in (args.hamiltonian or [])]
        rows = _trace_rows(traj, hams, args.samples, mpq(args.t_max))
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        for path in csv_out:
            _write(path, buf.getvalue())
    if args.check_rk4:
        print(f"rk4 max relative error: {rk4_check(algebra, traj):.3e}", file=sys.stderr)
    return 0


def cmd_fit(args) -> int:
    with open(args.traj, encoding="utf-8") as fh:
        traj = trajectory_from_json(fh.read())
    algebra = args.algebra or traj.params.algebra
    if algebra != traj.params.algebra:
        raise ValueError(f"trajectory lives on {traj.params.algebra}, not {algebra}")
    coeffs = beta_hierarchy(traj)
    k = traj.params.lie.dim
    zero = [0] * k
    ansatz = HamiltonianAnsatz(k, cross_terms=not args.diagonal)
    dual = named_algebra("delta" + algebra[1:])
    fit = fit_hamiltonian(coeffs.get(0, zero), coeffs.get(1 - traj.params.p, zero), ansatz, dual,
                          details=True)
    if args.json:
        _write(args.out, _dump({
            "schema": SCHEMA,
            "hamiltonian": str(fit.hamiltonian),
            "unknowns": dict(zip(fit.unknowns, (format_scalar(v) for v in fit.solution))),
            "equations": fit.n_equations,
            "nontrivial_equations": fit.n_nontrivial_equations,
            "rank": fit.rank,
        }))
    else:
        _write(args.out, str(fit.hamiltonian) + "\n")
    return 0


def cmd_hopf_dump(args) -> int:
    if args.tree:
        chosen = [tr.RootedTree.parse(c) for c in args.tree]
    else:
        chosen = tr.enumerate_trees(args.degree_cap)
    entries = []
    with tr.flipped_coproduct() if args.flip_coproduct else _null():
        for t in chosen:
            cop = tr.coproduct(tr.HopfElement.of(t))
            anti = tr.antipode(tr.HopfElement.of(t))
            entries.append({
                "tree": t.code,
                "degree": t.degree,
                "coproduct": sorted([str(a), str(b), format_scalar(c)] for (a, b), c in cop.terms.items()),
                "antipode": sorted([str(f), format_scalar(c)] for f, c in anti.terms.items()),
            })
    _write(args.out, _dump({"schema": SCHEMA, "trees": entries}))
    return 0


class _null:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


# -- parser -------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cklax", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, algebra_default=None):
        p.add_argument("--degree-cap", type=int, default=None)
        p.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"), default=None)
        p.add_argument("--algebra", choices=ALGEBRA_NAMES, default=algebra_default)
        p.add_argument("--p", type=int, action="append", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output path (default stdout)")

    v = sub.add_parser("verify-all", help="run every acceptance claim and write a JSON report")
    common(v)
    v.add_argument("--config", default=None, help="JSON run configuration")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--timing", action="store_true", help="include per-claim timings (not reproducible)")
    v.add_argument("--flip-coproduct", action="store_true", help="debug: swap the coproduct factors")
    v.set_defaults(func=cmd_verify_all)

    g = sub.add_parser("gen-structure", help="print the bracket table of an algebra")
    common(g, "g1")
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gen_structure)

    f = sub.add_parser("flow", help="solve a Lax flow exactly")
    common(f, "g1")
    f.add_argument("--L0", default=None, help="JSON infinitesimal character (random if omitted)")
    f.add_argument("--emit", default=None, help="comma-separated outputs: traj.json,trace.csv")
    f.add_argument("--hamiltonian", action="append", default=None, help="function to tabulate in the trace")
    f.add_argument("--samples", type=int, default=11)
    f.add_argument("--t-max", default="1")
    f.add_argument("--check-rk4", action="store_true")
    f.set_defaults(func=cmd_flow)

    h = sub.add_parser("fit", help="fit a quadratic Hamiltonian to a stored trajectory")
    common(h)
    h.add_argument("--traj", required=True)
    h.add_argument("--diagonal", action="store_true", help="omit the cross terms")
    h.add_argument("--json", action="store_true")
    h.set_defaults(func=cmd_fit)

    d = sub.add_parser("hopf-dump", help="coproduct and antipode of rooted trees")
    common(d)
    d.add_argument("--tree", action="append", default=None, help="tree code such as [[][]]")
    d.add_argument("--flip-coproduct", action="store_true")
    d.set_defaults(func=cmd_hopf_dump)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    log.debug("command %s", args.command)
    if args.command == "flow" and not args.p:
        args.p = [0]
    if args.command == "hopf-dump" and args.degree_cap is None:
        args.degree_cap = 4
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InconsistentSystem as exc:
        print(f"inconsistent: {exc} ({exc.n_equations} equations, {exc.n_unknowns} unknowns)",
              file=sys.stderr)
        return 3
    except (PoleOverflow, WindowMismatch, NotHolomorphicBeta) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except (ValueError, KeyError, OSError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
