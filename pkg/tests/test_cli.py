import ast
import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from cklax.claims import CLAIM_IDS, CLAIMS, RunConfig, run_claim
from cklax.cli import main
from cklax.core import MultiPoly
from cklax.lie import LieData, named_algebra
from cklax.poisson import PoissonPoly, gradient


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_structure_delta1_table(capsys):
    code, out, _ = _run(capsys, "gen-structure", "--algebra", "delta1")
    assert code == 0
    assert out.splitlines() == ["[X1,X2] = 2*X3", "[X1,X3s] = -2*X2s", "[X2,X3s] = 2*X1s"]


def test_gen_structure_json(capsys, tmp_path):
    path = tmp_path / "d2.json"
    assert _run(capsys, "gen-structure", "--algebra", "delta2", "--json", "--out", str(path))[0] == 0
    assert LieData.from_json(path.read_text()) == named_algebra("delta2")


def test_flow_trivial_regime_is_constant(capsys):
    code, out, _ = _run(capsys, "flow", "--algebra", "g1", "--p", "1")
    data = json.loads(out)
    assert code == 0 and data["constant"] is True
    assert all(v == "0" or "t" not in v for vec in data["beta_tilde"].values() for v in vec)


def test_flow_then_fit_round_trip(capsys, tmp_path):
    traj, trace = tmp_path / "traj.json", tmp_path / "trace.csv"
    code, _, _ = _run(capsys, "flow", "--algebra", "g1", "--p", "0", "--seed", "5",
                      "--emit", f"{traj},{trace}", "--hamiltonian", "1/2*x1^2 + 1/2*x2^2")
    assert code == 0
    code, out, _ = _run(capsys, "fit", "--algebra", "g1", "--traj", str(traj))
    assert code == 0
    H = PoissonPoly(named_algebra("delta1"), out.strip())
    data = json.loads(traj.read_text())
    point = {f"x{i + 1}": MultiPoly.parse(v) for i, v in enumerate(data["beta_tilde"]["0"])}
    grad = [str(g.poly.subs(point)) for g in gradient(H)[:3]]
    assert grad == data["beta_tilde"]["1"]

    rows = list(csv.reader(trace.read_text().splitlines()))
    assert rows[0][:4] == ["t", "beta0_x1", "beta0_x2", "beta0_x3"]
    assert rows[0][4] == "H1" and rows[0][-1] == "rk4_beta0_x3"
    for row in rows[1:]:
        exact, numeric = row[1:4], row[5:8]
        assert all("." not in v for v in exact + [row[0], row[4]])
        assert all(len(v.split(".")[1]) == 12 for v in numeric)
        for e, n in zip(exact, numeric):
            num, _, den = e.partition("/")
            assert abs(int(num) / int(den or 1) - float(n)) < 1e-9


def test_fit_inconsistent_exit_code(capsys, tmp_path):
    traj = tmp_path / "traj.json"
    _run(capsys, "flow", "--algebra", "g2", "--p", "0", "--seed", "3", "--emit", str(traj))
    code, _, err = _run(capsys, "fit", "--traj", str(traj))
    assert code == 3
    assert "12 equations" in err


def test_flow_window_too_small(capsys):
    code, _, err = _run(capsys, "flow", "--algebra", "g2", "--window", "-2", "2")
    assert code == 4 and "PoleOverflow" in err


def test_hopf_dump(capsys):
    code, out, _ = _run(capsys, "hopf-dump", "--tree", "[[][]]")
    entry = json.loads(out)["trees"][0]
    assert code == 0 and entry["degree"] == 3
    assert ["[]", "[[]]", "2"] in entry["coproduct"]
    assert ["[],[],[]", "-1"] in entry["antipode"]
    _, out, _ = _run(capsys, "hopf-dump", "--tree", "[[][]]", "--flip-coproduct")
    assert ["[[]]", "[]", "2"] in json.loads(out)["trees"][0]["coproduct"]


def test_config_errors_name_line_and_field(capsys, tmp_path):
    bad = tmp_path / "c.json"
    bad.write_text('{\n  "seed": 1,\n  "bogus": 2\n}')
    code, _, err = _run(capsys, "verify-all", "--config", str(bad))
    assert code == 2 and f"{bad}:3: unknown field 'bogus'" in err
    bad.write_text('{\n  "seed": "x"\n}')
    code, _, err = _run(capsys, "verify-all", "--config", str(bad))
    assert code == 2 and ":2:" in err and "'seed'" in err
    bad.write_text('{\n  "seed": 1\n  "n_flows": 2}')
    code, _, err = _run(capsys, "verify-all", "--config", str(bad))
    assert code == 2 and ":3:" in err


def test_ck_log_controls_verbosity():
    env = dict(os.environ, CK_LOG="DEBUG")
    proc = subprocess.run([sys.executable, "-m", "cklax.cli", "gen-structure", "--algebra", "g1"],
                          capture_output=True, text=True, env=env, check=True)
    assert "command gen-structure" in proc.stderr
    env["CK_LOG"] = "WARNING"
    proc = subprocess.run([sys.executable, "-m", "cklax.cli", "gen-structure", "--algebra", "g1"],
                          capture_output=True, text=True, env=env, check=True)
    assert proc.stderr == ""


# -- reports ---------------------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def report_pair(tmp_path_factory):
    d = tmp_path_factory.mktemp("reports")
    codes = []
    for name in ("a.json", "b.json"):
        codes.append(main(["verify-all", "--out", str(d / name)]))
    return codes, (d / "a.json").read_bytes(), (d / "b.json").read_bytes()


def test_reports_are_byte_identical(report_pair):
    _, a, b = report_pair
    assert a == b


def test_report_claims_close_over_the_criteria(report_pair):
    codes, a, _ = report_pair
    report = json.loads(a)
    assert report["schema"] == "1"
    ids = [c["claim_id"] for c in report["claims"]]
    assert ids == CLAIM_IDS and len(set(ids)) == 15
    assert [c["criterion"] for c in report["claims"]] == list(range(1, 16))
    assert len(CLAIMS) == 15
    assert all("timing_ms" not in c for c in report["claims"])
    # exit status follows the summary
    assert codes[0] == (0 if report["summary"]["failed"] == 0 else 1)
    # every criterion has exactly one acceptance test
    tree = ast.parse((Path(__file__).parent / "test_acceptance.py").read_text())
    names = [n.name for n in tree.body if isinstance(n, ast.FunctionDef) and n.name.startswith("test_criterion_")]
    assert sorted(int(n.split("_")[2]) for n in names) == list(range(1, 16))


def test_flipped_coproduct_is_caught():
    res = run_claim(2, RunConfig(flip_coproduct=True))
    assert res.claim_id == "g1.structure_constants" and res.status == "fail"
    assert res.witness[0]["algebra"] == "g1"
    assert res.witness[0]["computed"] == ["[Z1,Z2] = -2*Z3"]


def test_small_window_surfaces_pole_overflow():
    res = run_claim(8, RunConfig(window=(-2, 2), n_flows=2))
    assert res.status == "fail" and res.witness.startswith("PoleOverflow")


def test_timing_only_on_request(capsys, tmp_path):
    out = tmp_path / "r.json"
    main(["verify-all", "--timing", "--config", str(_tiny_config(tmp_path)), "--out", str(out)])
    claims = json.loads(out.read_text())["claims"]
    assert all(isinstance(c["timing_ms"], float) for c in claims)


def _tiny_config(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps({"degree_cap": 4, "n_flows": 2, "n_random": 5, "seed": 9}))
    return path
