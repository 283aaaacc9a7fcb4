import json
import re
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest

from gdsym.cli import DEFAULTS, UsageError, load_config, main


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def report(capsys, *argv):
    code, out, _ = run(capsys, "--json", *argv)
    return code, json.loads(out)


def test_verify_commutators(capsys):
    code, rep = report(capsys, "verify", "commutators")
    assert code == 0
    assert rep["summary"] == {"total": 66, "passed": 66, "failed": 0}
    assert rep["suite"] == "commutators"


def test_verify_subalgebra_branches(capsys):
    code, rep = report(capsys, "verify", "subalgebras", "--id", "4.73")
    assert code == 0
    assert {e["subject"].split(":")[0] for e in rep["entries"]} == {"4.73/a≠0", "4.73/a=0,b=1"}


def test_verify_solution_flags(capsys):
    code, rep = report(capsys, "verify", "solution", "--family", "blowup", "--phi", "arg1*arg2", "--f", "arg1^2")
    assert code == 0 and rep["summary"]["failed"] == 0
    code, _, _ = run(capsys, "verify", "solution", "--family", "isochoric", "--gamma", "0")
    assert code == 0


def test_other_suites(capsys):
    for suite in ("jacobi", "reduction"):
        assert run(capsys, "verify", suite)[0] == 0
    code, rep = report(capsys, "--samples", "3", "verify", "automorphisms")
    assert code == 0 and rep["entries"][0]["detail"]["draws"] == 3


def test_simulate_stdout(capsys):
    code, out, err = run(capsys, "simulate", "--family", "blowup", "--label", "1,1,1", "--t0", "0.1", "--t1", "3", "--step", "1e-3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,x,y,z,u,v,w,rho,P,S"
    t = np.array([float(r.split(",")[0]) for r in lines[1:]])
    assert len(t) == 2901 and np.all(np.diff(t) > 0)
    assert "closed-form agreement" in err


def test_simulate_to_file(capsys, tmp_path):
    out = tmp_path / "run.csv"
    code, rep = report(capsys, "simulate", "--family", "isochoric", "--label", "5,-2,1", "--a", "4/5", "--b", "3/5",
                       "--rho0", "1", "--gamma", "1", "--phi", "arg1 + arg2", "--t0", "0", "--t1", "-3", "--step", "0.01",
                       "--out", str(out))
    assert code == 0 and out.exists()
    assert rep["entries"][0]["detail"]["rows"] == 301
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    np.testing.assert_allclose(rows[-1, 1:4], [8, -4.25, 1 - 5 / 8 * 9], atol=1e-9)


def test_figure(capsys, tmp_path):
    code, rep = report(capsys, "figure", "--id", "2", "--out", str(tmp_path))
    assert code == 0
    assert "fig2_separating_line.csv" in rep["entries"][0]["detail"]["files"]


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["verify"],
    ["--samples", "0", "verify", "jacobi"],
    ["figure", "--id", "9", "--out", "x"],
    ["verify", "subalgebras", "--id", "9.99"],
    ["verify", "subalgebras", "--catalog", "/nonexistent/catalog.json"],
    ["verify", "solution"],
    ["simulate", "--family", "blowup", "--label", "1,1,1", "--t0", "-1", "--t1", "1"],
    ["simulate", "--family", "blowup", "--label", "1,1", "--t0", "1", "--t1", "2"],
    ["simulate", "--family", "isochoric", "--label", "1,1,1", "--a", "0", "--t0", "0", "--t1", "1"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_verification_failure_exit_code(capsys, tmp_path):
    data = json.loads(resources.files("gdsym").joinpath("data/catalog.json").read_text(encoding="utf-8"))
    i = next(k for k, e in enumerate(data) if e["id"] == "4.46")
    data[i]["invariants"][1] = "t*u + P + x"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data), encoding="utf-8")
    code, rep = report(capsys, "verify", "subalgebras", "--catalog", str(bad), "--id", "4.46")
    assert code == 1
    assert rep["summary"]["failed"] == 1
    (fail,) = [e for e in rep["entries"] if e["status"] == "fail"]
    assert fail["verdict"] == "candidate-erratum" and "witness" in fail


def test_load_config(tmp_path):
    assert load_config(None) == DEFAULTS
    p = tmp_path / "c.json"
    p.write_text("{}")
    assert load_config(p) == DEFAULTS
    p.write_text('{"samples": 50}')
    cfg = load_config(p)
    assert cfg["samples"] == 50 and cfg["seed"] == 0 and cfg["tol"] == DEFAULTS["tol"]
    p.write_text('{"samples": 0}')
    with pytest.raises(UsageError, match="/samples"):
        load_config(p)
    p.write_text('{"tol": {"ode": -1}}')
    with pytest.raises(UsageError, match="/tol/ode"):
        load_config(p)
    p.write_text("not json")
    with pytest.raises(UsageError):
        load_config(p)


def test_config_file_drives_run(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"seed": 7, "family": "blowup"}')
    code, rep = report(capsys, "--config", str(p), "verify", "solution")
    assert code == 0 and rep["seed"] == 7 and rep["suite"] == "solution/blowup"


def _strip(text):
    return re.sub(r'"wall_time": [0-9.e+-]+', '"wall_time": 0', text)


def test_reports_deterministic(capsys):
    a = run(capsys, "--json", "--seed", "4", "verify", "subalgebras", "--id", "4.53")[1]
    b = run(capsys, "--json", "--seed", "4", "verify", "subalgebras", "--id", "4.53")[1]
    assert _strip(a) == _strip(b)


def test_table_output(capsys):
    code, out, _ = run(capsys, "verify", "reduction")
    assert code == 0 and out.startswith("reduction: 7/7 passed")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gdsym.cli", "verify", "jacobi"], capture_output=True, text=True)
    assert res.returncode == 0 and "220/220" in res.stdout
