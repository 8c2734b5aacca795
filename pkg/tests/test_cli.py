import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from dtoda import cli
from dtoda.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main

TODA = {"case": "I", "N": 1, "kappa": [1, 1], "b": [3, 1]}
CASE2 = {"case": "II", "N": 1, "kappa": [1], "b": [1], "c": [5]}
K1 = {"case": "I", "N": 1, "kappa": [2], "b": [2]}


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def as_complex(x):
    return complex(*x) if isinstance(x, list) else complex(x)


def test_exit_codes_are_distinct():
    assert len({EXIT_OK, EXIT_FAIL, EXIT_CONFIG}) == 3


@pytest.mark.parametrize("model", [TODA, CASE2])
def test_check_passes_and_is_deterministic(tmp_path, model):
    m = write(tmp_path, "m.json", model)
    out1, out2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert main(["check", "--model", m, "--out", out1, "--trials", "3"]) == EXIT_OK
    assert main(["check", "--model", m, "--out", out2, "--trials", "3"]) == EXIT_OK
    assert open(out1).read() == open(out2).read()
    rep = json.load(open(out1))
    assert rep["passed"] is True
    assert {e["status"] for e in rep["checks"]} <= {"pass", "reported", "n/a"}


def test_metric_toda_flat(tmp_path):
    m = write(tmp_path, "m.json", TODA)
    out = str(tmp_path / "g.json")
    assert main(["metric", "--model", m, "--out", out]) == EXIT_OK
    G = np.array([[as_complex(x) for x in row] for row in json.load(open(out))["matrix"]])
    np.testing.assert_allclose(G, [[0, 1], [1, 0]], atol=1e-9)


def test_metric_case2_flat(tmp_path):
    m = write(tmp_path, "m.json", CASE2)
    out = str(tmp_path / "g.json")
    assert main(["metric", "--model", m, "--out", out, "--chart", "flat"]) == EXIT_OK
    rep = json.load(open(out))
    G = np.array([[as_complex(x) for x in row] for row in rep["matrix"]])
    np.testing.assert_allclose(G, [[-1, 1], [1, 0]], atol=1e-9)
    assert rep["labels"] == ["log b1", "qbar0"]


def test_metric_lambda_chart(tmp_path):
    m = write(tmp_path, "m.json", TODA)
    out = str(tmp_path / "g.json")
    assert main(["metric", "--model", m, "--out", out, "--chart", "lambda", "--form", "angle"]) == EXIT_OK
    G = np.array([[as_complex(x) for x in row] for row in json.load(open(out))["matrix"]])
    np.testing.assert_allclose(np.diag(G), [-1, 1] / (2 * np.sqrt(3)), atol=1e-12)


def test_solve_k1_csv(tmp_path):
    m = write(tmp_path, "m.json", K1)
    h = write(tmp_path, "h.json", {})
    out = str(tmp_path / "sol.csv")
    assert main(["solve", "--model", m, "--out", out, "--hodograph", h, "--grid", "s=1.5:2.5:0.25,t1=1"]) == EXIT_OK
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 5
    for r in rows:
        assert float(r["Re_lambda1"]) == pytest.approx(-4 * float(r["s"]), abs=1e-10)


def test_solve_toda_with_solve_for(tmp_path):
    m = write(tmp_path, "m.json", TODA)
    h = write(tmp_path, "h.json", {"a": {"2": 1}, "solve_for": {"point": {"s": 2.0}, "free": ["t1"]}})
    out = str(tmp_path / "sol.csv")
    assert main(["solve", "--model", m, "--out", out, "--hodograph", h, "--grid", "s=2:2.1:0.05,t1=0:0.05:0.05",
                 "--workers", "2"]) == EXIT_OK
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 6
    assert max(float(r["residual"]) for r in rows) < 1e-10


@pytest.mark.parametrize("args_extra, model, hodo", [
    ([], TODA, {"abar": {"1": 1}}),                                   # degenerate hodograph data
])
def test_degenerate_solve_is_configuration_error(tmp_path, args_extra, model, hodo):
    m = write(tmp_path, "m.json", model)
    h = write(tmp_path, "h.json", hodo)
    out = str(tmp_path / "sol.csv")
    assert main(["solve", "--model", m, "--out", out, "--hodograph", h, "--grid", "s=2,t1=0.5"]) == EXIT_CONFIG


@pytest.mark.parametrize("model", [
    '{"case": "I", "N": 1, "kappa": [1, 1], "b": [1, 1]}',
    '{"case": "I", "N": 1, "kappa": [1, 1], "b": [1, 2]',
    '{"case": "III", "N": 1, "kappa": [1], "b": [1]}',
    '{"case": "I", "N": 1, "kappa": [1], "b": [1], "extra": 0}',
])
def test_bad_models_exit_config(tmp_path, model, capsys):
    m = write(tmp_path, "m.json", model)
    assert main(["check", "--model", m, "--out", str(tmp_path / "o.json")]) == EXIT_CONFIG
    assert "m.json" in capsys.readouterr().err


def test_angle_flat_gate(tmp_path, capsys):
    m = write(tmp_path, "m.json", {"case": "I", "N": 1, "kappa": [2, 1], "b": [1, 2]})
    assert main(["metric", "--model", m, "--out", str(tmp_path / "o.json"), "--form", "angle"]) == EXIT_CONFIG
    assert "kappa_i = 1" in capsys.readouterr().err


def test_argument_errors(tmp_path):
    m = write(tmp_path, "m.json", TODA)
    assert main(["check", "--model", m]) == EXIT_CONFIG
    assert main(["check", "--model", m, "--out", str(tmp_path / "o"), "--tol", "-1"]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG


def test_report_statuses():
    rep = cli.Report(1e-6)
    rep.add("a", 1e-8)
    rep.add("b", None)
    rep.add("c", 5.0, asserted=False)
    assert rep.passed
    rep.add("d", 1e-3)
    assert not rep.passed
    assert [e["status"] for e in rep.entries] == ["pass", "n/a", "reported", "fail"]


def test_module_entry_point(tmp_path):
    m = write(tmp_path, "m.json", TODA)
    out = tmp_path / "g.json"
    r = subprocess.run([sys.executable, "-m", "dtoda", "metric", "--model", m, "--out", str(out)])
    assert r.returncode == 0 and out.exists()
