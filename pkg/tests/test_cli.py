from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from rhoharnack.cli import dispatch, resolve_config, build_parser
from rhoharnack.errors import UsageError
from rhoharnack.matrix_io import write_matrix


@pytest.fixture
def mats(tmp_path):
    paths = {}
    for name, M in {
        "t0": [[0, 2], [0, 0]],
        "zero": [[0, 0], [0, 0]],
        "eye": [[1, 0], [0, 1]],
        "j2": [[0, 1], [0, 0]],
        "j2b": [[0, 1], [0.2, 0]],
        "big": [[0, 3], [0, 0]],
        "bad": [[1, 1], [0, 1]],
    }.items():
        p = tmp_path / f"{name}.json"
        write_matrix(np.array(M, dtype=complex), p)
        paths[name] = str(p)
    return paths


def run(argv, capsys, env=None):
    code = dispatch(argv, env or {})
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_radius(mats, capsys):
    code, out = run(["radius", "--rho", "2", "--input", mats["t0"]], capsys)
    assert code == 0 and out["command"] == "radius"
    assert out["result"]["value"] == pytest.approx(1.0, abs=1e-6)
    assert "theorem" in out and out["config"]["grid_points"] == 2048


def test_member_exit_codes(mats, capsys):
    assert run(["member", "--rho", "2", "--input", mats["t0"]], capsys)[0] == 0
    code, out = run(["member", "--rho", "1.5", "--input", mats["t0"]], capsys)
    assert code == 1 and out["result"]["verdict"] == "no"


def test_kernel_with_csv(mats, capsys, tmp_path):
    csv_path = tmp_path / "m.csv"
    code, out = run(["kernel", "--rho", "2", "--input", mats["t0"], "--z", "0.5,0.5", "--csv", str(csv_path),
                     "--grid", "64"], capsys)
    assert code == 0
    K = np.array([[complex(*e) for e in row] for row in out["result"]["value"]])
    assert np.allclose(K, 2 * np.array([[1, 0.5 - 0.5j], [0.5 + 0.5j, 1]]))
    assert len(csv_path.read_text().splitlines()) == 65


def test_gamma_and_nrange(mats, capsys, tmp_path):
    code, out = run(["gamma", "--input", mats["eye"]], capsys)
    assert code == 0 and out["result"]["multiplicities"] == [2]
    code, out = run(["nrange", "--input", mats["eye"], "--angles", "256", "--csv", str(tmp_path / "w.csv")], capsys)
    assert code == 0 and out["result"]["count"] == 1


def test_dominate(mats, capsys):
    code, out = run(["dominate", "--rho", "2", "--t1", mats["t0"], "--t0", mats["zero"], "--grid", "256"], capsys)
    assert code == 0 and out["result"]["c"] == pytest.approx(np.sqrt(2))
    assert "per_sample_max_ratio" not in out["result"]
    code, out = run(["dominate", "--rho", "2", "--t1", mats["zero"], "--t0", mats["t0"], "--samples"], capsys)
    assert code == 1 and out["result"]["cause"] == "KernelLeak"
    assert len(out["result"]["per_sample_max_ratio"]) == 2048


def test_dominate_class_violation(mats, capsys):
    code, out = run(["dominate", "--rho", "2", "--t1", mats["big"], "--t0", mats["zero"]], capsys)
    assert code == 2 and out["error"]["code"] == "ClassViolation"


def test_equiv(mats, capsys):
    code, out = run(["equiv", "--rho", "2", "--t", mats["t0"], "--s", mats["zero"], "--grid", "256"], capsys)
    assert code == 1 and out["result"]["failure_reason"] == "KernelDimMismatch"
    code, out = run(["equiv", "--rho", "1", "--c1", "--t", mats["j2"], "--s", mats["j2b"]], capsys)
    assert code == 0 and out["result"]["equivalent"]
    code, out = run(["equiv", "--rho", "2", "--t", mats["big"], "--s", mats["zero"]], capsys)
    assert code == 2 and out["result"]["failure_reason"] == "ClassViolation"


def test_c1_requires_rho_one(mats, capsys):
    code, out = run(["equiv", "--rho", "2", "--c1", "--t", mats["j2"], "--s", mats["j2b"]], capsys)
    assert code == 64 and out["error"]["code"] == "UsageError"


def test_reproduce(capsys):
    code, out = run(["reproduce", "--name", "jordan"], capsys)
    assert code == 0 and out["result"]["passed"]


def test_domain_errors(mats, capsys, tmp_path):
    code, out = run(["gamma", "--input", mats["bad"]], capsys)
    assert code == 2 and out["error"]["code"] == "DefectiveUnimodularEigenvalue"
    code, out = run(["kernel", "--rho", "0.5", "--input", mats["t0"]], capsys)
    assert code == 2 and out["error"]["code"] == "UnsupportedRho"
    broken = tmp_path / "broken.json"
    broken.write_text('{"dim": 2,\n "entries": [}')
    code, out = run(["gamma", "--input", str(broken)], capsys)
    assert code == 2 and out["error"]["code"] == "ParseError"
    assert out["error"]["details"]["line"] == 2


@pytest.mark.parametrize("argv", [
    ["radius", "--rho", "2"],
    ["bogus"],
    ["radius", "--rho", "2", "--input", "x.json", "--grid", "100"],
    ["radius", "--rho", "2", "--input", "x.json", "--dom-tol", "-1"],
    ["nrange", "--input", "x.json", "--angles", "16"],
])
def test_usage_errors(argv, capsys):
    assert dispatch(argv, {}) == 64


def test_config_precedence():
    ns = build_parser().parse_args(["gamma", "--input", "x", "--grid", "512"])
    cfg = resolve_config(ns, {"RHOHARNACK_GRID": "128", "RHOHARNACK_DOM_TOL": "1e-5", "RHOHARNACK_CERTIFY": "yes"})
    assert cfg.grid_points == 512 and cfg.dom_tol == 1e-5 and cfg.certify
    ns = build_parser().parse_args(["gamma", "--input", "x"])
    assert resolve_config(ns, {}).grid_points == 2048
    with pytest.raises(UsageError):
        resolve_config(ns, {"RHOHARNACK_GRID": "abc"})


def test_subprocess_entry_point(mats):
    proc = subprocess.run([sys.executable, "-m", "rhoharnack", "member", "--rho", "2", "--input", mats["t0"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["verdict"] == "yes"
    proc = subprocess.run([sys.executable, "-m", "rhoharnack", "gamma", "--input", mats["bad"]],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stderr)["error"]["code"] == "DefectiveUnimodularEigenvalue"


def test_version():
    proc = subprocess.run([sys.executable, "-m", "rhoharnack", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "rhoharnack" in proc.stdout
