import json
import math
import subprocess
import sys

import pytest

from svasym import NonConvergent, cli
from svasym.emit import read_csv


def _run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = cli.run([*argv, "--out", str(out)])
    return code, (read_csv(out) if out.exists() else ([], []))


def test_explosion_threshold_example(tmp_path):
    code, (rows, _) = _run(tmp_path, "explosion-threshold", "--sigma0", "0.2", "--tau", "0.25", "--n", "80", "--q", "2")
    assert code == 0
    assert float(rows[0]["omega_cr"]) == pytest.approx(0.062, abs=0.002)


def test_lyapunov_lognormal_example(tmp_path):
    code, (rows, _) = _run(
        tmp_path, "lyapunov", "--scheme", "log-euler-log-euler", "--rho", "0.3", "--beta", "0", "--q", "0.5"
    )
    assert code == 0 and float(rows[0]["lambda"]) == pytest.approx(-0.01125, rel=1e-12)


def test_lyapunov_infinite_moment_is_an_answer(tmp_path):
    code, (rows, _) = _run(tmp_path, "lyapunov", "--scheme", "log-euler-euler", "--rho", "0.3", "--beta", "1", "--q", "2")
    assert code == 0 and rows[0]["lambda"] == "inf"


def test_lyapunov_from_market_params(tmp_path):
    code, (rows, _) = _run(
        tmp_path, "lyapunov", "--sigma0", "0.2", "--tau", "0.25", "--n", "40", "--omega", "0.05", "--q", "2"
    )
    assert code == 0
    assert float(rows[0]["rho"]) == pytest.approx(0.1) and float(rows[0]["beta"]) == pytest.approx(0.5)
    assert rows[0]["branch"] in ("Stationary", "BoundaryZero", "BoundaryEndpoint")


def test_phase_curve_footer(tmp_path):
    code, (rows, footer) = _run(tmp_path, "phase-curve", "--q", "2", "--rho-grid", "0.05,0.1")
    assert code == 0 and len(rows) == 2
    fields = dict(kv.split("=") for kv in footer[0].split()[1:])
    assert float(fields["rho_c"]) == pytest.approx(0.348, abs=0.01)
    assert float(fields["inv_beta_c"]) == pytest.approx(0.787, abs=0.02)


def test_phase_curve_supercritical_rho_is_config_error(tmp_path):
    code, _ = _run(tmp_path, "phase-curve", "--q", "2", "--rho-grid", "0.5")
    assert code == 2


def test_exact_moments_sweep(tmp_path):
    code, (rows, _) = _run(
        tmp_path, "exact-moments", "--q", "2", "--sigma0", "0.2", "--tau", "0.25", "--n", "40",
        "--omega-grid", "0,0.05", "--asymptotic",
    )
    assert code == 0 and len(rows) == 2
    assert float(rows[0]["sigma_ln"]) == pytest.approx(0.2, rel=0.01)
    assert float(rows[1]["sigma_ln_asymptotic"]) > 0


def test_simulate_and_limits(tmp_path):
    code, (rows, _) = _run(
        tmp_path, "simulate", "--scheme", "euler-euler", "--sigma0", "0.4", "--tau", "0.25", "--n", "20",
        "--omega", "0.05", "--n-paths", "4000", "--seed", "3", "--workers", "2",
    )
    assert code == 0 and [r["estimator"] for r in rows] == ["moment_q1", "lln", "clt"]
    m = rows[0]
    assert abs(float(m["value"]) - 1.0) < 4 * float(m["std_error"])
    code, (rows, _) = _run(tmp_path, "limits", "--rho", "0.1", "--beta", "1", name="l.csv")
    assert code == 0 and float(rows[0]["clt_variance"]) == pytest.approx(0.0103323, rel=1e-5)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sigma0": 0.2, "tau": 0.25, "n": 80, "q": 2}))
    code, (rows, _) = _run(tmp_path, "explosion-threshold", "--config", str(cfg))
    assert code == 0 and rows[0]["n"] == "80"
    code, (rows, _) = _run(tmp_path, "explosion-threshold", "--config", str(cfg), "--n", "40", name="b.csv")
    assert code == 0 and rows[0]["n"] == "40"


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sigma0": 0.2, "tau": 0.25, "n": 80, "bogus": 1}))
    code, _ = _run(tmp_path, "explosion-threshold", "--config", str(cfg))
    assert code == 2 and "bogus" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["reproduce", "fig9"],
        ["reproduce"],
        ["explosion-threshold", "--sigma0", "0.2"],
        ["lyapunov", "--rho", "-1", "--beta", "1"],
        ["nonsense"],
        ["limits", "--rho", "0.1", "--beta", "1", "--variant", "wrong"],
    ],
)
def test_config_errors_exit_2(tmp_path, argv):
    assert cli.run(argv) == 2


def test_nonconvergence_exits_3(monkeypatch, capsys):
    def boom(cfg):
        raise NonConvergent("forced")

    monkeypatch.setitem(cli.COMMANDS, "limits", boom)
    assert cli.run(["limits", "--rho", "0.1", "--beta", "1"]) == 3
    assert "forced" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["reproduce", "fig3"],
        ["lyapunov", "--rho", "0.1", "--beta", "2"],
        ["simulate", "--sigma0", "0.2", "--tau", "0.25", "--n", "10", "--omega", "0.1", "--n-paths", "3000"],
    ],
)
def test_byte_identical_reruns(tmp_path, argv):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.run([*argv, "--out", str(a)]) == 0
    assert cli.run([*argv, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_twelve_significant_digits(tmp_path):
    _, (rows, _) = _run(tmp_path, "lyapunov", "--scheme", "log-euler-log-euler", "--rho", "0.3", "--beta", "1", "--q", "0.5")
    digits = rows[0]["lambda"].lstrip("-").replace(".", "").lstrip("0")
    assert len(digits) <= 12 and math.isfinite(float(rows[0]["lambda"]))


def test_fig3_columns(tmp_path):
    _, (rows, _) = _run(tmp_path, "reproduce", "fig3")
    assert set(rows[0]) == {"panel", "a", "b", "lambda"}
    v = [r for r in rows if r["panel"] == "vs_a" and float(r["a"]) == 0.0]
    assert all(float(r["lambda"]) == 0.0 for r in v)


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "svasym", "limits", "--scheme", "log-euler-euler", "--rho", "0.5", "--beta", "1"],
        capture_output=True, text=True, check=True,
    ).stdout
    assert out.splitlines()[0].startswith("scheme,rho,beta") and ",-0.125," in out


def test_stdout_default(capsys):
    assert cli.run(["limits", "--rho", "0.5", "--beta", "0", "--scheme", "log-euler-log-euler"]) == 0
    assert capsys.readouterr().out.startswith("scheme,")
