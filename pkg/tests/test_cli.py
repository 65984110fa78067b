"""Command-line front end: records, exit codes and byte-stable output."""

import csv
import io
import json
import subprocess
import sys

import pytest

from balking_ps import ModelParams, mean_sojourn, second_moment
from balking_ps.cli import UsageError, main, parse_grid, parse_n, parse_only


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# ---------------------------------------------------------------- parsing helpers


def test_parse_grid():
    assert parse_grid("2") == [2.0]
    assert parse_grid("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("3:3:1") == [3.0]


@pytest.mark.parametrize("text", ["", "a", "1:2", "0:1:0", "1:0:3", "0:nan:3", "1:2:1", "0:1:x"])
def test_parse_grid_rejects(text):
    with pytest.raises(UsageError):
        parse_grid(text)


def test_parse_n_and_only():
    assert parse_n("mix") == "mix"
    assert parse_n("7") == 7
    with pytest.raises(UsageError):
        parse_n("-1")
    with pytest.raises(UsageError):
        parse_n("two")
    assert parse_only("1-3,5,3") == [1, 2, 3, 5]
    with pytest.raises(UsageError):
        parse_only("0-2")


# ---------------------------------------------------------------- commands


def test_density_at_zero(capsys):
    code, out, _ = run_cli(capsys, "density", "--rho", "1", "--n", "0", "--t", "0", "--method", "ode")
    assert code == 0
    (rec,) = rows(out)
    assert float(rec["value"]) == 1.0
    assert rec["method"] == "ode"
    assert out.splitlines()[0] == "rho,n,t,value,method,err_est"


def test_moments_record(capsys):
    code, out, _ = run_cli(capsys, "moments", "--rho", "1", "--n", "4")
    assert code == 0
    (rec,) = rows(out)
    assert float(rec["mean"]) == 3.5
    assert float(rec["second_moment"]) == second_moment(ModelParams(1.0), 4)
    assert float(rec["second_moment"]) == pytest.approx(127 / 6, rel=1e-15)


def test_moments_ode(capsys):
    code, out, _ = run_cli(capsys, "moments", "--rho", "2", "--n", "1", "--method", "ode")
    assert code == 0
    (rec,) = rows(out)
    assert float(rec["mean"]) == pytest.approx(mean_sojourn(ModelParams(2.0), 1), rel=1e-7)


def test_auto_agrees_with_forced_methods(capsys):
    grid = "0.05:3:4"
    _, auto, _ = run_cli(capsys, "density", "--rho", "1", "--n", "3", "--t", grid)
    _, ode, _ = run_cli(capsys, "density", "--rho", "1", "--n", "3", "--t", grid, "--method", "ode")
    _, spec, _ = run_cli(capsys, "density", "--rho", "1", "--n", "3", "--t", grid, "--method", "spectral")
    a, o, s = rows(auto), rows(ode), rows(spec)
    assert [r["method"] for r in a] == ["ode", "spectral", "spectral", "spectral"]
    for ra, ro, rs in zip(a, o, s):
        assert float(ra["value"]) == pytest.approx(float(ro["value"]), abs=1e-8)
        assert float(ra["value"]) == pytest.approx(float(rs["value"]), abs=1e-6)


def test_tail_mix(capsys):
    code, out, _ = run_cli(capsys, "tail", "--rho", "1", "--n", "mix", "--t", "0:2:3")
    assert code == 0
    recs = rows(out)
    assert float(recs[0]["value"]) == pytest.approx(1.0, abs=1e-12)
    assert float(recs[2]["value"]) < float(recs[1]["value"]) < 1.0


def test_transform(capsys):
    code, out, _ = run_cli(capsys, "transform", "--rho", "1", "--n", "3", "--t", "1")
    assert code == 0
    (rec,) = rows(out)
    assert float(rec["theta"]) == 1.0
    assert 0 < float(rec["value"]) < 1


def test_asymptotic_json(capsys):
    code, out, _ = run_cli(capsys, "asymptotic", "--rho", "1", "--n", "200", "--t", "100", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"meta", "records"}
    (rec,) = doc["records"]
    assert rec["regime"] == "fixed-rho case 1"
    assert rec["value"] == pytest.approx(0.00495, rel=1e-12)
    assert rec["coords"]["ratio"] == 2.0
    meta = doc["meta"]
    assert meta["command"] == "asymptotic"
    assert meta["inputs"]["rho"] == 1.0 and meta["inputs"]["n"] == 200
    assert {"balking_ps", "numpy", "scipy", "mpmath"} <= set(meta["versions"])


def test_simulate_records(capsys):
    code, out, _ = run_cli(
        capsys, "simulate", "--rho", "1", "--n", "mix", "--discipline", "ROS", "--reps", "2000", "--seed", "3"
    )
    assert code == 0
    recs = rows(out)
    assert [float(r["t"]) for r in recs] == [1.0, 2.0, 4.0]
    assert all(r["discipline"] == "ROS" and r["seed"] == "3" and r["reps_used"] == "2000" for r in recs)
    assert 0.3 < float(recs[0]["zero_fraction"]) < 0.45


def test_output_file(tmp_path, capsys):
    target = tmp_path / "curve.csv"
    code, out, _ = run_cli(capsys, "density", "--rho", "1", "--n", "0", "--t", "1", "-o", str(target))
    assert code == 0 and out == ""
    data = target.read_bytes()
    assert data.startswith(b"rho,n,t,value,method,err_est\n") and b"\r" not in data


# ---------------------------------------------------------------- exit codes


@pytest.mark.parametrize(
    "argv",
    [
        ["density", "--rho", "-1", "--n", "0", "--t", "1"],
        ["density", "--rho", "1", "--n", "x", "--t", "1"],
        ["density", "--rho", "1", "--n", "0", "--t", "2:1:3"],
        ["density", "--rho", "1", "--n", "0"],
        ["density", "--rho", "1", "--n", "0", "--t", "1", "--method", "simulate"],
        ["asymptotic", "--rho", "1", "--n", "0", "--t", "5"],
        ["asymptotic", "--rho", "1", "--n", "5", "--t", "0"],
        ["moments", "--rho", "1", "--n", "mix"],
        ["simulate", "--rho", "1", "--n", "0", "--reps", "0"],
        ["transform", "--rho", "1", "--n", "0", "--t", "-0.9"],
        ["frobnicate"],
        ["density", "--rho"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2
    assert err


def test_numeric_failure_exits_3(capsys, monkeypatch):
    # a horizon shorter than typical sojourns is a numerical failure, not a usage error
    from balking_ps import cli

    original = cli.SimConfig
    monkeypatch.setattr(cli, "SimConfig", lambda *a, **k: original(*a, horizon=1.0, **k))
    code, _, err = run_cli(capsys, "simulate", "--rho", "1", "--n", "5", "--reps", "1000")
    assert code == 3
    assert "numerical failure" in err


def test_validate_exit_code_reflects_failures(capsys):
    code, out, _ = run_cli(capsys, "validate", "--only", "2")
    assert code == 0 and out.startswith("[PASS] criterion  2")
    code, out, _ = run_cli(capsys, "validate", "--only", "4")
    assert code == 1 and out.startswith("[FAIL] criterion  4")
    assert out.rstrip().endswith("0/1 criteria passed")


# ---------------------------------------------------------------- byte stability


def test_csv_is_byte_identical_across_processes():
    cmd = [sys.executable, "-m", "balking_ps.cli", "density", "--rho", "1.5", "--n", "2", "--t", "0:4:9"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.count(b"\n") == 10


def test_floats_round_trip(capsys):
    _, out, _ = run_cli(capsys, "density", "--rho", "1", "--n", "0", "--t", "1", "--method", "spectral")
    (rec,) = rows(out)
    from balking_ps import spectral_density

    assert float(rec["value"]) == spectral_density(ModelParams(1.0), 0, 1.0).value
