import json
import subprocess
import sys

import pytest

from betacoal.cli import main


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "betacoal.cli", *args],
        capture_output=True,
        text=True,
    )
    return proc


def test_rates_table_m3():
    proc = run_cli("rates", "--alpha", "1.5", "--m", "3")
    assert proc.returncode == 0
    rows = [l for l in proc.stdout.splitlines() if not l.startswith("#")]
    assert rows[0] == "m,l,rate,prob"
    data = {tuple(r.split(",")[:2]): r.split(",")[2:] for r in rows[1:]}
    rate32, prob32 = map(float, data[("3", "2")])
    rate31, prob31 = map(float, data[("3", "1")])
    assert rate32 == pytest.approx(2.25, rel=1e-10)
    assert prob32 == pytest.approx(0.9, rel=1e-10)
    assert rate31 == pytest.approx(0.25, rel=1e-10)
    assert prob31 == pytest.approx(0.1, rel=1e-10)


def test_rates_header_and_json():
    proc = run_cli("rates", "--alpha", "1.5", "--m", "2")
    head = proc.stdout.splitlines()[:3]
    assert head[0].startswith("# betacoal")
    assert "rates" in head[1]
    assert "alpha=1.5" in head[2] and "seed=" in head[2]
    proc = run_cli("rates", "--alpha", "1.5", "--m", "2", "--format", "json")
    doc = json.loads(proc.stdout)
    assert doc["rows"][0]["rate"] == pytest.approx(1.0, rel=1e-10)


def test_simulate_deterministic_bytes():
    a = run_cli("simulate", "--alpha", "1.5", "--n", "2", "--reps", "1", "--seed", "7")
    b = run_cli("simulate", "--alpha", "1.5", "--n", "2", "--reps", "1", "--seed", "7")
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout
    assert "seed=7" in a.stdout


def test_simulate_with_theta_and_outfile(tmp_path):
    out = tmp_path / "sim.csv"
    proc = run_cli(
        "simulate", "--alpha", "1.4", "--n", "50", "--reps", "3",
        "--theta", "2.0", "--out", str(out),
    )
    assert proc.returncode == 0
    lines = out.read_text().splitlines()
    header = [l for l in lines if not l.startswith("#")][0]
    assert header == "replicate,length,tau,sites"
    assert len([l for l in lines if not l.startswith("#")]) == 4


def test_symbolic_alpha_accepted():
    proc = run_cli("simulate", "--alpha", "golden", "--n", "10", "--reps", "1")
    assert proc.returncode == 0
    proc = run_cli("simulate", "--alpha", "sqrt2", "--n", "10", "--reps", "1")
    assert proc.returncode == 0


def test_cpp_window_command():
    proc = run_cli(
        "cpp-window", "--alpha", "1.5", "--a", "5", "--b", "50",
        "--start-n", "500", "--reps", "2", "--format", "json",
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["window"] == [5, 50]
    assert len(doc["atoms"]) == 2
    assert all(5 <= x <= 50 for rep in doc["atoms"] for x in rep)


def test_verify_pass_and_exit_codes():
    proc = run_cli("verify", "rho2-exact")
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["passed"] is True
    assert "PASS" in proc.stderr


def test_usage_errors_exit_2():
    assert run_cli("frobnicate").returncode == 2
    assert run_cli("rates", "--alpha", "2.5", "--m", "3").returncode == 2
    assert run_cli("rates", "--alpha", "1.5").returncode == 2  # missing --m
    assert run_cli("verify", "no-such-experiment").returncode == 2
    assert run_cli("simulate", "--alpha", "1.5", "--n", "5", "--reps", "0").returncode == 2


def test_main_in_process():
    # exercised in-process for coverage of the return-code paths
    assert main(["verify", "rho2-exact", "--out", "/dev/null"]) == 0
    assert main(["bogus"]) == 2
