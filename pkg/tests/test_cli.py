import json
import subprocess
import sys

import pytest


def run_cli(*args, env=None):
    return subprocess.run(
        [sys.executable, "-m", "rppa_lab", *args],
        capture_output=True, text=True, env=env)


def test_schedule_silver_output():
    res = run_cli("schedule", "silver", "3")
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[:7] == ["1.414214", "2.000000", "1.414214", "3.414214",
                         "1.414214", "2.000000", "1.414214"]
    assert any(line.startswith("total = ") for line in lines)
    assert any(line.startswith("T_m = ") for line in lines)


def test_schedule_constant_output():
    res = run_cli("schedule", "constant", "1.0", "5")
    assert res.returncode == 0
    assert res.stdout.splitlines()[:5] == ["1.000000"] * 5


def test_schedule_tv_output():
    res = run_cli("schedule", "tv", "2")
    assert res.returncode == 0
    assert res.stdout.splitlines()[:2] == ["1.414214", "1.601232"]


def test_schedule_json_format():
    res = run_cli("schedule", "silver", "2", "--format", "json")
    payload = json.loads(res.stdout)
    assert payload["kind"] == "silver"
    assert len(payload["steps"]) == 3


def test_invalid_schedule_exits_2():
    res = run_cli("schedule", "silver", "0")
    assert res.returncode == 2
    assert "m must be >= 1" in res.stderr


def test_unknown_kind_exits_2():
    res = run_cli("schedule", "golden", "3")
    assert res.returncode == 2


def test_run_worst_right_silver_matches_table():
    res = run_cli("run", "--worst", "fval", "--schedule", "right_silver", "1",
                  "--lambda", "1")
    assert res.returncode == 0
    assert "fval_residual/init_dist_sq = 0.054988" in res.stdout


def test_run_from_minimizer_reports_zero():
    res = run_cli("run", "--instance", "l1", "--schedule", "constant", "1.0", "4",
                  "--x0", "0,0")
    assert res.returncode == 0
    assert "fval_residual = 0.000000" in res.stdout
    assert "subgrad_norm = 0.000000" in res.stdout


def test_run_writes_trace_file(tmp_path):
    path = tmp_path / "trace.jsonl"
    res = run_cli("run", "--instance", "scaled_norm", "--schedule", "silver", "2",
                  "--trace", str(path))
    assert res.returncode == 0
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 4
    assert json.loads(lines[-1])["k"] == 3


def test_run_gd_method():
    res = run_cli("run", "--method", "gd", "--instance", "quadratic",
                  "--schedule", "constant", "1.0", "5", "--format", "json")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert payload["fval_residual"] >= 0.0


def test_run_json_is_strict_even_with_infinite_gap():
    # starting outside the box makes the initial value gap infinite; the
    # JSON output must still parse without the nonstandard Infinity token
    res = run_cli("run", "--instance", "box", "--schedule", "silver", "2",
                  "--x0", "2,0", "--format", "json")
    assert res.returncode == 0

    def reject(_):
        raise ValueError("nonstandard JSON constant")

    payload = json.loads(res.stdout, parse_constant=reject)
    assert payload["init_fval_gap"] == "inf"
    assert payload["subgrad_norm"] == 0.0


def test_run_csv_format_is_report_summary():
    res = run_cli("run", "--instance", "scaled_norm", "--schedule", "constant",
                  "1.0", "3", "--format", "csv")
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[0] == "fval_residual,subgrad_norm,composite,init_dist_sq,init_fval_gap"
    assert len(lines) == 2


def test_run_gd_worst():
    res = run_cli("run", "--method", "gd", "--worst", "gdnorm",
                  "--schedule", "silver", "2", "--format", "json")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert payload["subgrad_norm/init_dist"] == pytest.approx(
        1.0 / (1.0 + 2.0**0.5) ** 2, rel=1e-9)


def test_run_numeric_failure_exits_3():
    res = run_cli("run", "--instance", "quadratic",
                  "--schedule", "constant", "100.0", "400")
    assert res.returncode == 3
    assert "step" in res.stderr


def test_run_instance_json_file(tmp_path):
    spec = {"kind": "scaled_norm", "params": {"eta": 2.0}, "dimension": 2,
            "x_star": [0.0, 0.0], "f_star": 0.0}
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(spec))
    res = run_cli("run", "--instance", str(path), "--schedule", "constant", "1.0", "3",
                  "--format", "json")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert payload["init_fval_gap"] == pytest.approx(2.0)


@pytest.mark.parametrize("suite", ["identities", "schedules", "certificates"])
def test_certify_suites_pass(suite):
    res = run_cli("certify", suite, "--seed", "7")
    assert res.returncode == 0, res.stdout + res.stderr
    lines = [l for l in res.stdout.splitlines() if not l.startswith("#")]
    assert lines and all(l.startswith("PASS") for l in lines)
    assert all("worst=" in l for l in lines)


def test_certify_tightness_passes():
    res = run_cli("certify", "tightness")
    assert res.returncode == 0, res.stdout + res.stderr
    assert "tightness/right_silver_fval" in res.stdout


def test_certify_seed_env_fallback(tmp_path):
    import os
    env = dict(os.environ, RPPA_LAB_SEED="11")
    res = run_cli("certify", "schedules", env=env)
    assert res.returncode == 0
    assert "seed=11" in res.stdout


def test_certify_deterministic_output():
    a = run_cli("certify", "identities", "--seed", "3")
    b = run_cli("certify", "identities", "--seed", "3")
    assert a.stdout == b.stdout
    assert a.returncode == b.returncode == 0


def test_sweep_passes_and_reports():
    res = run_cli("sweep")
    assert res.returncode == 0, res.stderr
    assert "# violations: 0" in res.stdout
    header = res.stdout.splitlines()[0]
    assert header == "instance,schedule,lambda,measure,achieved,bound,ratio"


def test_table4_rows():
    res = run_cli("table", "table4")
    assert res.returncode == 0
    assert "0.054988" in res.stdout
    assert "0.054900" in res.stdout
    assert "external" in res.stdout
    row_m2 = [l for l in res.stdout.splitlines() if l.startswith("2,")][0]
    fields = row_m2.split(",")
    assert fields[3] == "0.028429" and fields[6] == "0.028429"


def test_table1_ppa_row():
    res = run_cli("table", "table1", "--lambda", "1")
    assert res.returncode == 0
    rows = [l for l in res.stdout.splitlines() if l.startswith("constant_1,fval")]
    n9 = [r for r in rows if r.split(",")[2] == "9"][0]
    assert float(n9.split(",")[4]) == pytest.approx(0.025)


def test_table_deterministic():
    a = run_cli("table", "table1")
    b = run_cli("table", "table1")
    assert a.stdout == b.stdout


def test_table_figures_rendered(tmp_path):
    out = tmp_path / "figs"
    res = run_cli("table", "table4", "--figures", str(out))
    assert res.returncode == 0
    assert (out / "right_silver_tightness.png").exists()
    res = run_cli("table", "table1", "--figures", str(out))
    assert (out / "bound_decay.png").exists()


def test_sweep_figures_rendered(tmp_path):
    out = tmp_path / "figs"
    res = run_cli("sweep", "--figures", str(out))
    assert res.returncode == 0
    assert (out / "sweep_margins.png").exists()


def test_out_flag_writes_file(tmp_path):
    path = tmp_path / "table.csv"
    res = run_cli("table", "table4", "--out", str(path))
    assert res.returncode == 0
    assert res.stdout == ""
    assert "0.054988" in path.read_text()
