import csv
import io
import json

import pytest

from loqc_grover import cli, corpus
from loqc_grover.gates import P_SCALABLE


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def shipped(name):
    return str(corpus.shipped_directory() / name)


def test_grover_bell_json():
    code, out, _ = run("grover", "--variant", "bell", "--marked", "10")
    assert code == 0
    data = json.loads(out)
    assert data["success_probability"] == pytest.approx(1 / 9, abs=1e-10)
    assert data["conditional_distribution"]["10"] == pytest.approx(1)
    assert data["answer"] == "10"


def test_grover_all_with_cross_check_as_csv():
    code, out, _ = run("--format", "csv", "grover", "--variant", "full", "--marked", "all", "--cross-check")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["answer"] for r in rows] == ["00", "01", "10", "11"]


def test_sweep_eta_is_monotone_csv():
    code, out, _ = run("sweep", "--variant", "full", "--param", "eta_d", "--grid", "1.0,0.95,0.9")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("variant,param,value,marked,acceptance")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["value"] for r in rows[::4]] == ["1", "0.95", "0.9"]
    acc = [float(r["acceptance"]) for r in rows if r["marked"] == "00"]
    assert acc == sorted(acc, reverse=True)
    assert acc[0] == pytest.approx(P_SCALABLE / 9, rel=1e-11)
    assert all(len(r["acceptance"].replace(".", "").lstrip("0")) <= 12 for r in rows)


def test_sweep_serial_and_parallel_agree():
    args = ("sweep", "--variant", "bell", "--param", "delta_r", "--grid", "0,0.01,0.02,0.03")
    _, serial, _ = run(*args, "--workers", "1")
    _, parallel, _ = run(*args, "--workers", "3")
    assert serial == parallel


def test_sweep_bad_grid():
    code, _, err = run("sweep", "--variant", "bell", "--param", "eta_d", "--grid", "1,x")
    assert code == 2 and "grid" in err
    code, _, _ = run("sweep", "--variant", "bell", "--param", "eta_d", "--grid", "1.5")
    assert code == 2


def test_gates_check_passes():
    code, out, _ = run("gates", "--check")
    assert code == 0
    assert "FAIL" not in out and out.count("PASS") >= 14


def test_gates_json():
    code, out, _ = run("--format", "json", "gates")
    assert code == 0 and json.loads(out)["all_pass"]


def test_run_gate_file_reports_action():
    code, out, _ = run("run", shipped("coincidence_csign.lqc"))
    assert code == 0
    data = json.loads(out)
    assert data["success_probability"] == pytest.approx(1 / 9, abs=1e-10)
    assert data["contract"] == "pass"


def test_run_circuit_file():
    code, out, _ = run("run", shipped("hong_ou_mandel.lqc"))
    data = json.loads(out)
    assert code == 0 and "1,1" not in data["accepted_readings"]


def test_run_violated_contract_exits_1(tmp_path):
    text = corpus.shipped_text("coincidence_csign.lqc").replace("sqrt(1/3)", "0.5")
    path = tmp_path / "broken.lqc"
    path.write_text(text)
    code, _, err = run("run", str(path))
    assert code == 1 and "contract" in err


def test_missing_file_exits_2():
    code, _, err = run("run", "does-not-exist.lqc")
    assert code == 2 and "cannot read" in err


def test_parse_error_exits_2_with_line(tmp_path):
    path = tmp_path / "bad.lqc"
    path.write_text("rail a\nrail b\nbs a b both 1.2 thick=A\n")
    code, _, err = run("run", str(path))
    assert code == 2 and "line 3" in err


def test_usage_errors_exit_2():
    assert run()[0] == 2
    assert run("grover", "--variant", "full")[0] == 2
    assert run("grover", "--variant", "full", "--marked", "22")[0] == 2
    assert run("--photon-cap", "0", "gates")[0] == 2


def test_fidelity_of_two_reports(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(run("grover", "--variant", "bell", "--marked", "00")[1])
    b.write_text(json.dumps({"00": 0.25, "01": 0.25, "10": 0.25, "11": 0.25}))
    code, out, _ = run("--format", "text", "fidelity", str(a), str(b))
    assert code == 0 and float(out) == pytest.approx(0.5)


def test_fidelity_errors(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text("{not json")
    b.write_text(json.dumps({"0": 1.0}))
    assert run("fidelity", str(a), str(b))[0] == 2
    a.write_text(json.dumps({"1": 1.0}))
    assert run("fidelity", str(a), str(b))[0] == 2
    a.write_text(json.dumps({"0": 0.5}))
    assert run("fidelity", str(a), str(b))[0] == 1


def test_seed_is_accepted_and_inert():
    a = run("grover", "--variant", "bell", "--marked", "01")[1]
    b = run("--seed", "7", "grover", "--variant", "bell", "--marked", "01", "--seed", "9")[1]
    assert a == b


def test_global_flags_after_subcommand():
    code, out, _ = run("grover", "--variant", "bell", "--marked", "01", "--format", "text")
    assert code == 0 and out.startswith("variant")
