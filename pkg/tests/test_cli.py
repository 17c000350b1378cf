import csv
import io
import json
import math
import subprocess
import sys

import pytest

from pateleak.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_leak(capsys):
    code, out, _ = run(capsys, "leak", "--v", "4,3,2,1", "--gamma", "0.1", "--bits")
    assert code == 0
    rep = json.loads(out)
    assert rep["value_nats"] == pytest.approx(0.0850252, abs=5e-6)
    assert rep["value_bits"] == pytest.approx(rep["value_nats"] / math.log(2))
    assert rep["v_minus"] == [4, 3, 2, 1]


def test_leak_from_input_file(capsys, tmp_path):
    path = tmp_path / "in.json"
    path.write_text(json.dumps({"v_minus": [0, 0], "noise": {"kind": "gaussian",
                                                             "sigma": 2.0}}))
    code, out, _ = run(capsys, "leak", "--input", str(path))
    assert code == 0
    assert 0 < json.loads(out)["value_nats"] < math.log(2)


def test_leak_invalid_histogram(capsys):
    code, _, err = run(capsys, "leak", "--v", "4,-3", "--gamma", "0.1")
    assert code == 2
    assert json.loads(err)["error"] == "InvalidInputError"


def test_bound(capsys):
    code, out, _ = run(capsys, "bound", "--gamma", "0.1", "--m", "4", "--k", "50")
    rep = json.loads(out)
    assert code == 0
    assert rep["leakage_at_vmax_nats"] == pytest.approx(0.0860786, abs=1e-7)
    assert rep["total_bound_nats"] == pytest.approx(5.0)


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--gamma", "0.1,1", "--m", "2:5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 8
    for r in rows:
        assert float(r["leakage_nats"]) <= float(r["gamma_bound"])
        assert abs(float(r["closed_minus_quadrature"])) < 1e-8


def test_sweep_histogram_file(capsys, tmp_path):
    path = tmp_path / "h.jsonl"
    path.write_text("[4, 3, 2, 1]\n[0, 0]\n")
    code, out, _ = run(capsys, "sweep", "--gamma", "0.1", "--mode", "histogram-file",
                       "--histograms", str(path))
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2
    assert float(rows[0]["leakage_nats"]) == pytest.approx(0.0850252, abs=5e-6)


def test_majorize(capsys):
    code, out, _ = run(capsys, "majorize", "[4,4,1]", "[5,2,2]")
    assert code == 0 and json.loads(out)["relation"] == "incomparable"


def test_channel(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"x_support": ["a", "b"], "y_alphabet": ["0", "1"],
                                "rows": {"a": [0.9, 0.1], "b": [0.1, 0.9]}}))
    code, out, _ = run(capsys, "channel", str(path))
    assert code == 0
    assert json.loads(out)["pcml_nats"] == pytest.approx(math.log(1.8), abs=1e-11)


def test_channel_bad_rows(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"x_support": ["a"], "y_alphabet": ["0", "1"],
                                "rows": {"a": [0.9, 0.3]}}))
    assert run(capsys, "channel", str(path))[0] == 2


def test_missing_file(capsys):
    assert run(capsys, "channel", "/nonexistent/file.json")[0] == 4


def test_verify_schur(capsys):
    code, out, _ = run(capsys, "verify", "schur")
    assert code == 0
    assert out.strip().splitlines()[-1] == "suite schur: PASS"


def test_calibrate(capsys):
    code, out, _ = run(capsys, "calibrate", "--v", "4,3,2,1", "--target", "0.085")
    rep = json.loads(out)
    assert code == 0
    assert rep["gamma"] == pytest.approx(0.0999691, abs=1e-6)
    assert rep["achieved_nats"] == pytest.approx(0.085, abs=1e-9)


def test_calibrate_unreachable(capsys):
    assert run(capsys, "calibrate", "--v", "0,0", "--target", "0.7")[0] == 2


def _write_example_data(tmp_path):
    data = tmp_path / "data.csv"
    labels = [0] * 5 + [1] * 3 + [2] * 2 + [3]
    data.write_text("x,label\n" + "".join(f"{i},{y}\n" for i, y in enumerate(labels)))
    return data


def test_simulate_with_refusal(capsys, tmp_path):
    data = _write_example_data(tmp_path)
    ledger = tmp_path / "ledger.jsonl"
    code, out, _ = run(capsys, "simulate", "--data", str(data), "--L", "11", "--m", "4",
                       "--gamma", "0.1", "--budget-nats", "0.3", "--n-queries", "10",
                       "--seed", "2", "--ledger", str(ledger))
    assert code == 0
    trace = [json.loads(x) for x in out.strip().splitlines()]
    assert trace[-1]["refused"] and not any(t["refused"] for t in trace[:-1])
    assert trace[-1]["label"] is None
    assert all(t["cum"] <= 0.3 for t in trace)
    assert len(ledger.read_text().strip().splitlines()) == len(trace)


def test_simulate_manifest_and_output_dir(capsys, tmp_path, monkeypatch):
    data = _write_example_data(tmp_path)
    manifest = tmp_path / "run.json"
    manifest.write_text(json.dumps({"data": str(data), "L": 11, "m": 4, "gamma": 0.1,
                                    "n_queries": 5, "seed": 1}))
    monkeypatch.setenv("PATELEAK_OUTPUT_DIR", str(tmp_path))
    code, _, _ = run(capsys, "simulate", "--manifest", str(manifest), "--output",
                     "trace.jsonl")
    assert code == 0
    trace = [json.loads(x) for x in (tmp_path / "trace.jsonl").read_text().splitlines()]
    assert len(trace) == 5
    assert trace[-1]["cum"] == pytest.approx(sum(t["nats"] for t in trace), abs=1e-10)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "pateleak", "majorize", "[9,0,0]", "[3,3,3]"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["relation"] == "p_majorizes_q"
