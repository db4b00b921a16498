import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from dkwsmc import DkwBand
from dkwsmc.cli import EXIT_INVALID, EXIT_IO, EXIT_NONTERMINATION, EXIT_OK, EXIT_USAGE, export_cdf_csv, main

from conftest import FIG1_PATH

QUERY = "mean; quantile(0.3); cvar(0.3)"


def run(capsys, *argv):
    status = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return status, out, err


def test_table_report(capsys):
    status, out, err = run(capsys, "--model", FIG1_PATH, "--query", QUERY, "-k", 1000, "--delta", 0.1)
    assert status == EXIT_OK and err == ""
    assert "quantile(0.3)" in out and "[1, 1]" in out
    mean_line = next(ln for ln in out.splitlines() if ln.startswith("mean"))
    assert mean_line.rstrip().endswith("∞)")
    assert "lower bounds only" in out


def test_repeated_runs_are_byte_identical(capsys, tmp_path):
    argv = ["--model", FIG1_PATH, "--query", QUERY + "; erisk(2)", "-k", 500, "--seed", 17]
    first = run(capsys, *argv, "--cdf", tmp_path / "a.csv")
    second = run(capsys, *argv, "--cdf", tmp_path / "b.csv", "--workers", 3)
    assert first == second
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_json_lines(capsys):
    status, out, _ = run(capsys, "--model", FIG1_PATH, "--query", QUERY + " bounded 100", "-k", 200,
                         "--format", "json-lines")
    assert status == EXIT_OK
    records = [json.loads(ln) for ln in out.splitlines()]
    assert [r["name"] for r in records] == ["mean", "quantile", "cvar"]
    assert records[1]["params"] == {"t": 0.3}
    for r in records:
        assert r["k"] == 200 and r["delta"] == 0.05
        assert r["lo"] <= r["estimate"] <= r["hi"]


def test_json_lines_infinite_bound_is_null(capsys):
    _, out, _ = run(capsys, "--model", FIG1_PATH, "--query", "mean", "-k", 50, "--format", "json-lines")
    assert json.loads(out)["hi"] is None


def test_sequential_mode(capsys):
    status, out, _ = run(capsys, "--model", FIG1_PATH, "--query", "quantile(0.5) bounded 200", "--sequential",
                         "--base-n", 50, "--epsilon", 0.5, "--format", "json-lines")
    assert status == EXIT_OK
    records = [json.loads(ln) for ln in out.splitlines()]
    assert records[-1]["hi"] - records[-1]["lo"] <= 1.0
    assert [r["stage"] for r in records] == list(range(1, len(records) + 1))
    status, out, _ = run(capsys, "--model", FIG1_PATH, "--query", "mean", "--sequential", "--max-stages", 3)
    assert status == EXIT_OK and "stage 3:" in out and "stage 4:" not in out


def test_missing_model_file(capsys, tmp_path):
    status, out, err = run(capsys, "--model", tmp_path / "none.json", "--query", "mean")
    assert status == EXIT_IO and out == "" and "cannot read" in err


def test_invalid_model_and_query(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "dtmc"')
    status, out, err = run(capsys, "--model", bad, "--query", "mean")
    assert status == EXIT_INVALID and out == "" and "line 1" in err
    status, out, err = run(capsys, "--model", FIG1_PATH, "--query", "mean;; cvar(2)")
    assert status == EXIT_INVALID and out == "" and "column 6" in err
    status, _, err = run(capsys, "--model", FIG1_PATH, "--query", "mean until nowhere")
    assert status == EXIT_INVALID


def test_nontermination_exit_code(capsys, tmp_path):
    loop = tmp_path / "loop.json"
    loop.write_text(json.dumps({"kind": "dtmc", "initial": "a", "states": [
        {"id": "a", "reward": 1, "transitions": [{"target": "a", "prob": 1}]}]}))
    csv_path = tmp_path / "out.csv"
    status, out, err = run(capsys, "--model", loop, "--query", "mean", "--cdf", csv_path)
    assert status == EXIT_NONTERMINATION and out == "" and "non-terminating" in err
    assert not csv_path.exists()


def test_data_above_declared_bound(capsys):
    status, out, err = run(capsys, "--model", FIG1_PATH, "--query", "mean bounded 3", "-k", 500)
    assert status == 6 and out == "" and "bound below observed support" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--query", "mean"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["--model", str(FIG1_PATH), "--query", "mean", "--delta", "1.5"])
    assert info.value.code == EXIT_USAGE
    capsys.readouterr()


def test_csv_exact_bytes(tmp_path):
    path = tmp_path / "cdf.csv"
    export_cdf_csv(DkwBand.with_half_width([1, 1, 2, 4], 0.25), path)
    assert path.read_bytes() == b"value,ecdf,lower,upper\n1,0.5,0.25,0.75\n2,0.75,0.5,1\n4,1,0.75,1\n"


def test_csv_zero_width(tmp_path):
    path = tmp_path / "cdf.csv"
    export_cdf_csv(DkwBand.with_half_width([3, 5], 0.0), path)
    assert path.read_text() == "value,ecdf,lower,upper\n3,0.5,0.5,0.5\n5,1,1,1\n"


def test_csv_columns_consistent(capsys, tmp_path):
    path = tmp_path / "cdf.csv"
    status, _, _ = run(capsys, "--model", FIG1_PATH, "--query", "mean", "-k", 2000, "--delta", 0.1, "--cdf", path)
    assert status == EXIT_OK
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = {c: np.array([float(r[c]) for r in rows]) for c in ("value", "ecdf", "lower", "upper")}
    delta = np.sqrt(np.log(2 / 0.1) / (2 * 2000))
    for c in cols.values():
        assert np.all(np.diff(c) >= 0)
    width = cols["upper"] - cols["lower"]
    assert np.all(width <= 2 * delta + 1e-12)
    free = (cols["ecdf"] - delta >= 0) & (cols["ecdf"] + delta <= 1)
    assert free.any() and np.allclose(width[free], 2 * delta, rtol=0, atol=1e-12)
    assert np.all((cols["lower"] <= cols["ecdf"]) & (cols["ecdf"] <= cols["upper"]))
    assert cols["ecdf"][-1] == 1.0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dkwsmc", "--model", str(FIG1_PATH), "--query", "mean", "-k", "10"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "mean" in proc.stdout
