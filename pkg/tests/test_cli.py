import json
import subprocess
import sys

import pytest

from gatcsbm import experiments
from gatcsbm.cli import main
from gatcsbm.experiments import (
    CSV_HEADER,
    CheckResult,
    SweepConfig,
    format_records_csv,
    run_vary_distance_sweep,
    run_vary_q_sweep,
)

SMALL = ["--n", "120", "--trials", "2", "--jobs", "1"]


def test_sweep_q_writes_csv_matching_library(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["sweep-q", "--regime", "easy", *SMALL, "--p", "0.5", "--sigma", "0.1", "--seed", "42",
               "--q-grid", "0.1,0.3", "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert text.splitlines()[0] == CSV_HEADER
    cfg = SweepConfig(n=120, trials=2, base_seed=42, q_grid=(0.1, 0.3))
    assert text == format_records_csv(run_vary_q_sweep(cfg, "easy"))


def test_sweep_distance_to_stdout_matches_library(capsys):
    rc = main(["sweep-distance", *SMALL, "--q", "0.2", "--distance-grid", "0.5,2", "--models", "gcn,linear"])
    assert rc == 0
    cfg = SweepConfig(n=120, trials=2, q=0.2, distance_grid=(0.5, 2.0), models=("gcn", "linear"))
    assert capsys.readouterr().out == format_records_csv(run_vary_distance_sweep(cfg))


def test_unknown_flag_exits_one(capsys):
    rc = main(["sweep-q", "--bogus-flag", "3"])
    assert rc == 1
    err = capsys.readouterr().err
    assert "--bogus-flag" in err and len(err.strip().splitlines()) == 1


def test_missing_subcommand_exits_one():
    assert main([]) == 1


@pytest.mark.parametrize("argv", [
    ["sweep-q", "--n", "1"],
    ["sweep-q", "--models", "gcn,unknown-model"],
    ["sweep-q", "--q-grid", "0.5,0.1"],
    ["sweep-q", "--r-policy", "other"],
    ["verify", "--suite", "nope"],
])
def test_config_errors_exit_one(argv, capsys):
    assert main(argv) == 1
    assert len(capsys.readouterr().err.strip().splitlines()) == 1


def test_io_error_exits_three(tmp_path, capsys):
    rc = main(["sweep-q", *SMALL, "--q-grid", "0.2", "--out", str(tmp_path / "no" / "r.csv")])
    assert rc == 3
    assert "r.csv" in capsys.readouterr().err


def test_missing_config_file_exits_three(tmp_path):
    assert main(["sweep-q", "--config", str(tmp_path / "none.json")]) == 3


def test_config_last_wins(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 100, "trials": 1, "q_grid": [0.2], "models": ["linear"], "jobs": 1}))
    ref = lambda n: format_records_csv(run_vary_q_sweep(
        SweepConfig(n=n, trials=1, q_grid=(0.2,), models=("linear",)), "easy"))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    # flag before --config: the file wins
    assert main(["sweep-q", "--n", "150", "--config", str(cfg), "--out", str(a)]) == 0
    assert a.read_text() == ref(100)
    # flag after --config: the flag wins
    assert main(["sweep-q", "--config", str(cfg), "--n", "150", "--out", str(b)]) == 0
    assert b.read_text() == ref(150)


def test_bad_config_contents(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert main(["sweep-q", "--config", str(cfg)]) == 1
    cfg.write_text(json.dumps({"unknown_key": 1}))
    assert main(["sweep-q", "--config", str(cfg)]) == 1


def test_verify_report_bytes_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["verify", "--suite", "linear-equivalence", "--seed", "7", "--trials", "2"]
    rc1 = main([*args, "--out", str(a)])
    rc2 = main([*args, "--out", str(b)])
    assert rc1 == rc2 and rc1 in (0, 2)
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["seed"] == 7


def test_verify_failure_exits_two(monkeypatch, capsys):
    monkeypatch.setitem(experiments.SUITES, "always-fails",
                        lambda seed, trials: [CheckResult("x", False, "never holds")])
    assert main(["verify", "--suite", "always-fails"]) == 2
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_dump_then_real_data(tmp_path, capsys):
    d = tmp_path / "dump"
    assert main(["dump-sample", "--n", "80", "--q", "0.1", "--regime", "hard", "--dump-dir", str(d)]) == 0
    assert sorted(p.name for p in d.iterdir()) == ["edges.tsv", "features.tsv", "labels.tsv"]
    out = tmp_path / "real.csv"
    rc = main(["real-data", "--features", str(d / "features.tsv"), "--edges", str(d / "edges.tsv"),
               "--labels", str(d / "labels.tsv"), "--class", "1", "--mu-norm-grid", "0.5,5",
               "--out", str(out)])
    assert rc == 0
    rows = out.read_text().splitlines()
    assert rows[0] == CSV_HEADER and len(rows) > 10


def test_real_data_parse_error_exits_one(tmp_path, capsys):
    for name, text in [("f.tsv", "0\t1.0\n1\t2.0\n"), ("e.tsv", "1\t1\n"), ("l.tsv", "0\t0\n1\t1\n")]:
        (tmp_path / name).write_text(text)
    rc = main(["real-data", "--features", str(tmp_path / "f.tsv"), "--edges", str(tmp_path / "e.tsv"),
               "--labels", str(tmp_path / "l.tsv"), "--mu-norm-grid", "1"])
    assert rc == 1
    assert "self-loop at line 1" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gatcsbm", "sweep-q", "--n", "60", "--trials", "1",
                           "--q-grid", "0.3", "--models", "linear", "--jobs", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == CSV_HEADER
