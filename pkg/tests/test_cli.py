import csv
import io
import json
import subprocess
import sys

import pytest

from sdofsim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv,expected", [
    (["--m", "4", "--n1", "2", "--neve", "3"], "2/3"),
    (["--m", "2", "--n1", "1", "--neve", "5"], "0"),
    (["--m", "5", "--n1", "2", "--neve", "2,2,1"], "1"),
])
def test_sdof(capsys, argv, expected):
    code, out, _ = run(capsys, "sdof", *argv)
    assert code == 0
    assert out.split()[0] == expected


def test_sdof_json(capsys):
    code, out, _ = run(capsys, "sdof", "--m", "4", "--n1", "2", "--neve", "3",
                       "--format", "json")
    d = json.loads(out)
    assert d["sdof"] == "2/3" and d["m_bar"] == 4


@pytest.mark.parametrize("argv", [
    ["sdof", "--m", "0", "--n1", "2", "--neve", "3"],
    ["sdof", "--m", "4", "--n1", "2"],
    ["sdof", "--m", "4", "--n1", "2", "--neve", "a,b"],
    ["converse", "--lemma", "nope"],
    ["ais", "--p", "100000000", "--m", "2"],
    ["tables", "--sweep", "1,2"],
    ["simulate", "/nonexistent.json"],
    ["converse", "--trials", "-1"],
])
def test_invalid_input_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == 2


def test_tables_csv(capsys):
    code, out, _ = run(capsys, "tables")
    rows = list(csv.DictReader(io.StringIO(out)))
    t1 = {(r["example"], r["column"]): r["value"] for r in rows
          if r["table"] == "achievability"}
    assert t1 == {("4,2,3", "prior"): "1/2", ("4,2,3", "sdof"): "2/3",
                  ("3,1,2", "prior"): "1/3", ("3,1,2", "sdof"): "1/2"}
    assert sum(r["table"] == "network-comparison" for r in rows) == 6


def test_tables_empty_sweep(capsys):
    code, out, _ = run(capsys, "tables", "--sweep", "")
    assert code == 0 and out.strip().count("\n") == 0
    assert out.startswith("m,n1,n_max")


def test_tables_sweep_json(capsys):
    code, out, _ = run(capsys, "tables", "--sweep-max", "4", "--format", "json")
    rows = json.loads(out)["sweep"]
    assert code == 0 and len(rows) == 64 and all(r["consistent"] for r in rows)


def test_simulate(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": 4, "n": [2, 3], "trials": 10}))
    code, out, _ = run(capsys, "simulate", str(cfg), "--trials", "5")
    rep = json.loads(out)
    assert code == 0 and rep["trials"] == 5 and rep["passed"]


def test_simulate_zero_trials(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": 4, "n": [2, 3], "trials": 0}))
    code, out, _ = run(capsys, "simulate", str(cfg))
    assert code == 0 and json.loads(out)["checks"] == []


def test_simulate_bad_config(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": 4, "n": [2, 3], "p0": 10, "p1": 5}))
    assert main(["simulate", str(cfg)]) == 2


def test_failed_check_exit_1(capsys, tmp_path):
    # an absurdly tight slope tolerance fails the leakage checks
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": 4, "n": [2, 3], "trials": 10,
                               "slope_tol": 1e-12}))
    assert main(["simulate", str(cfg)]) == 1


def test_converse_lal(capsys):
    code, out, _ = run(capsys, "converse", "--lemma", "lal", "--trials", "50")
    assert code == 0 and json.loads(out)["passed"]


def test_converse_joint_csv(capsys):
    code, out, _ = run(capsys, "converse", "--lemma", "joint", "--n", "2,1,1",
                       "--m", "4", "--trials", "100", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["strategy"] for r in rows] == [
        "random", "low-rank", "two-phase"]


def test_ais(capsys):
    code, out, err = run(capsys, "ais", "--p", "4", "--m", "1")
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and rep["alphabet_size"] == 3
    assert "alphabet size: 3" in err


def test_output_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SDOFSIM_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "tables", "--out", "sub/t.csv")
    assert code == 0 and out == ""
    assert (tmp_path / "sub" / "t.csv").read_text().startswith("table,")


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "sdofsim.cli", "sdof", "--m",
                          "3", "--n1", "1", "--neve", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("1/2")
