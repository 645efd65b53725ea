import json
import subprocess
import sys

import pytest

from dboot.cli import main
from dboot.harness import COLUMNS, parse_report


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"d": 2, "N": 128, "k_grid": [4], "tau_grid": [1], "B": 20, "reps": 2,
                             "oracle_reps": 5, "blb_r": 3}))
    return p


def test_tau_min(capsys):
    assert main(["tau-min", "--family", "linear", "--method", "kgrad", "--gamma-n", "2", "--gamma-k", "4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["tau_min"] == 6 and out["feasible"]


def test_coverage_to_file(cfg, tmp_path):
    out = tmp_path / "r.csv"
    assert main(["coverage", "--config", str(cfg), "--out", str(out), "--seed", "5", "--threads", "2"]) == 0
    rep = parse_report(out.read_text())
    assert {r.method for r in rep} == {"kgrad", "nk1grad"}


def test_compare_json_stdout(cfg, capsys):
    assert main(["compare", "--config", str(cfg), "--format", "json", "--norm", "coord:1"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert {r["method"] for r in rows} == {"kgrad", "nk1grad", "blb", "sdb"}


def test_bench_and_oracle(cfg, capsys):
    assert main(["bench", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == ",".join(COLUMNS)
    assert main(["oracle-width", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["oracle_width"] > 0


@pytest.mark.parametrize("argv", [
    ["coverage", "--config", "/nonexistent.json"],
    ["coverage", "--norm", "coord:9"],
    ["tau-min", "--family", "linear", "--method", "kgrad", "--gamma-n", "-1", "--gamma-k", "4"],
])
def test_errors_give_nonzero_exit(argv, capsys):
    assert main(argv) != 0
    assert "error" in capsys.readouterr().err


def test_bad_config_key(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"dims": 3}))
    assert main(["coverage", "--config", str(p)]) == 1


def test_usage_errors_exit_nonzero():
    with pytest.raises(SystemExit) as info:
        main(["coverage", "--threads", "0"])
    assert info.value.code != 0
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code != 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dboot", "tau-min", "--family", "glm", "--method", "nk1grad",
                          "--gamma-n", "8", "--gamma-k", "2"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["tau_min"] == 2
