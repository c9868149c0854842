import json
import os

import numpy as np
import pytest

import fplap.cli as cli
from fplap.errors import ConfigError, QuadratureError


def run_cli(args, tmp_path, name="out"):
    out = str(tmp_path / name)
    code = cli.main(list(args) + ["--out", out])
    return code, out


def load_report(out):
    with open(os.path.join(out, "report.json")) as handle:
        return json.load(handle)


def test_constants_run_passes(tmp_path):
    code, out = run_cli(["constants", "--s", "0.5", "--p", "3", "--nu", "0.25"], tmp_path)
    assert code == 0
    doc = load_report(out)
    body = doc["body"]
    assert body["results"]["left_tail_term"] == pytest.approx(2.0 / 3.0)
    assert body["config"]["s"] == 0.5 and body["config"]["command"] == "constants"
    assert all(a["passed"] for a in body["assertions"])
    with open(os.path.join(out, "series", "c_nu_vs_nu.csv")) as handle:
        lines = handle.read().strip().split("\n")
    assert lines[0] == "nu,c_nu"
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert data.shape[1] == 2 and np.all(np.isfinite(data))


def test_eigen_verify_degenerate(tmp_path):
    code, out = run_cli(["eigen-verify", "--s", "0.5", "--p", "3", "--nu", "0.5"], tmp_path)
    assert code == 0
    body = load_report(out)["body"]
    assert body["results"]["degenerate"] is True


def test_assertion_failure_exits_1(tmp_path):
    code, out = run_cli(
        ["eigen-verify", "--s", "0.5", "--p", "3", "--nu", "0.25", "--tol", "1e-12"],
        tmp_path,
    )
    assert code == 1
    body = load_report(out)["body"]
    assert not all(a["passed"] for a in body["assertions"])


def test_unknown_command_and_bad_values_exit_2(tmp_path, capsys):
    assert cli.main(["no-such-command"]) == 2
    assert cli.main(["constants", "--s", "1.5"]) == 2
    assert cli.main(["constants", "--bogus-flag", "1"]) == 2


def test_config_file_merging_and_rejection(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("s = 0.6\np = 3\nnu = 0.2\n# comment line\n")
    code, out = run_cli(["constants", "--config", str(cfg), "--s", "0.5"], tmp_path)
    assert code == 0
    body = load_report(out)["body"]
    assert body["config"]["s"] == 0.5  # flag wins over file
    assert body["config"]["nu"] == 0.2

    bad = tmp_path / "bad.cfg"
    bad.write_text("mystery = 1\n")
    assert cli.main(["constants", "--config", str(bad)]) == 2

    clash = tmp_path / "clash.cfg"
    clash.write_text("command = solve\n")
    assert cli.main(["constants", "--config", str(clash)]) == 2


def test_identical_runs_have_identical_bodies(tmp_path):
    args = ["constants", "--s", "0.5", "--p", "3", "--nu", "0.3", "--seed", "7"]
    _, out = run_cli(args, tmp_path, "first")
    doc1 = load_report(out)
    code = cli.main(args + ["--out", out])
    assert code == 0
    doc2 = load_report(out)
    b1 = json.dumps(doc1["body"], sort_keys=True, indent=2)
    b2 = json.dumps(doc2["body"], sort_keys=True, indent=2)
    assert b1 == b2


def test_delta_range_parsing():
    vals = cli.parse_delta_range("2^-4..2^-9")
    assert len(vals) == 6
    assert vals[0] == pytest.approx(2.0**-4)
    assert vals[-1] == pytest.approx(2.0**-9)
    assert cli.parse_delta_range("0.5,0.25") == [0.5, 0.25]
    with pytest.raises(ConfigError):
        cli.parse_delta_range("2^-4..3^-9")
    with pytest.raises(ConfigError):
        cli.parse_delta_range("")


def test_nonconvergence_exits_3(tmp_path, monkeypatch):
    def boom(cfg):
        raise QuadratureError("forced failure", value=1.23)

    monkeypatch.setitem(cli._RUNNERS, "constants", boom)
    code, out = run_cli(["constants"], tmp_path)
    assert code == 3
    body = load_report(out)["body"]
    assert body["results"]["partial_value"] == 1.23
    assert not body["assertions"][0]["passed"]


def test_solve_command_writes_series(tmp_path):
    code, out = run_cli(["solve", "--s", "0.5", "--p", "3", "--layers", "8"], tmp_path)
    assert code == 0
    for name in ("solution", "dist_vs_value"):
        path = os.path.join(out, "series", f"{name}.csv")
        with open(path) as handle:
            rows = handle.read().strip().split("\n")
        assert len(rows) > 5
        float(rows[1].split(",")[1])  # numeric payload


def test_scaled_limit_command(tmp_path):
    code, out = run_cli(
        ["scaled-limit", "--s", "0.5", "--p", "3", "--nu", "0.25", "--n", "2",
         "--deltas", "2^-2..2^-6"],
        tmp_path,
    )
    assert code == 0
    body = load_report(out)["body"]
    assert body["results"]["rel_deviation"] < 0.05
