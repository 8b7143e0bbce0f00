import json
import subprocess
import sys

import numpy as np
import pytest
from click.testing import CliRunner

from sl2cayley.cli import cli, parse_moduli, run_experiment
from sl2cayley.errors import ConfigError


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, args):
    return runner.invoke(cli, args, catch_exceptions=False)


def test_parse_moduli():
    assert parse_moduli("2,3,4") == (2, 3, 4)
    assert parse_moduli("5") == (5, 5, 5)
    with pytest.raises(ConfigError):
        parse_moduli("0,1,2")
    with pytest.raises(ConfigError):
        parse_moduli("2,3")


def test_group_info(runner):
    res = invoke(runner, ["group", "info", "--moduli", "2,2,2",
                          "--genset", "DIAGONAL"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["subgroup_order"] == 6
    assert doc["surjective"] is False
    assert doc["subgroup_index"] == 36


def test_cayley_build_writes_files(runner, tmp_path):
    out = tmp_path / "g"
    res = invoke(runner, ["cayley", "build", "--moduli", "2,2,2",
                          "--genset", "DIAGONAL", "--out", str(out)])
    assert res.exit_code == 0
    assert (out / "edges.csv").exists()
    header = json.loads((out / "header.json").read_text())
    assert header["num_vertices"] == 6
    summary = json.loads((out / "summary.json").read_text())
    assert "config_hash" in summary and "tool_version" in summary


def test_spectral_gap_json(runner):
    res = invoke(runner, ["spectral", "gap", "--moduli", "2,2,2",
                          "--genset", "TWISTED", "--mode", "dense"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert 0 < doc["gap"] < 1
    assert doc["vertices"] == 216


def test_cheeger_exact_json(runner):
    res = invoke(runner, ["cheeger", "exact", "--moduli", "2,2,2",
                          "--genset", "DIAGONAL"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["h"] == "4/3"
    assert doc["witness"] == [0, 1, 2]


def test_walk_decay_files(runner, tmp_path):
    out = tmp_path / "decay"
    res = invoke(runner, ["walk", "decay", "--moduli", "2,2,2",
                          "--genset", "TWISTED", "--lmax", "6",
                          "--out", str(out)])
    assert res.exit_code == 0
    lines = (out / "decay.csv").read_text().strip().splitlines()
    assert len(lines) == 7
    doc = json.loads((out / "summary.json").read_text())
    assert doc["all_within_bound"] is True


def test_walk_nonconc_linear(runner, tmp_path):
    out = tmp_path / "nc"
    res = invoke(runner, ["walk", "nonconc-linear", "--genset", "TWISTED",
                          "--Q", "2", "--l", "1:4", "--out", str(out)])
    assert res.exit_code == 0
    rows = (out / "nonconc.csv").read_text().strip().splitlines()
    assert len(rows) == 1 + 4 * 2  # header + (l, n) pairs
    assert rows[0] == "l,Q,n,mass_numerator,mass_denominator,float_value"
    maxrows = (out / "nonconc_max.csv").read_text().strip().splitlines()
    assert len(maxrows) == 5


def test_walk_nonconc_trace(runner):
    res = invoke(runner, ["walk", "nonconc-trace", "--genset", "TWISTED",
                          "--Q", "2", "--l", "3"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert "3" in doc["masses"]


def test_growth_bounded_gen(runner):
    res = invoke(runner, ["growth", "bounded-gen", "--moduli", "2,2,2",
                          "--seed", "11"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["found"] is True
    assert doc["q_prime"] == [1, 1, 1]


def test_growth_sumset_cover(runner):
    res = invoke(runner, ["growth", "sumset-cover", "--moduli", "5,5,5",
                          "--seed", "3", "--density", "0.5"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["found"] is True


def test_glue_commutator(runner):
    res = invoke(runner, ["glue", "commutator-cover", "--v", "0,1,0",
                          "--w", "0,0,1", "--q", "5"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["covers"] is True


def test_glue_dichotomy_random(runner):
    res = invoke(runner, ["glue", "dichotomy", "--moduli", "3,3,3",
                          "--genset", "DIAGONAL", "--target-moduli", "3,3,3",
                          "--target-genset", "DIAGONAL", "--seed", "5"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["case"] in ("far", "structured")


def test_verify_suite_runs(runner):
    res = invoke(runner, ["verify", "group-orders"])
    assert res.exit_code == 0
    assert "[group-orders] PASS" in res.output


def cli_main(args):
    return subprocess.run([sys.executable, "-m", "sl2cayley.cli", *args],
                          capture_output=True, text=True)


def test_exit_code_config_error():
    res = cli_main(["group", "info", "--moduli", "0,2,2"])
    assert res.returncode == 2
    assert "config error" in res.stderr


def test_exit_code_cap_exceeded():
    res = cli_main(["group", "info", "--moduli", "50,50,1", "--genset", "TWISTED"])
    assert res.returncode == 4
    assert "cap exceeded" in res.stderr


def test_exit_code_unknown_suite():
    res = cli_main(["verify", "nonsense"])
    assert res.returncode == 2


def test_run_config_walk(tmp_path):
    cfg = {
        "analysis": "walk",
        "genset": "TWISTED",
        "moduli": [2, 2, 2],
        "params": {"Q": 2, "l": [1, 2, 3]},
        "out": str(tmp_path / "exp"),
    }
    run_experiment(cfg)
    rows = (tmp_path / "exp" / "walk.csv").read_text().strip().splitlines()
    assert len(rows) == 1 + 3 * 2  # header + (l, n) pairs
    doc = json.loads((tmp_path / "exp" / "summary.json").read_text())
    assert doc["all_within_bound"] is True


def test_run_config_spectral_range(tmp_path):
    cfg = {
        "analysis": "spectral",
        "genset": "DIAGONAL",
        "q_range": [2, 4],
        "out": str(tmp_path / "spec"),
    }
    run_experiment(cfg)
    rows = (tmp_path / "spec" / "spectral.csv").read_text().strip().splitlines()
    assert len(rows) == 4  # header + q = 2, 3, 4


def test_run_config_rejects_bad_modulus(tmp_path):
    cfg = {"analysis": "spectral", "moduli": [0, 2, 2],
           "out": str(tmp_path / "bad")}
    with pytest.raises(ConfigError):
        run_experiment(cfg)
    assert not (tmp_path / "bad").exists()  # no partial files


def test_run_config_randomized_needs_seed(tmp_path):
    cfg = {"analysis": "growth", "moduli": [2, 2, 2],
           "out": str(tmp_path / "g")}
    with pytest.raises(ConfigError):
        run_experiment(cfg)


def test_run_config_glue(tmp_path):
    cfg = {
        "analysis": "glue",
        "genset": "DIAGONAL",
        "moduli": [2, 2, 2],
        "seed": 7,
        "params": {"trials": 5, "epsilon": 1e-4},
        "out": str(tmp_path / "glue"),
    }
    run_experiment(cfg)
    doc = json.loads((tmp_path / "glue" / "summary.json").read_text())
    assert doc["violations"] == 0


def test_output_determinism(tmp_path):
    cfg = {
        "analysis": "walk",
        "genset": "TWISTED",
        "moduli": [2, 2, 2],
        "params": {"Q": 2, "l": [1, 2]},
        "seed": 9,
        "out": str(tmp_path / "a"),
    }
    run_experiment(cfg)
    cfg["out"] = str(tmp_path / "b")
    run_experiment(cfg, threads=8)
    a_csv = (tmp_path / "a" / "walk.csv").read_bytes()
    b_csv = (tmp_path / "b" / "walk.csv").read_bytes()
    assert a_csv == b_csv
    a_sum = json.loads((tmp_path / "a" / "summary.json").read_text())
    b_sum = json.loads((tmp_path / "b" / "summary.json").read_text())
    a_sum.pop("config_hash")
    b_sum.pop("config_hash")  # configs differ only in the out path
    assert a_sum == b_sum


def test_growth_exponent_command(runner):
    res = invoke(runner, ["growth", "exponent", "--moduli", "3,3,3",
                          "--seed", "21", "--size", "300"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["exponent"] > 1.0
