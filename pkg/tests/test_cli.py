import json
import os
import subprocess
import sys

import pytest

from onewayqc import photonic
from onewayqc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    assert code == 0
    return json.loads(out)


def test_dj_mbqc_constant(capsys):
    doc = run_json(capsys, "dj", "--bb", "i", "--mbqc")
    assert doc["verdict"] == "constant" and doc["query_outcome"] == "00"
    assert doc["p_all_zeros"] == 1.0


def test_dj_mbqc_balanced(capsys):
    doc = run_json(capsys, "dj", "--bb", "vi", "--mbqc", "--seed", "5")
    assert doc["verdict"] == "balanced" and doc["query_outcome"] != "00"


def test_dj_circuit_refined(capsys):
    doc = run_json(capsys, "dj", "--bb", "ii", "--circuit", "--refined")
    assert doc["verdict"] == "constant" and doc["model"] == "circuit"


def test_dj_oracle_file(tmp_path, capsys):
    path = tmp_path / "o.json"
    path.write_text(json.dumps({"n": 3, "table": [0, 0, 0, 1, 1, 1, 1, 0]}))
    doc = run_json(capsys, "dj", "--oracle-file", str(path))
    assert doc["verdict"] == "balanced"
    assert "000" not in doc["distribution"]


def test_dj_oracle_file_errors(tmp_path, capsys):
    path = tmp_path / "o.json"
    path.write_text(json.dumps({"n": 2, "table": [0, 1, 1, 1]}))
    assert run(capsys, "dj", "--oracle-file", str(path))[0] == 2
    assert run(capsys, "dj", "--oracle-file", str(tmp_path / "missing.json"))[0] == 2
    path.write_text(json.dumps({"n": 2, "table": [0, 0, 1, 1]}))
    assert run(capsys, "dj", "--oracle-file", str(path), "--n", "3")[0] == 2


def test_bv_mbqc(capsys):
    doc = run_json(capsys, "bv", "--s", "10", "--mbqc", "--seed", "7")
    assert (doc["bb"], doc["recovered"], doc["probability"]) == ("iii", "10", 1.0)


def test_bv_mbqc_general_and_circuit(capsys):
    assert run_json(capsys, "bv", "--s", "1011", "--mbqc")["recovered"] == "1011"
    assert run_json(capsys, "bv", "--s", "110101")["recovered"] == "110101"


@pytest.mark.parametrize("s", ["", "12", "1"])
def test_bv_bad_strings(capsys, s):
    assert run(capsys, "bv", "--s", s, "--mbqc")[0] == 2


def test_pattern_and_graph(capsys):
    code, out, _ = run(capsys, "pattern", "--bb", "vii")
    assert code == 0 and json.loads(out)["feedforward"]["3"]["notation"] == "ζ σz"
    code, out, _ = run(capsys, "graph", "--n", "2")
    doc = json.loads(out)
    assert doc["edges"] == [[1, 2], [2, 5], [3, 4], [4, 5], [5, 6]]
    assert run(capsys, "graph", "--n", "1")[0] == 2


def test_photonic(capsys):
    doc = run_json(capsys, "photonic", "--trials", "20000", "--seed", "1")
    assert doc["fusions"] == 5 and doc["analytic_probability"] == 0.03125
    assert abs(doc["empirical_probability"] - 1 / 32) < 0.005


def test_photonic_network_file(tmp_path, capsys):
    path = tmp_path / "net.json"
    path.write_text(photonic.fusion_pair_network().dumps())
    doc = run_json(capsys, "photonic", "--network", str(path), "--trials", "1000")
    assert doc["analytic_probability"] == 0.5
    path.write_text("{}")
    assert run(capsys, "photonic", "--network", str(path))[0] == 2
    assert run(capsys, "photonic", "--trials", "-5")[0] == 2


def test_verify_exit_codes(capsys):
    code, out, _ = run(capsys, "verify", "--filter", "bv_")
    assert code == 0 and "all checks passed" in out
    assert run(capsys, "verify", "--filter", "no-such-check")[0] == 2


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "dj", "--bb", "ix")[0] == 2
    assert run(capsys, "dj", "--bb", "i", "--seed", "-1")[0] == 2
    assert run(capsys, "dj", "--bb", "i", "--mbqc", "--refined")[0] == 2


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("ONEWAYQC_SEED", "7")
    assert run_json(capsys, "bv", "--s", "10", "--mbqc")["seed"] == 7
    monkeypatch.setenv("ONEWAYQC_SEED", "seven")
    assert run(capsys, "bv", "--s", "10", "--mbqc")[0] == 2


def _subprocess(*argv):
    env = {k: v for k, v in os.environ.items() if k != "ONEWAYQC_SEED"}
    return subprocess.run([sys.executable, "-m", "onewayqc", *argv], capture_output=True, env=env, check=True).stdout


@pytest.mark.parametrize(
    "argv",
    [
        ("dj", "--bb", "v", "--mbqc", "--seed", "42", "--format", "json"),
        ("photonic", "--trials", "10000", "--seed", "42", "--workers", "2", "--format", "json"),
        ("verify", "--filter", "black_box*", "--format", "json"),
    ],
)
def test_byte_identical_repeated_runs(argv):
    assert _subprocess(*argv) == _subprocess(*argv)
