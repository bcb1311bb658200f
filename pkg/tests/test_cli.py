import json
import math
import subprocess
import sys
from fractions import Fraction as F

import pytest

from mbeval import catalog as cat
from mbeval.result import EvalResult
from mbeval import cli
from mbeval.symcore import LinearForm

L = LinearForm


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "mbeval.cli", *args],
                          capture_output=True, text=True, timeout=600)
    return proc.returncode, proc.stdout, proc.stderr


def test_linform_string_round_trip():
    for text, form in [
        ("k+1", L({"k": 1}, 1)),
        ("2*k-3/2", L({"k": 2}, F(-3, 2))),
        ("-z1+1/2", L({"z1": -1}, F(1, 2))),
        ("5", L.constant(5)),
    ]:
        assert cli.linform_from_string(text) == form
        assert cli.linform_from_string(cli.linform_to_string(form)) == form


def test_mb_json_round_trip_h1():
    mb = cat.h1_mb()
    doc = cli.mb_to_json(mb)
    mb2 = cli.mb_from_json(doc)
    assert mb2.prefactor == mb.prefactor
    assert sorted(map(repr, mb2.canonical_gammas())) \
        == sorted(map(repr, mb.canonical_gammas()))
    assert json.dumps(cli.mb_to_json(mb2)) == json.dumps(doc)


def test_cli_ising_value_and_schema():
    code, out, err = run_cli("ising", "--n", "4", "--k", "1",
                             "--method", "contour", "--tol", "1e-8")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1
    assert doc["entry"] == "ising"
    assert doc["results"][0]["value"] == pytest.approx(0.701199860176430, abs=1e-8)
    assert doc["results"][0]["abs_err_est"] <= 1e-8
    assert "runtime_ms" not in doc["results"][0]


def test_cli_box_closed():
    code, out, _ = run_cli("box", "--n", "1", "--s", "1", "--method", "closed")
    assert code == 0
    doc = json.loads(out)
    assert doc["results"][0]["value"] == 0.5


def test_cli_byte_identical_reruns():
    args = ("box", "--n", "2", "--s", "1", "--method", "oracle",
            "--tol", "1e-5", "--seed", "7")
    _, out1, _ = run_cli(*args)
    _, out2, _ = run_cli(*args)
    assert out1 == out2


def test_cli_timings_flag_adds_runtime():
    code, out, _ = run_cli("box", "--n", "1", "--s", "1",
                           "--method", "closed", "--timings")
    doc = json.loads(out)
    assert "runtime_ms" in doc["results"][0]


def test_cli_usage_error_exit_64():
    code, out, err = run_cli("nonsense-subcommand")
    assert code == 64


def test_cli_eval_error_exit_1():
    code, out, err = run_cli("box", "--n", "1", "--s", "-1",
                             "--method", "closed")
    assert code == 1
    doc = json.loads(out)
    assert doc["error"] == "PoleError"


def test_cli_mb_file_h1(tmp_path):
    doc = cli.mb_to_json(cat.h1_mb())
    path = tmp_path / "h1.json"
    path.write_text(json.dumps(doc))
    code, out, err = run_cli("mb", "--file", str(path),
                             "--param", "a=1", "--param", "b=1",
                             "--method", "contour", "--tol", "1e-9")
    assert code == 0
    rep = json.loads(out)
    assert rep["results"][0]["value"] == pytest.approx(math.pi ** 2 / 4, abs=1e-8)


def test_cli_mb_schema_from_spec_text(tmp_path):
    # hand-written document following the wire schema
    doc = {
        "schema": 1, "dim": 1,
        "prefactor": {"rational": "1", "gammas": []},
        "num": [{"coeffs": {"z": "-1"}, "const": "0", "mult": 1},
                {"coeffs": {"z": "1"}, "const": "1", "mult": 1}],
        "den": [],
        "powers": [{"param": "x", "coeffs": {"z": "1"}, "const": "0"}],
        "free_params": ["x"],
    }
    path = tmp_path / "geom.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run_cli("mb", "--file", str(path), "--param", "x=1/2",
                           "--method", "series", "--tol", "1e-10")
    assert code == 0
    rep = json.loads(out)
    assert rep["results"][0]["value"] == pytest.approx(2.0 / 3.0, abs=1e-9)


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "mbeval.cfg"
    cfg.write_text("tol=1e-5\nseed=3\n")
    code, out, _ = run_cli("box", "--n", "2", "--s", "1",
                           "--method", "oracle", "--config", str(cfg))
    assert code == 0


def test_verify_suite_subset():
    rc = cli.dispatch(["verify", "--suite", "jellium", "--tol", "1e-8"])
    assert rc == 0


def test_verify_pairwise_gate_detects_disagreement():
    ok, deltas = cli._pairwise_pass([
        ("a", EvalResult(1.0, 1e-10, "x", {})),
        ("b", EvalResult(1.1, 1e-10, "y", {})),
    ])
    assert not ok
    ok, _ = cli._pairwise_pass([
        ("a", EvalResult(1.0, 1e-10, "x", {})),
        ("b", EvalResult(1.0 + 1e-11, 1e-10, "y", {})),
    ])
    assert ok


def test_cli_config_jet_and_budget(tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text("max_jet_order=4\ncontour_node_budget=60000000\ntol=1e-6\n")
    code, out, _ = run_cli("jellium", "--n", "3", "--method", "closed",
                           "--config", str(cfg))
    assert code == 0
