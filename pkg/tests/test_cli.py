import json
import subprocess
import sys

import numpy as np
import pytest

from ordmatch.cli import main
from ordmatch.core import load_instance


@pytest.fixture
def f8(tmp_path):
    path = tmp_path / "f8.json"
    assert main(["gen", "--kind", "figure2", "--n", "8", "--out", str(path)]) == 0
    return path


def test_gen_oracle_verify(f8, capsys):
    capsys.readouterr()
    assert main(["oracle", "--instance", str(f8)]) == 0
    assert json.loads(capsys.readouterr().out)["opt_weight"] == 10
    assert main(["verify", "--instance", str(f8)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["metric"] is True and doc["beta"] == 3


def test_run_rsd(f8, capsys):
    code = main(["run", "--alg", "rsd", "--instance", str(f8), "--alpha", "1", "--trials", "100000", "--seed", "7"])
    rep = json.loads(capsys.readouterr().out)
    assert code == 0 and rep["pass"] is True


def test_gen_round_trip(tmp_path):
    path = tmp_path / "e.json"
    assert main(["gen", "--kind", "euclidean", "--n", "6", "--seed", "3", "--out", str(path)]) == 0
    inst = load_instance(path.read_bytes())
    again = load_instance(inst.to_json())
    assert np.allclose(inst.weights, again.weights, rtol=0, atol=1e-12)


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["run", "--alg", "rsd", "--instance", "F", "--alpha", "1.5", "--seed", "1"], "--alpha"),
        (["run", "--alg", "bogus", "--instance", "F", "--alpha", "1", "--seed", "1"], "--alg"),
        (["run", "--alg", "rsd", "--instance", "F", "--alpha", "0.5", "--seed", "1"], "--alpha"),
        (["run", "--alg", "rsd", "--instance", "F", "--alpha", "1"], "--seed"),
        (["run", "--alg", "rsd", "--instance", "F", "--alpha", "1", "--seed", "1", "--trials", "1"], "--trials"),
        (["gen", "--kind", "euclidean", "--n", "4"], "--seed"),
        (["gen", "--kind", "figure2", "--n", "1"], "--n"),
        (["curve", "--alg", "rsd", "--seed", "1", "--alpha-grid", "0,x"], "--alpha-grid"),
        (["lowerbound", "--epsilon", "0.5"], "--epsilon"),
        (["frobnicate"], "cmd"),
    ],
)
def test_validation_errors(argv, flag, f8, capsys):
    argv = [str(f8) if a == "F" else a for a in argv]
    assert main(argv) == 1
    err = capsys.readouterr().err.strip()
    assert len(err.splitlines()) == 1 and flag.lstrip("-") in err


def test_malformed_instance(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"weights": [[1, -2], [1, 1]]}')
    assert main(["verify", "--instance", str(bad)]) == 1
    assert "--instance" in capsys.readouterr().err


def test_non_metric_run_fails_validation(tmp_path, capsys):
    p = tmp_path / "nm.json"
    p.write_text('{"weights": [[10, 1], [1, 1]]}')
    assert main(["run", "--alg", "rsd", "--instance", str(p), "--alpha", "1", "--seed", "0"]) == 1


def test_failed_pass_exit_code(tmp_path, monkeypatch, capsys):
    from ordmatch import harness

    monkeypatch.setattr(harness, "theoretical_bound", lambda *a, **k: 2.0)
    p = tmp_path / "f.json"
    main(["gen", "--kind", "figure2", "--n", "4", "--out", str(p)])
    code = main(["run", "--alg", "rsd", "--instance", str(p), "--alpha", "1", "--seed", "0", "--trials", "100"])
    assert code == 2 and json.loads(capsys.readouterr().out)["pass"] is False


def test_curve_thread_invariant(capsys):
    outs = []
    for threads in ("1", "8", "1"):
        argv = ["curve", "--kind", "euclidean", "--n", "10", "--instances", "3", "--trials", "9000",
                "--alg", "total-order", "--alpha-grid", "0,0.5,0.75", "--seed", "5", "--threads", threads]
        assert main(argv) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] == outs[2]
    assert outs[0].splitlines()[0] == "model,alpha,empirical_ratio,theoretical_bound,std_err,trials,instances"


def test_lemmas_and_lowerbound(capsys):
    assert main(["lemmas", "--seed", "3", "--instances", "20"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True
    assert main(["lowerbound"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["two_sided"]["factor"] == pytest.approx(4 / 3, abs=1e-3)


def test_module_entry_point_and_logging(f8):
    env = {"ORDMATCH_LOG": "debug", "PATH": ""}
    proc = subprocess.run(
        [sys.executable, "-m", "ordmatch", "run", "--alg", "rsd-partial", "--instance", str(f8),
         "--alpha", "0.5", "--trials", "50", "--seed", "2"],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["algorithm"] == "rsd-partial"
    assert "DEBUG" in proc.stderr
