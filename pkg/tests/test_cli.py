import json
import math

import numpy as np
import pytest

from qcell.circuits import cnot_matrix
from qcell.cli import cli_main
from qcell.fabric import program_from_json, program_to_unitary
from qcell.linalg import phase_invariant_error, unitary_to_json

CNOT = cnot_matrix(2, 1, 2)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@pytest.fixture()
def cnot_file(tmp_path):
    path = tmp_path / "cnot.json"
    path.write_text(json.dumps(unitary_to_json(CNOT)))
    return path


def test_compile_then_run(tmp_path, cnot_file, capsys):
    prog_path = tmp_path / "prog.json"
    assert cli_main(["compile", "--in", str(cnot_file), "--out", str(prog_path)]) == 0
    capsys.readouterr()
    assert cli_main(["run", "--program", str(prog_path), "--state", "10"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1
    state, prob = out[0].split()
    assert state == "11"
    assert float(prob) == pytest.approx(1.0, abs=1e-12)


def test_decompose_swap(tmp_path, capsys):
    swap_path = tmp_path / "swap.json"
    swap_path.write_text(json.dumps(unitary_to_json(SWAP)))
    out_path = tmp_path / "decomp.json"
    assert cli_main(["decompose", "--in", str(swap_path), "--out", str(out_path)]) == 0
    err = capsys.readouterr().err
    assert "reconstruction_error" in err
    doc = json.loads(out_path.read_text())
    thetas = sorted(abs(t) for t in doc["theta"])
    assert np.allclose(thetas, [math.pi / 4] * 3, atol=1e-9)
    assert float(err.split("reconstruction_error = ")[1]) <= 1e-9


def test_toffoli_level0_run(tmp_path, capsys):
    prog_path = tmp_path / "t0.json"
    assert cli_main(["toffoli", "--level", "0", "--out", str(prog_path)]) == 0
    capsys.readouterr()
    assert cli_main(["run", "--program", str(prog_path), "--state", "001"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0].split()[0] == "000"


def test_optics_report(tmp_path):
    out_path = tmp_path / "optics.json"
    rc = cli_main(
        ["optics", "--control", "1,0", "--target", "0,1", "--ancilla", "bell",
         "--shots", "32", "--seed", "9", "--out", str(out_path)]
    )
    assert rc == 0
    report = json.loads(out_path.read_text())
    assert report["failure_probability"] == pytest.approx(0.75, abs=1e-10)
    assert sum(report["counts"].values()) == 32


def test_game_round(capsys):
    assert cli_main(["game", "--gamma", "0", "--alice", "0,0,0", "--bob", "0,0,0"]) == 0
    out = capsys.readouterr().out
    assert "payoff_alice 3.0" in out
    assert "payoff_bob 3.0" in out


def test_game_fabric_flag(capsys):
    rc = cli_main(
        ["game", "--gamma", "0.8", "--alice", "1,2,3", "--bob", "3,2,1", "--fabric"]
    )
    assert rc == 0
    assert "cells = 2" in capsys.readouterr().err


def test_unknown_flag_exit_1(capsys):
    assert cli_main(["run", "--bogus"]) == 1
    assert "Usage" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path):
    assert cli_main(["compile", "--in", str(tmp_path / "none.json"),
                     "--out", str(tmp_path / "o.json")]) == 2


def test_invalid_json_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert cli_main(["compile", "--in", str(bad), "--out", str(tmp_path / "o.json")]) == 1


def test_non_unitary_exit_1(tmp_path):
    bad = tmp_path / "scaled.json"
    bad.write_text(json.dumps(unitary_to_json(2 * np.eye(4))))
    assert cli_main(["decompose", "--in", str(bad)]) == 1


def test_compile_output_loads(tmp_path, cnot_file):
    prog_path = tmp_path / "prog.json"
    cli_main(["compile", "--in", str(cnot_file), "--out", str(prog_path)])
    prog = program_from_json(json.loads(prog_path.read_text()))
    assert phase_invariant_error(program_to_unitary(prog), CNOT) <= 1e-9
