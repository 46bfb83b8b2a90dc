import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qtrack.cli import run
from qtrack.io import decode_problem, decode_state, dumps, encode_problem
from qtrack.exceptions import MalformedInput

DOCS = Path(__file__).resolve().parents[1] / "docs"
IDENTITY = str(DOCS / "identity_problem.json")
PURIFY = str(DOCS / "purification_problem.json")


def call(argv, capsys):
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_identity(capsys):
    code, out, _ = call(["solve", IDENTITY, "--certify", "--channel"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["solution"]["fidelity"] == 1.0
    assert doc["solution"]["procedure"] == "B"
    assert doc["certificate"]["valid"] is True
    assert doc["cptp"]["passed"] is True


def test_output_is_byte_stable(capsys):
    _, a, _ = call(["solve", PURIFY, "--certify"], capsys)
    _, b, _ = call(["solve", PURIFY, "--certify"], capsys)
    assert a == b
    assert "0.91187723552395705" in a


def test_certify_exit_zero(capsys):
    code, out, _ = call(["certify", PURIFY], capsys)
    assert code == 0
    assert json.loads(out)["valid"] is True


def test_stabilize(capsys):
    code, out, _ = call(["stabilize", "--theta-bar", "0.7853981634", "--p", "0.25"], capsys)
    assert code == 0
    assert abs(json.loads(out)["fidelity"] - 0.943203) < 1e-6


def test_discriminate(capsys):
    code, out, _ = call(["discriminate", "--p1", "0.5", "--state1", "0,0,1", "--state2=0,0,-1"], capsys)
    assert code == 0
    assert json.loads(out)["P_track"] == 1.0


def test_clone_and_purify(capsys):
    code, out, _ = call(["clone", "--phi", str(np.pi / 8)], capsys)
    assert abs(json.loads(out)["fidelity"] - (0.5 + 0.5 * np.cos(np.pi / 12))) < 1e-12
    code, out, _ = call(["purify", "--R", "0.8", "--theta", str(np.pi / 3)], capsys)
    assert abs(json.loads(out)["fidelity"] - 0.911877) < 1e-5


def test_sweeps(capsys):
    code, out, _ = call(["purify", "--R", "0.6", "--sweep", "--points", "5"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["theta", "fidelity", "mu1", "mu2", "mu3", "s1"]
    assert len(rows) == 6
    code, out, _ = call(["indicator-sweep", "--R", "0.9", "--points", "4"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["source_fidelity", "target_fidelity", "omega"]
    assert len(rows) == 17
    code, out, _ = call(["stabilize", "--theta-bar", "0.5", "--sweep", "--points", "3"], capsys)
    assert code == 0 and out.count("\n") == 4


def test_feasible(capsys, tmp_path):
    code, out, _ = call(["feasible", str(DOCS / "mixed_targets_problem.json")], capsys)
    doc = json.loads(out)
    assert doc["grid"]["feasible"] is True
    assert doc["perfect_value"] == 0.625
    code, out, _ = call(["feasible", IDENTITY, "--csv"], capsys)
    assert out.splitlines()[0] == "t,lhs,rhs"


def test_oracle_check(capsys):
    code, out, _ = call(["oracle-check", IDENTITY, "--samples", "200", "--seed", "5", "--climb-iters", "5"], capsys)
    assert code == 0
    assert json.loads(out)["gap"] >= -1e-9


def test_explain(capsys):
    code, out, _ = call(["explain", PURIFY], capsys)
    assert code == 0
    assert json.loads(out)["solution"]["procedure"] == "A"


def test_input_errors(capsys, tmp_path):
    code, _, err = call(["solve", '{"rho1": {"bloch": [0, 0, 1]}}'], capsys)
    assert code == 1 and "rho2" in err
    code, _, err = call(["solve", str(tmp_path / "missing.json")], capsys)
    assert code == 1
    bad = '{"rho1":[0,0,2],"rho2":[0,0,1],"target1":[1,0,0],"target2":[0,1,0],"pi1":0.5}'
    code, _, err = call(["solve", bad], capsys)
    assert code == 1 and "NonPhysicalState" in err
    same = '{"rho1":[0,0,1],"rho2":[0,0,1],"target1":[1,0,0],"target2":[0,1,0],"pi1":0.5}'
    code, _, err = call(["solve", same], capsys)
    assert code == 1 and "IdenticalSources" in err
    code, _, err = call(["solve", "{not json"], capsys)
    assert code == 1
    code, _, err = call(["stabilize", "--theta-bar", "0.5", "--p", "0.9"], capsys)
    assert code == 1 and "OutOfRange" in err
    code, _, _ = call(["clone", "--phi", "x"], capsys)
    assert code == 1


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = call(["-o", str(target), "solve", IDENTITY], capsys)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["solution"]["fidelity"] == 1.0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qtrack", "solve", IDENTITY], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["solution"]["procedure"] == "B"


def test_json_codec():
    doc = {"rho1": {"density": [[[0.5, 0], [0, -0.5]], [[0, 0.5], [0.5, 0]]]}, "rho2": [0, 0, -1],
           "target1": {"bloch": [1, 0, 0]}, "target2": {"bloch": [0, 1, 0]}, "pi1": 0.25}
    p = decode_problem(doc)
    assert np.abs(p.rho1.bloch - [0, 1, 0]).max() < 1e-15
    q = decode_problem(json.loads(dumps(encode_problem(p))))
    assert q.rho1 == p.rho1 and q.pi1 == p.pi1
    with pytest.raises(MalformedInput):
        decode_state({"bloch": [0, 0]})
    with pytest.raises(MalformedInput):
        decode_state({"bloch": [0, 0, "a"]})
    with pytest.raises(MalformedInput):
        decode_state({"state": 1})


def test_dumps_format():
    text = dumps({"b": 1.0, "a": [0.1, 2], "c": None, "d": float("nan")})
    assert text.index('"a"') < text.index('"b"')
    assert "0.10000000000000001" in text
    assert '"b": 1.0' in text
    assert '"d": null' in text
