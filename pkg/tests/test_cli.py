import json
import math
import subprocess
import sys

import numpy as np
import pytest

from oneshot_equiv.cli import main
from oneshot_equiv.quantum import QOperator


def write_operator(path, matrix, regs):
    path.write_text(json.dumps(QOperator.from_array(np.asarray(matrix, dtype=complex), regs).to_json()))
    return str(path)


def test_gen_state_roundtrip_and_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["gen-state", "--seed", "3", "--n", "2", "--out", str(a)]) == 0
    assert main(["gen-state", "--seed", "3", "--n", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["config"]["seed"] == 3 and doc["instance"]["n"] == 2


@pytest.mark.parametrize("argv", [["gen-state", "--n", "0"], ["gen-state", "--n", "2", "--m", "3"]])
def test_gen_state_usage_errors(argv):
    assert main(argv) == 2


def test_entropy_of_uniform_bit(tmp_path, capsys):
    path = write_operator(tmp_path / "u.json", np.diag([0.25] * 4), [("A", 2), ("E", 2)])
    assert main(["entropy", path, "--quantity", "hmin", "--target", "A", "--side", "E"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert math.isclose(out["value"], 1.0, abs_tol=1e-9)


def test_entropy_of_point_mass(tmp_path, capsys):
    path = write_operator(tmp_path / "p.json", np.diag([0.5, 0.5, 0, 0]), [("A", 2), ("E", 2)])
    assert main(["entropy", path, "--quantity", "hmax", "--target", "A", "--side", "E"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert math.isclose(out["value"], 0.0, abs_tol=1e-9)
    assert "purification-duality" in out["checks"]


def test_entropy_on_generated_instance(tmp_path, capsys):
    path = tmp_path / "s.json"
    assert main(["gen-state", "--seed", "1", "--n", "2", "--out", str(path)]) == 0
    assert main(["entropy", str(path), "--quantity", "hmax", "--which", "rho_XAB", "--method", "duality"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["method"] == "purification-duality" and out["side"] == ["B"]
    assert main(["entropy", str(path), "--quantity", "pguess"]) == 0
    pg = json.loads(capsys.readouterr().out)["value"]
    assert 0.25 - 1e-9 <= pg <= 1 + 1e-9


def test_entropy_unknown_register(tmp_path):
    path = write_operator(tmp_path / "u.json", np.diag([0.25] * 4), [("A", 2), ("E", 2)])
    assert main(["entropy", path, "--target", "Q"]) == 2


def test_entropy_missing_file(tmp_path):
    assert main(["entropy", str(tmp_path / "missing.json")]) == 2


def test_verify_passes_and_writes_reports(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify", "theorem1", "--seed", "7", "--n", "2", "--out", str(out)]) == 0
    assert capsys.readouterr().out.startswith("PASS")
    doc = json.loads(out.read_text())
    assert doc["passed"] and doc["config"]["seed"] == 7
    assert (tmp_path / "r.csv").read_text().startswith("check,instances")


def test_verify_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2
    assert main(["verify", "lhl", "--n", "1"]) == 2


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "count": 1, "n": 3}))
    out = tmp_path / "r.json"
    assert main(["verify", "theorem1", "--config", str(cfg), "--n", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["seed"] == 5 and doc["config"]["count"] == 1 and doc["config"]["n"] == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "red"}))
    assert main(["verify", "theorem1", "--config", str(bad)]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "oneshot_equiv", "verify", "families", "--seed", "1"], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "delta-universal-exact" in res.stdout
