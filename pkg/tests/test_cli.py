import json
import subprocess
import sys
from math import factorial

import pytest

from tamealt.algebra import AlgebraStructure
from tamealt.cli import dispatch
from tamealt.operad import Signature


def run_json(capsys, argv):
    code = dispatch(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_delta_command(capsys):
    code, rep = run_json(capsys, ["delta", "--n", "7", "--ar", "3", "--eps", "1/4"])
    assert code == 0
    assert rep["positive_definite"] is True
    assert rep["eps_below_sufficient_bound"] is True
    assert rep["verdict"]["pass"] is True
    code, rep = run_json(capsys, ["delta", "--n", "7", "--ar", "3", "--eps", "3/5", "--critical"])
    assert code == 0 and rep["positive_definite"] is False
    assert rep["critical_eps"] == pytest.approx(0.355085858726488, abs=1e-9)


def test_delta_rejects_bad_input(capsys):
    assert dispatch(["delta", "--n", "7", "--ar", "3", "--eps", "one"]) == 2
    assert dispatch(["delta", "--n", "3", "--ar", "3", "--eps", "1/4"]) == 2


def test_angle_and_slgen(capsys):
    code, rep = run_json(capsys, ["angle", "--p", "5"])
    assert code == 0 and rep["measured"]["cosine"] == pytest.approx(5**-0.5)
    code, rep = run_json(capsys, ["slgen", "--n", "3", "--p", "5"])
    assert code == 0 and rep["measured"] == "372000"
    assert dispatch(["slgen", "--n", "3", "--p", "5", "--N", "5"]) == 2
    assert dispatch(["angle", "--p", "4"]) == 2


def test_exhaustive_minimality_census(capsys):
    code, rep = run_json(capsys, ["census", "minimality", "--sig", "b2", "--k", "2", "--p", "3"])
    assert code == 0
    assert rep["counts"] == {"total": 6561, "minimal": 1296, "algorithm_disagreements": 0}


def test_census_usage_errors(capsys):
    assert dispatch(["census", "minimality", "--mode", "sampled", "--samples", "10"]) == 2
    assert dispatch(["census", "minimality", "--mode", "sampled", "--seed", "1"]) == 2
    assert dispatch(["census", "minimality", "--k", "3", "--p", "7"]) == 2
    assert dispatch(["census", "hall", "--group", "S9"]) == 2
    assert dispatch(["census", "minimality", "--sig", "b2,zz"]) == 2


def test_census_other_kinds(capsys):
    code, rep = run_json(capsys, ["census", "isoclasses", "--k", "1", "--p", "5"])
    assert code == 0 and rep["counts"]["classes"] == 6
    code, rep = run_json(capsys, ["census", "hall", "--group", "alt4"])
    assert code == 0 and rep["measured"]["orbits"] == 4
    code, rep = run_json(capsys, ["census", "autos", "--sig", "b2,b2", "--k", "1", "--p", "5"])
    assert code == 0 and rep["kind"] == "automorphisms"
    code, rep = run_json(capsys, ["census", "onedim", "--sig", "b2,b2", "--k", "2", "--p", "3",
                                  "--mode", "sampled", "--samples", "500", "--seed", "4"])
    assert code == 0 and rep["counts"]["total"] == 500


def test_verify_action(capsys):
    code, rep = run_json(capsys, ["verify-action", "--p", "3", "--k", "1", "--n", "4", "--d", "2", "--seed", "7"])
    assert code == 0
    m = rep["measured"]
    assert m["degree"] == 80 and m["image"] == "Alt"
    assert m["order"] == str(factorial(80) // 2)
    assert m["orbit_sizes_on_tuples"] == [1, 80]
    assert set(m["generator_orders"].values()) == {3}


def test_verify_action_usage_errors(capsys):
    assert dispatch(["verify-action", "--p", "5", "--k", "1", "--n", "4", "--N", "5", "--seed", "1"]) == 2
    assert dispatch(["verify-action", "--p", "3", "--k", "1", "--n", "4"]) == 2
    assert dispatch(["verify-action", "--p", "9", "--k", "1", "--n", "4", "--seed", "1"]) == 2
    assert dispatch(["frobnicate"]) == 2
    assert dispatch([]) == 2


def test_word_command(capsys):
    argv = ["word", "--n", "5", "--sig", "b2", "--f", "m(x1, m(x1, x2))", "--p", "3", "--seed", "2", "--show"]
    code, rep = run_json(capsys, argv)
    assert code == 0
    assert rep["measured"]["symbolic_match"] and rep["measured"]["numeric_match"]
    assert rep["measured"]["word"]
    assert dispatch(["word", "--n", "5", "--sig", "b2", "--f", "m(x0, x1)"]) == 2
    assert dispatch(["word", "--n", "5", "--sig", "b2", "--f", "m(x1", "--p", "3", "--seed", "1"]) == 2
    assert dispatch(["word", "--n", "5", "--sig", "b2", "--f", "m(x1, x2)", "--p", "3"]) == 2


def test_crt_command(capsys, tmp_path):
    A = AlgebraStructure.from_constants(Signature.parse("t3"), 3, [1])
    path = tmp_path / "a.json"
    path.write_text(A.dumps())
    code, rep = run_json(capsys, ["crt", "--structure", str(path), "--points", "1", "--targets", "2"])
    assert code == 0 and rep["pass"]
    # x -> -x is an automorphism, so a and -a cannot be sent to the same nonzero value
    code, rep = run_json(capsys, ["crt", "--structure", str(path), "--points", "1;2", "--targets", "1;1"])
    assert code == 1 and rep["pass"] is False
    assert dispatch(["crt", "--structure", str(path), "--points", "1;2", "--targets", "1"]) == 2
    assert dispatch(["crt", "--points", "1,0", "--targets", "0,1"]) == 2


def test_out_file_and_repeatable_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["census", "minimality", "--sig", "b2,b2", "--k", "2", "--p", "3",
            "--mode", "sampled", "--samples", "2000", "--seed", "5"]
    assert dispatch(["--out", str(a)] + argv) == 0
    assert dispatch(["--out", str(b)] + argv) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["parameters"]["seed"] == 5


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tamealt.cli", "angle", "--p", "3"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["pass"] is True


def test_verify_action_in_characteristic_two(capsys):
    # generators are involutions here, so only Alt or Sym is recorded
    code, rep = run_json(capsys, ["verify-action", "--p", "2", "--k", "2", "--n", "4", "--seed", "1"])
    assert code == 0
    m = rep["measured"]
    assert m["degree"] == 255 and m["image"] in ("Alt", "Sym")
    assert m["orbit_sizes_on_tuples"] == [1, 255]
