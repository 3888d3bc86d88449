import json
import os
import subprocess
import sys

import numpy as np
import pytest

from uptradeoff import cli, full, public
from uptradeoff import fixtures as F
from uptradeoff.envelope import TradeoffPoint, upper_concave_envelope
from uptradeoff.errors import ValidationError
from uptradeoff.io import (atomic_write, curve_csv, joint_from_dict, joint_to_dict, load_joint,
                           mechanism_from_dict, mechanism_to_dict, read_curve_csv, save_joint)
from uptradeoff.prob import evaluate_mechanism, random_joint


class TestJointIO:
    def test_roundtrip(self, tmp_path):
        j = random_joint(3, 3, 4)
        save_joint(tmp_path / "j.json", j)
        k = load_joint(tmp_path / "j.json")
        assert np.array_equal(j.table, k.table) and k.x_labels == j.x_labels

    def test_conditional_form(self):
        doc = {"p_x": [0.25, 0.75], "p_y_given_x": [[0.5, 0.5], [0.2, 0.8]],
               "y_labels": ["a", "b"]}
        j = joint_from_dict(doc)
        assert np.allclose(j.table, [[0.125, 0.125], [0.15, 0.6]])
        assert j.y_labels == ("a", "b")

    def test_bad(self, tmp_path):
        with pytest.raises(ValidationError):
            joint_from_dict({"p_x": [1.0]})
        with pytest.raises(ValidationError):
            joint_from_dict({"p_xy": [[0.5, 0.6]]})
        (tmp_path / "bad.json").write_text("{nope")
        with pytest.raises(ValidationError):
            load_joint(tmp_path / "bad.json")


@pytest.mark.parametrize("model", ["full", "public"])
def test_mechanism_roundtrip(model):
    j = random_joint(4, 2, 4)
    m = full.algorithm1_joint(j) if model == "full" else public.algorithm3(j)[0]
    doc = json.loads(json.dumps(mechanism_to_dict(m, j)))
    back = mechanism_from_dict(doc, j)
    a, b = evaluate_mechanism(j, m), evaluate_mechanism(j, back)
    assert abs(a.utility_bits - b.utility_bits) <= 1e-12
    assert abs(a.leakage_bits - b.leakage_bits) <= 1e-12


def test_csv_roundtrip():
    j = random_joint(5, 4, 4)
    c = full.curve_full_greedy(j)
    parsed = read_curve_csv(curve_csv(c), text=True)
    assert len(parsed["point"]) == len(c.points)
    env = upper_concave_envelope(TradeoffPoint(x, y) for x, y in parsed["envelope"])
    assert env.is_concave()
    assert np.allclose(env.ys, c.envelope.ys, atol=1e-12)
    with pytest.raises(ValidationError):
        read_curve_csv("a,b,c\n", text=True)


def test_atomic_write(tmp_path):
    p = tmp_path / "sub" / "f.txt"
    atomic_write(p, "one")
    atomic_write(p, "two")
    assert p.read_text() == "two"
    assert [f.name for f in p.parent.iterdir()] == ["f.txt"]


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCli:
    def test_random_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            code, _, _ = run(["random", "--seed", "7", "--nx", "2", "--ny", "2", "--out", str(p)], capsys)
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bound_and_mechanism(self, tmp_path, capsys):
        save_joint(tmp_path / "j.json", F.example3_joint())
        code, out, _ = run(["bound", "--input", str(tmp_path / "j.json"), "--model", "public"], capsys)
        assert code == 0 and json.loads(out)["rank_lower_bound_bits"] == pytest.approx(0.75)
        code, out, _ = run(["mechanism", "--input", str(tmp_path / "j.json"), "--model", "public"],
                           capsys)
        doc = json.loads(out)
        assert code == 0 and doc["evaluation"]["leakage_bits"] <= 1e-9

    def test_curve_csv(self, capsys):
        code, out, _ = run(["curve", "--seed", "1", "--nx", "3", "--ny", "3", "--format", "csv",
                            "--method", "exhaustive"], capsys)
        assert code == 0
        assert out.splitlines()[0] == "epsilon_bits,utility_bits,kind"

    def test_oracle(self, capsys):
        code, out, _ = run(["oracle", "--seed", "2", "--nx", "3", "--ny", "2"], capsys)
        assert code == 0 and json.loads(out)["value_bits"] >= 0

    def test_validation_exit(self, tmp_path, capsys):
        (tmp_path / "j.json").write_text(json.dumps({"p_xy": [[0.5, 0.6]]}))
        code, _, err = run(["bound", "--input", str(tmp_path / "j.json")], capsys)
        assert code == 2 and json.loads(err)["exit_code"] == 2
        code, _, err = run(["nonsense"], capsys)
        assert code == 2
        code, _, _ = run(["bound", "--input", str(tmp_path / "missing.json")], capsys)
        assert code == 2

    def test_cap_exit(self, capsys):
        code, _, err = run(["curve", "--seed", "1", "--nx", "8", "--ny", "3", "--model", "public",
                            "--method", "exhaustive"], capsys)
        assert code == 3 and json.loads(err)["error"] == "TooManyOrderings"

    def test_reproduce_example3(self, capsys):
        code, out, _ = run(["reproduce", "example3"], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["evaluation"]["utility_bits"] == pytest.approx(doc["oracle_bits"], abs=1e-9)

    def test_reproduce_figure(self, tmp_path, capsys):
        code, out, _ = run(["reproduce", "figure5", "--out", str(tmp_path)], capsys)
        assert code == 0
        names = sorted(f.name for f in tmp_path.iterdir())
        assert names == ["figure5_algorithmic.csv", "figure5_nonalgorithmic.csv",
                         "figure5_summary.json"]
        parsed = read_curve_csv(tmp_path / "figure5_algorithmic.csv")
        assert parsed["band_upper"] and parsed["band_lower"]

    def test_tolerance_flag(self, capsys):
        code, _, _ = run(["bound", "--seed", "3", "--nx", "2", "--ny", "3", "--tol-num", "1e-10"],
                         capsys)
        assert code == 0


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "uptradeoff", "random", "--seed", "1",
                        "--nx", "2", "--ny", "2"], capture_output=True, text=True,
                       env={**os.environ, "UPT_NO_NUMBA": "1"})
    assert r.returncode == 0 and "p_xy" in r.stdout
