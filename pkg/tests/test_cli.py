import json
import os

import numpy as np
import pytest

from ccm import cli

DATA = os.path.join(os.path.dirname(__file__), "data")


def path(name):
    return os.path.join(DATA, name)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_town(capsys):
    code, out, _ = run(capsys, "solve", path("town.json"))
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "lindahl"
    assert np.allclose(doc["payoffs"], [0.5, 0.5], atol=1e-9)
    assert np.allclose(doc["q"], [0.5, 0.5], atol=1e-9)
    assert np.allclose(doc["p"], [[2, 0], [0, 2]], atol=1e-9)


def test_solve_is_byte_deterministic(capsys):
    _, out1, _ = run(capsys, "solve", path("cakes.json"))
    _, out2, _ = run(capsys, "solve", path("cakes.json"))
    assert out1 == out2


def test_solve_cakes_explicit_zero_shift(capsys):
    code, out, _ = run(capsys, "solve", path("cakes.json"), "--c", "0,0")
    assert code == 0
    doc = json.loads(out)
    assert np.allclose(doc["payoffs"], [0.5, 1.0], atol=1e-6)


def test_verify_round_trip(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    code, _, _ = run(capsys, "solve", path("town.json"), "--out", str(cert))
    assert code == 0
    code, out, _ = run(capsys, "verify", path("town.json"), str(cert))
    assert code == 0
    assert json.loads(out)["passed"] is True


def test_verify_detects_tampering(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    run(capsys, "solve", path("town.json"), "--out", str(cert))
    doc = json.loads(cert.read_text())
    doc["p"][0][0] = 0.5
    cert.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", path("town.json"), str(cert))
    assert code == 1
    report = json.loads(out)
    assert report["passed"] is False
    assert report["violations"]


def test_verify_rejects_stale_hash(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    run(capsys, "solve", path("town.json"), "--out", str(cert))
    code, _, err = run(capsys, "verify", path("cakes.json"), str(cert))
    assert code == 1
    assert "stale" in json.loads(err)["error"]


def test_equitable_member_and_witness(capsys):
    code, out, _ = run(capsys, "equitable", path("cakes-bargaining.json"), "--point", "0.75,0.5")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "member_with_certificate"
    assert np.allclose(doc["witness"]["base"], [0.5, 0.0], atol=1e-9)


def test_equitable_non_member_exit_codes(capsys):
    code, out, _ = run(
        capsys,
        "equitable",
        path("3person.json"),
        "--point",
        "0.3333333333333333,0.3333333333333333,1",
    )
    assert code == 3
    assert json.loads(out)["status"] == "non_member_certified"
    # A dominated point is certified out as well.
    code, out, _ = run(capsys, "equitable", path("cakes-bargaining.json"), "--point", "0.5,0.5")
    assert code == 3
    # Infeasible points report "not feasible".
    code, out, _ = run(capsys, "equitable", path("cakes-bargaining.json"), "--point", "2,2")
    assert code == 3
    assert json.loads(out)["reason"] == "not feasible"


def test_nash_command(capsys):
    code, out, _ = run(capsys, "nash", path("cakes.json"))
    assert code == 0
    doc = json.loads(out)
    assert np.allclose(doc["payoffs"], [0.5, 1.0], atol=1e-6)
    assert doc["kkt_residual"] <= 1e-8
    code, out, _ = run(capsys, "nash", path("cakes-bargaining.json"))
    assert code == 0
    assert np.allclose(json.loads(out)["point"], [0.5, 1.0], atol=1e-6)


def test_commodify_round_trip(tmp_path, capsys):
    out_file = tmp_path / "econ.json"
    code, _, _ = run(capsys, "commodify", path("cakes-bargaining.json"), "--mode", "two",
                     "--out", str(out_file))
    assert code == 0
    econ = json.loads(out_file.read_text())
    assert econ["type"] == "economy" and econ["kind"] == "additive"
    # Feed the emitted economy back in: its bargaining set matches the input.
    code, out, _ = run(capsys, "equitable", str(out_file), "--point", "0.75,0.5")
    assert code == 0


def test_commodify_general_emits_valid_problem(tmp_path, capsys):
    out_file = tmp_path / "econ3.json"
    code, _, _ = run(capsys, "commodify", path("3person.json"), "--mode", "general",
                     "--out", str(out_file))
    assert code == 0
    econ = json.loads(out_file.read_text())
    assert econ["kind"] == "table"
    assert len(econ["goods"]) == 12


def test_commodify_rejects_offset_disagreement(tmp_path, capsys):
    prob = tmp_path / "shifted.json"
    prob.write_text(json.dumps({"type": "bargaining", "generators": [["1", "1"], ["2", "1"]]}))
    code, _, err = run(capsys, "commodify", str(prob), "--mode", "two")
    assert code == 1
    assert "origin" in json.loads(err)["error"]


def test_solve_office2_sweep_has_multiple_payoffs(capsys):
    code, out, _ = run(capsys, "solve", path("office2.json"), "--sweep", "6")
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "lindahl_sweep"
    assert len(doc["payoffs"]) >= 3


def test_match_pipeline(capsys):
    code, out, _ = run(capsys, "match", path("pair.json"))
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "walras_matching"
    assert doc["round_trip_payoff_gap"] == 0.0
    assert np.allclose(doc["payoffs"], [1.0, 1.0], atol=1e-9)


def test_schema_rejects_malformed_problem(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"type": "collective"}))
    code, _, err = run(capsys, "solve", str(bad))
    assert code == 1
    assert "error" in json.loads(err)


def test_inadmissible_shift_exit_code(capsys):
    code, _, err = run(capsys, "solve", path("town.json"), "--c", "0.9,0.9")
    assert code == 2
    assert "inadmissible" in json.loads(err)["error"]
