import json
import subprocess
import sys
from fractions import Fraction

import pytest

from egalflow import cli
from egalflow.cli import RunConfig, main, run
from egalflow.errors import InvariantViolation
from egalflow.io import fixture_document
from egalflow.sharing import PaymentVector


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_ea_chain(capsys):
    code, out, _ = call(capsys, "ea", "fixtures/E1")
    assert code == 0
    doc = json.loads(out)
    assert doc["payments"] == {"A": "3", "B": "3", "C": "2"}
    assert [t["lambda"] for t in doc["trace"]] == ["2", "3"]
    assert doc["checks"]["oracle_match"] is True
    assert doc["checks"]["spread"] == doc["checks"]["min_deviation"] == "1"
    assert doc["checks"]["core"]["cr"] is True


def test_ea_fig1_shape_uses_fractions(capsys):
    code, out, _ = call(capsys, "ea", "--input", "F1")
    assert code == 0
    assert json.loads(out)["payments"]["s1"] == "1/2"


def test_min_deviation(capsys):
    code, out, _ = call(capsys, "min-deviation", "fixtures/E3")
    assert code == 0
    doc = json.loads(out)
    assert doc["delta"] == "4"
    assert doc["witness"] == {"A": "5", "B": "5", "C": "1", "D": "1"}


def test_core_check_violation(capsys):
    code, out, _ = call(capsys, "core-check", "fixtures/E1", "--vector", "A=8,B=0,C=0")
    assert code == 0
    core = json.loads(out)["core"]
    assert core["cr"] is False
    assert core["violations"] == [{"coalition": ["B", "C"], "value": "2", "payment": "0"}]


def test_core_check_accepts_fractions(capsys):
    code, out, _ = call(capsys, "core-check", "E1", "--vector", "A=7/2,B=5/2,C=2")
    assert code == 0 and json.loads(out)["core"]["cr"] is True


def test_solve_and_oracle(capsys):
    code, out, _ = call(capsys, "solve", "E1")
    doc = json.loads(out)
    assert code == 0 and doc["total_profit"] == "8"
    assert [(t["seller"], t["buyer"], t["amount"]) for t in doc["trades"]] == [("A", "B", "6"), ("B", "C", "2")]
    code, out, _ = call(capsys, "oracle", "E3")
    assert code == 0 and json.loads(out)["payments"] == {"A": "5", "B": "5", "C": "1", "D": "1"}


def test_selftest(capsys):
    code, out, _ = call(capsys, "selftest")
    assert code == 0 and json.loads(out)["ok"] is True


def test_table_format(capsys):
    code, out, _ = call(capsys, "core-check", "E1", "--vector", "A=8,B=0,C=0", "--format", "table")
    assert code == 0
    assert "cr" in out and "no" in out and "{" not in out.splitlines()[0]


def test_output_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = call(capsys, "ea", "E2", "--output", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["payments"] == {"A": "4", "B": "4"}


def test_reports_are_byte_identical(capsys):
    outs = {call(capsys, "ea", "F1")[1] for _ in range(3)}
    assert len(outs) == 1
    outs = {call(capsys, "gen", "--seed", "9")[1] for _ in range(3)}
    assert len(outs) == 1


def test_gen_parameters(capsys):
    code, out, _ = call(capsys, "gen", "--seed", "4", "--players", "5", "--trades", "3", "--max-profit", "2")
    doc = json.loads(out)
    assert code == 0 and doc["players"] == ["P1", "P2", "P3", "P4", "P5"]
    trades = [e for e in doc["edges"] if e["id"].startswith("trade")]
    assert len(trades) == 3 and all(1 <= e["profit"] <= 2 for e in trades)


# ---- failures -----------------------------------------------------------


def test_validation_errors_are_listed(tmp_path, capsys):
    doc = fixture_document("E1")
    doc["edges"][1]["profit"] = -1
    doc["edges"][4]["upper"] = -2
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, err = call(capsys, "ea", str(path))
    assert code == 1 and out == ""
    assert "negative profit" in err and "negative capacity" in err


def test_missing_file_and_bad_json(tmp_path, capsys):
    assert call(capsys, "solve", str(tmp_path / "nope.json"))[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call(capsys, "solve", str(bad))[0] == 1


def test_core_check_vector_must_cover_players(capsys):
    code, _, err = call(capsys, "core-check", "E1", "--vector", "A=8,B=0,Z=1")
    assert code == 1 and "lacks player C" in err and "unknown player Z" in err
    assert call(capsys, "core-check", "E1", "--vector", "A=0.5,B=0,C=0")[0] == 1


def test_bad_generator_parameters(capsys):
    assert call(capsys, "gen", "--players", "1")[0] == 1


def test_oracle_mismatch_exits_2(monkeypatch, capsys):
    monkeypatch.setattr(cli, "dutta_ray", lambda game: PaymentVector({p: Fraction(0) for p in game.players}))
    code, out, err = call(capsys, "ea", "E1")
    assert code == 2
    assert "invariant violated" in err and '"players"' in err  # the input is dumped
    assert json.loads(out)["checks"]["oracle_match"] is False


def test_internal_error_exits_2(monkeypatch, capsys):
    def broken(*a, **k):
        raise InvariantViolation("boom")

    monkeypatch.setattr(cli, "egalitarian_from_solution", broken)
    code, out, err = call(capsys, "ea", "E2")
    assert code == 2 and out == "" and "boom" in err


def test_missing_input():
    assert run(RunConfig("ea"))[0] == 1


# ---- fuzz gate ----------------------------------------------------------


def test_generated_instances_never_fail(tmp_path, capsys):
    for seed in range(200):
        code, out, _ = call(capsys, "gen", "--seed", str(seed))
        assert code == 0
        path = tmp_path / f"g{seed}.json"
        path.write_text(out)
        code, report, err = call(capsys, "ea", str(path), "--seed", str(seed))
        assert code == 0, err
        checks = json.loads(report)["checks"]
        assert checks["core"]["cr"] and checks["oracle_match"] in (True, "ambiguous")


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "egalflow.cli", "ea", "E2"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["payments"] == {"A": "4", "B": "4"}


@pytest.mark.parametrize("name", ["E1", "E2", "E3", "F1"])
def test_same_report_through_subprocess(name, capsys):
    in_process = call(capsys, "ea", name)[1]
    proc = subprocess.run([sys.executable, "-m", "egalflow.cli", "ea", name], capture_output=True, text=True)
    assert proc.stdout == in_process
