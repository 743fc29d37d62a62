import json

import pytest
from click.testing import CliRunner

from loopalg.cli import main, parse_lambda


@pytest.fixture
def runner():
    return CliRunner()


def test_parse_lambda_reduces():
    frac, value = parse_lambda("2/4")
    assert (frac.numerator, frac.denominator) == (1, 2)
    assert parse_lambda("1.25") == (None, 1.25)


def test_basis_lists_six_states(runner):
    res = runner.invoke(main, ["basis", "--N", "4", "--format", "json"])
    assert res.exit_code == 0
    rows = json.loads(res.output)
    assert len(rows) == 6
    assert [r["d"] for r in rows] == [0, 0, 2, 2, 2, 4]


def test_jordan_prediction_matches(runner):
    res = runner.invoke(main, ["jordan", "--N", "6", "--lambda", "1/2", "--u", "0.3", "--format", "json"])
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert sorted(map(tuple, out["predicted"])) == [(2, 0), (6, 4)]
    assert sorted(map(tuple, out["detected"])) == [(2, 0), (6, 4)]


def test_jordan_table_shows_both(runner):
    res = runner.invoke(main, ["jordan", "--N", "4", "--lambda", "1/2", "--operator", "F"])
    assert res.exit_code == 0
    assert "predicted: [(2, 0)]" in res.output and "detected:  [(2, 0)]" in res.output


def test_verify_braid_column_suite(runner):
    res = runner.invoke(main, ["verify", "--suite", "appendixB", "--N", "4", "--lambda", "2/5"])
    assert res.exit_code == 0
    assert res.output.startswith("[PASS] criterion 3")


def test_decimal_lambda_notice(runner):
    res = runner.invoke(main, ["spectrum", "--N", "3", "--lambda", "0.9"])
    assert res.exit_code == 0
    assert "decimal lambda" in res.output


def test_matrix_outputs(runner):
    res = runner.invoke(main, ["fmatrix", "--N", "3", "--lambda", "1/5", "--format", "json"])
    assert json.loads(res.output)["shape"] == [3, 3]
    res = runner.invoke(main, ["dmatrix", "--N", "2", "--lambda", "1/5", "--format", "csv"])
    assert res.exit_code == 0 and len(res.output.strip().splitlines()) == 2


def test_potts_command(runner):
    res = runner.invoke(main, ["potts", "--N", "4", "--M", "1", "--Q", "3"])
    assert res.exit_code == 0
    assert res.output.splitlines()[0] == "N,M,Q,u,Z_spin,Z_fk,Z_loop,max_rel_dev"


@pytest.mark.parametrize("args", [
    ["basis", "--N", "0"],
    ["basis", "--N", "4", "--lambda", "x/y"],
    ["jordan", "--N", "4", "--tol", "-1"],
    ["potts", "--N", "4", "--Q", "3", "--lambda", "1/4"],
])
def test_invalid_input_exit_code(runner, args):
    assert runner.invoke(main, args).exit_code == 2


def test_capacity_exit_code(runner):
    assert runner.invoke(main, ["dmatrix", "--N", "20"]).exit_code == 3


def test_precision_override(runner, monkeypatch):
    monkeypatch.setenv("LOOPALG_PRECISION", "bogus")
    assert runner.invoke(main, ["basis", "--N", "2"]).exit_code == 2


def test_deterministic_reports(runner):
    args = ["jordan", "--N", "6", "--lambda", "1/4", "--format", "json", "--seed", "5"]
    assert runner.invoke(main, args).output == runner.invoke(main, args).output


def test_braid_suite_alias(runner):
    res = runner.invoke(main, ["verify", "--suite", "braid", "--N", "3", "--lambda", "1/7"])
    assert res.exit_code == 0
