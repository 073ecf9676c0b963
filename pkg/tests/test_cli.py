import csv
import io
from pathlib import Path

import pytest

from spotres.cli import main

ROOT = Path(__file__).resolve().parents[1]
EX1 = str(ROOT / "scenarios" / "ex1.mkt")
EMPTY = str(ROOT / "scenarios" / "empty.mkt")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_compare_ex1(capsys):
    code, out, _ = run(capsys, "compare", EX1)
    assert code == 0
    table = {r["mechanism"]: r for r in rows(out)}
    assert list(rows(out)[0]) == ["mechanism", "p_r", "revenue", "welfare", "efficiency", "T", "E_spot_price", "A1", "A2"]
    assert float(table["spot"]["revenue"]) == pytest.approx(4.97, abs=1e-9)
    assert float(table["reservation"]["revenue"]) == pytest.approx(5.09, abs=1e-9)
    assert float(table["dual"]["revenue"]) == pytest.approx(6.975, abs=1e-9)
    assert table["reservation"]["p_r"] == "10"


def test_compare_with_given_price(capsys):
    code, out, _ = run(capsys, "compare", EX1, "--reservation-price", "5")
    table = {r["mechanism"]: r for r in rows(out)}
    assert code == 0 and table["reservation"]["p_r"] == "5"


def test_validate_ex1(capsys):
    code, out, _ = run(capsys, "validate", EX1)
    checks = {r["check"]: r["value"] for r in rows(out)}
    assert code == 0
    assert checks["A1"] == "true" and checks["A2"] == "true"
    assert float(checks["fixed_point_residual"]) < 1e-9
    assert float(checks["max_residual"]) < 1e-9


def test_solve_empty(capsys):
    code, out, err = run(capsys, "solve", EMPTY)
    assert code == 2 and out == ""
    assert "no type atoms" in err
    assert err.strip().startswith(f"{EMPTY}:")


def test_round_trip(tmp_path, capsys):
    table = tmp_path / "eq.csv"
    assert run(capsys, "solve", EX1, "--out", str(table))[0] == 0
    code, out, _ = run(capsys, "validate", EX1, "--equilibrium", str(table))
    assert code == 0
    assert {r["check"]: r["value"] for r in rows(out)}["tables_match"] == "true"
    # a tampered table is caught
    text = table.read_text().replace("0.5,0.8", "0.4,0.8")
    table.write_text(text)
    code, out, err = run(capsys, "validate", EX1, "--equilibrium", str(table))
    assert code == 2 and "differs" in err


def test_byte_stable(capsys):
    for argv in (["solve", EX1], ["compare", EX1], ["mc", EX1, "--agents", "20000", "--draws", "200", "--seed", "3"]):
        first = run(capsys, *argv)
        assert run(capsys, *argv) == first


def test_sweep(capsys):
    code, out, err = run(capsys, "sweep", EX1, "--grid", "1:20:1")
    assert code == 0
    assert "best p_r=9" in err
    assert len(rows(out)) == 20
    code, _, err = run(capsys, "sweep", EX1)
    assert code == 2 and "--grid" in err


def test_sweep_no_valid_price(tmp_path, capsys):
    sc = tmp_path / "short.mkt"
    sc.write_text("market p_r=1\ntype v=1 mass=1 curve=soft_budget b=0.9\nsupply q=0.2 prob=1\n")
    code, _, err = run(capsys, "sweep", str(sc), "--grid", "0.5:1:0.5")
    assert code == 2 and "A1 and A2" in err


def test_statics(tmp_path, capsys):
    tf = tmp_path / "t.txt"
    tf.write_text("# tighten everybody\ntransform curve=piecewise pts=1:1,2:1.5\ntransform v=10 curve=soft_budget b=9.995\n")
    code, out, err = run(capsys, "statics", EX1, "--transform", str(tf))
    assert code == 0
    assert list(rows(out)[0]) == ["p", "T", "T_plus", "S", "S_plus"]
    assert "T_ok=true" in err and "S_ok=true" in err and "revenue_ok=true" in err


def test_statics_bad_transform(tmp_path, capsys):
    tf = tmp_path / "t.txt"
    tf.write_text("transform curve=piecewise pts=1:2\nwarp v=3\n")
    code, _, err = run(capsys, "statics", EX1, "--transform", str(tf))
    assert code == 2
    assert f"{tf}:1:" in err and f"{tf}:2:" in err


def test_curve(capsys):
    code, out, _ = run(capsys, "curve", EX1)
    b = {r["v"]: r["b_I"] for r in rows(out)}
    assert code == 0 and b["5"] == "none"
    assert float(b["10"]) == pytest.approx(9.9875, abs=1e-6)


def test_mc(capsys):
    code, out, err = run(capsys, "mc", EX1, "--agents", "100000", "--draws", "1000", "--seed", "5")
    assert code == 0
    assert "numpy.random.PCG64" in err and "seed=5" in err
    assert [r["metric"] for r in rows(out)] == ["revenue", "welfare", "efficiency", "max_regret"]


def test_missing_file_and_bad_usage(capsys):
    assert run(capsys, "solve", "/nonexistent.mkt")[0] == 2
    assert run(capsys, "frobnicate", EX1)[0] == 2
    assert run(capsys)[0] == 2


def test_internal_error_exit_code(monkeypatch, capsys):
    import spotres.cli as cli

    def boom(sc, args):
        raise RuntimeError("kaboom")

    monkeypatch.setitem(cli.COMMANDS, "solve", boom)
    code, _, err = run(capsys, "solve", EX1)
    assert code == 1 and "kaboom" in err
