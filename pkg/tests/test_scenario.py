import numpy as np
import pytest
from hypothesis import given

from spotres import ScenarioError, format_scenario, parse_scenario
from spotres.scenario import fmt

from ex1 import P_R, SUPPLY, TYPES
from strategies import seeds

EX1_TEXT = """\
# comment line
market p_r=9.99 tie=reserve eps_tie=1e-9
type v=5 mass=0.49 curve=soft_budget b=0
type v=10 mass=0.5 curve=soft_budget b=9.99   # the budget type
type v=20 mass=0.01 curve=soft_budget b=0
supply q=0.99 prob=0.8
supply q=0.505 prob=0.2
"""


def test_parse_ex1():
    sc = parse_scenario(EX1_TEXT)
    assert sc.p_r == P_R and sc.supply == SUPPLY
    assert [a.value for a in sc.types] == [5, 10, 20]
    assert [a.curve for a in sc.types] == [a.curve for a in TYPES]


def test_piecewise_and_ties():
    sc = parse_scenario(
        "market p_r=1 tie=frac:0.25\n"
        "type v=4 mass=1 curve=piecewise pts=1:1,3:2\n"
        "supply q=0.5 prob=1\n"
    )
    (a,) = sc.types
    assert a.curve.knots == (1.0,) and a.curve.tail_slope == 0.5
    assert sc.tie.mode == "fraction" and sc.tie.theta == 0.25


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("", 1, "no market line"),
        ("market p_r=1\nsupply q=0.5 prob=1\n", 2, "no type atoms"),
        ("market p_r=1 colour=red\n", 1, "unknown key"),
        ("market p_r=1\nbid v=1\n", 2, "unknown directive"),
        ("market p_r=1\ntype v=1 mass=1 curve=soft_budget b=2\nsupply q=1 prob=1\n", 2, "budget"),
        ("market p_r=1\ntype v=1 mass=0.5 curve=soft_budget b=0\nsupply q=1 prob=1\n", 3, "sum"),
        ("market p_r=x\n", 1, "not a number"),
        ("market p_r=1 tie=maybe\n", 1, "tie policy"),
        ("market p_r=-1\ntype v=1 mass=1 curve=soft_budget b=0\nsupply q=1 prob=1\n", 1, "positive"),
        ("market p_r=1\ntype v=1 mass=1 curve=piecewise pts=1:2\nsupply q=1 prob=1\n", 2, "slope"),
    ],
)
def test_malformed(text, line, fragment):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert any(n == line and fragment in msg for n, msg in exc.value.findings), exc.value.findings


def test_all_findings_reported():
    text = "market p_r=1 junk=1\ntype v=1 mass=1\nsupply q=2 prob=1\n"
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert [n for n, _ in exc.value.findings][:2] == [1, 2]


def test_fmt():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(6.975) == "6.975"
    assert fmt(True) == "true" and fmt(float("inf")) == "inf" and fmt(float("nan")) == "nan"
    assert fmt(-0.0) == "0"


@given(seeds)
def test_round_trip(seed):
    from spotres.experiments import random_scenario

    sc = random_scenario(np.random.default_rng(seed))
    text = format_scenario(sc)
    again = parse_scenario(text)
    assert format_scenario(again) == text
    assert again.supply == parse_scenario(text).supply
    for a, b in zip(sc.types, again.types):
        assert a.value == b.value
        assert a.mass == pytest.approx(b.mass, rel=1e-11)
