import math

import pytest
from hypothesis import given

from spotres import (
    AssumptionViolated,
    SupplyDistribution,
    TypeAtom,
    TypeDistribution,
    UtilityCurve,
    benchmark_welfare,
    check_welfare_chain,
    make_soft_budget,
    optimal_reservation_price,
    run_dual,
    run_reservation_only,
    run_spot_only,
    solve,
    validate_assumptions,
)
from spotres.equilibrium import equilibrium_from_profile

import oracles
from ex1 import EPS, P_R, SUPPLY, TYPES
from strategies import scenario_from_seed, seeds

I = UtilityCurve.identity()


def test_ex1_revenues():
    assert run_spot_only(TYPES, SUPPLY).revenue == pytest.approx(5 - 3 * EPS, abs=1e-9)
    assert run_reservation_only(TYPES, SUPPLY, 10.0).revenue == pytest.approx(5 + 9 * EPS, abs=1e-9)
    assert run_dual(solve(TYPES, SUPPLY, P_R)).revenue == pytest.approx(7 - 2.5 * EPS, abs=1e-9)


def test_ex1_welfare_and_efficiency():
    spot = run_spot_only(TYPES, SUPPLY)
    dual = run_dual(solve(TYPES, SUPPLY, P_R))
    assert spot.welfare == pytest.approx(5.114, abs=1e-9)
    assert dual.welfare == pytest.approx(7.1, abs=1e-9)
    assert dual.efficiency == pytest.approx(7.1, abs=1e-9)
    assert spot.expected_spot_price == pytest.approx(6.0)


def test_full_supply_spot_is_free():
    out = run_spot_only(TYPES, SupplyDistribution([(1.0, 1.0)]))
    assert out.revenue == 0
    assert out.efficiency == pytest.approx(sum(a.value * a.mass for a in TYPES))


def test_reservation_edge_prices():
    out = run_reservation_only(TYPES, SUPPLY, 25.0)
    assert (out.revenue, out.welfare, out.efficiency) == (0, 0, 0)
    low = run_reservation_only(TYPES, SUPPLY, 1.0)
    assert low.revenue == pytest.approx(1.0 * SUPPLY.mean())


def test_dual_without_reservations_is_spot_only():
    types = TypeDistribution([TypeAtom(v, I, 0.25) for v in (1, 2, 3, 4)])
    supply = SupplyDistribution([(0.3, 0.5), (0.8, 0.5)])
    eq = solve(types, supply, 10.0)
    dual, spot = run_dual(eq), run_spot_only(types, supply)
    assert (dual.revenue, dual.welfare, dual.efficiency) == (spot.revenue, spot.welfare, spot.efficiency)
    chain = check_welfare_chain(eq)
    assert chain.ok
    assert chain.dual == pytest.approx(chain.benchmark, abs=1e-12)
    assert chain.dual == pytest.approx(chain.spot, abs=1e-12)


def test_ex1_benchmark_components():
    bench = benchmark_welfare(solve(TYPES, SUPPLY, P_R))
    by_q = {round(a.q, 6): a for a in bench.atoms}
    assert by_q[0.99].wel_minus == 0
    assert by_q[0.505].wel_minus == pytest.approx(10.0)
    assert all(c >= 0 for a in bench.atoms for c in (a.wel_minus, a.wel_plus, a.marginal))


def test_ex1_welfare_chain():
    chain = check_welfare_chain(solve(TYPES, SUPPLY, P_R))
    assert chain.ok
    assert chain.dual == pytest.approx(7.1) and chain.spot == pytest.approx(5.114)


def test_chain_and_benchmark_need_assumptions():
    types = TypeDistribution([TypeAtom(1, UtilityCurve.capped(0.1), 1.0)])
    eq = equilibrium_from_profile(types, SupplyDistribution([(0.3, 1.0)]), 0.5, [1.0])
    with pytest.raises(AssumptionViolated):
        benchmark_welfare(eq)
    with pytest.raises(AssumptionViolated):
        check_welfare_chain(eq)


def test_optimal_reservation_price_on_ex1():
    p = optimal_reservation_price(TYPES, SUPPLY)
    rev = run_reservation_only(TYPES, SUPPLY, p).revenue
    for v in (5.0, 10.0, 20.0, 7.5, 12.0):
        assert run_reservation_only(TYPES, SUPPLY, v).revenue <= rev + 1e-12


def test_efficiency_of_reservations_can_beat_dual():
    """Dual efficiency can fall below reservation-only efficiency at the same price.

    The v=10 soft-budget type reserves and is always served first.  When
    supply is short, the dual market hands the leftover 0.1 to v=20 buyers
    while a posted price at 9 rations all buyers alike, so it serves v=20
    buyers 0.3.  A1 and A2 both hold.
    """
    types = TypeDistribution([TypeAtom(10, make_soft_budget(10, 9.999), 0.5), TypeAtom(20, I, 0.5)])
    supply = SupplyDistribution([(1.0, 0.9), (0.6, 0.1)])
    eq = solve(types, supply, 9.0)
    a = validate_assumptions(eq)
    assert eq.reserve_fraction == (1.0, 0.0)
    assert a.a1 and a.a2
    assert run_dual(eq).efficiency == pytest.approx(14.2)
    assert run_reservation_only(types, supply, 9.0).efficiency == pytest.approx(14.4)


@given(seeds)
def test_metrics_match_reference(seed):
    sc = scenario_from_seed(seed)
    eq = solve(sc.types, sc.supply, sc.p_r, sc.tie)
    dual = run_dual(eq)
    ref = oracles.dual_metrics(sc.types, sc.supply, sc.p_r, eq.reserve_fraction)
    assert (dual.revenue, dual.welfare, dual.efficiency) == pytest.approx(ref, abs=1e-9)
    spot = run_spot_only(sc.types, sc.supply)
    ref = oracles.dual_metrics(sc.types, sc.supply, sc.p_r, [0.0] * len(sc.types))
    assert (spot.revenue, spot.welfare, spot.efficiency) == pytest.approx(ref, abs=1e-9)
    res = run_reservation_only(sc.types, sc.supply, sc.p_r)
    ref = oracles.reservation_metrics(sc.types, sc.supply, sc.p_r)
    assert (res.revenue, res.welfare, res.efficiency) == pytest.approx(ref, abs=1e-9)


@given(seeds)
def test_outcome_invariants(seed):
    sc = scenario_from_seed(seed)
    eq = solve(sc.types, sc.supply, sc.p_r, sc.tie)
    for out in (run_dual(eq), run_spot_only(sc.types, sc.supply), run_reservation_only(sc.types, sc.supply, sc.p_r)):
        assert out.efficiency >= 0
        buyer = sum(r.prob * sum(a.mass * x for a, x in zip(out.types, r.utility)) for r in out.records)
        assert out.welfare == pytest.approx(buyer + out.revenue, abs=1e-9)
        for r in out.records:
            assert all(-1e-12 <= x <= 1 + 1e-12 for x in r.allocation)
        # mass conservation: allocated mass never exceeds supply
        for r in out.records:
            assert sum(a.mass * x for a, x in zip(out.types, r.allocation)) <= r.q + 1e-9
    if all(a.curve.is_identity for a in sc.types):
        for out in (run_dual(eq), run_spot_only(sc.types, sc.supply)):
            assert out.welfare == pytest.approx(out.efficiency, abs=1e-9)
    e = validate_assumptions(eq).expected_spot_price
    assert math.isnan(e) or e >= 0
