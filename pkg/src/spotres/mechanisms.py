"""Revenue, welfare and efficiency of the spot-only, reservation-only and dual mechanisms."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .curves import UtilityCurve, evaluate
from .equilibrium import (
    AssumptionViolated,
    Equilibrium,
    TieBreakPolicy,
    equilibrium_from_profile,
    validate_assumptions,
)
from .population import SupplyDistribution, TypeDistribution

CHAIN_TOL = 1e-9


@dataclass(frozen=True)
class AtomRecord:
    """Outcome at one supply atom; per-type entries are per unit of type mass."""

    q: float
    prob: float
    price: float  # spot price, nan when there is no spot stage
    trades: bool
    allocation: tuple[float, ...]
    payment: tuple[float, ...]
    utility: tuple[float, ...]
    revenue: float


@dataclass(frozen=True)
class MechanismOutcome:
    mechanism: str
    p_r: float
    types: TypeDistribution
    records: tuple[AtomRecord, ...]
    revenue: float
    buyer_utility: float
    efficiency: float
    reserved: float

    @property
    def welfare(self) -> float:
        return self.buyer_utility + self.revenue

    @property
    def expected_spot_price(self) -> float:
        trading = [r for r in self.records if r.trades and not math.isnan(r.price)]
        prob = sum(r.prob for r in trading)
        return sum(r.prob * r.price for r in trading) / prob if prob > 0 else math.nan

    def allocation_probability(self, i: int) -> float:
        return sum(r.prob * r.allocation[i] for r in self.records)


def _u(curve: UtilityCurve, z: float) -> float:
    # only externally supplied profiles can reserve above value
    return evaluate(curve, z) if z >= 0 else z


def _evaluate_profile(name: str, eq: Equilibrium) -> MechanismOutcome:
    types = eq.types
    y = eq.reserve_fraction
    T = eq.total_reserved
    records = []
    for spot in eq.spot_dist:
        served = min(spot.q, T)
        r_alloc = served / T if T > 0 else 0.0
        alloc, pay, util = [], [], []
        for i, a in enumerate(types):
            x_s = spot.allocation[i] * (1.0 - y[i])
            x_r = r_alloc * y[i]
            alloc.append(x_r + x_s)
            p = x_r * eq.p_r
            u = 0.0
            if x_r > 0:
                u += x_r * _u(a.curve, a.value - eq.p_r)
            if x_s > 0:
                p += x_s * spot.price
                u += x_s * evaluate(a.curve, a.value - spot.price)
            pay.append(p)
            util.append(u)
        revenue = eq.p_r * served
        if spot.trades and spot.sold_mass > 0:
            revenue += spot.price * spot.sold_mass
        price = spot.price if math.isfinite(spot.price) else math.nan
        records.append(
            AtomRecord(spot.q, spot.prob, price, spot.trades, tuple(alloc), tuple(pay), tuple(util), revenue)
        )
    return _aggregate(name, eq.p_r, types, records, T)


def _aggregate(name, p_r, types, records, reserved) -> MechanismOutcome:
    revenue = sum(r.prob * r.revenue for r in records)
    buyer = sum(r.prob * sum(a.mass * u for a, u in zip(types, r.utility)) for r in records)
    eff = sum(r.prob * sum(a.mass * a.value * x for a, x in zip(types, r.allocation)) for r in records)
    return MechanismOutcome(name, p_r, types, tuple(records), revenue, buyer, eff, reserved)


def run_spot_only(types: TypeDistribution, supply: SupplyDistribution) -> MechanismOutcome:
    """Clear every supply atom against the whole population."""
    # the same code path as the dual mechanism with nobody reserving
    eq = equilibrium_from_profile(types, supply, 0.0, [0.0] * len(types))
    return _evaluate_profile("spot", eq)


def run_dual(eq: Equilibrium) -> MechanismOutcome:
    """Reservations first (rationed if oversubscribed), then a spot auction on what is left."""
    return _evaluate_profile("dual", eq)


def reservation_buyers(
    types: TypeDistribution, p_r: float, tie: TieBreakPolicy | None = None
) -> list[float]:
    """Share of each type buying at the posted price ``p_r``."""
    tie = tie or TieBreakPolicy()
    return [tie.decide(evaluate(a.curve, a.value - p_r), 0.0) if a.value >= p_r else 0.0 for a in types]


def run_reservation_only(
    types: TypeDistribution,
    supply: SupplyDistribution,
    p_r: float,
    tie: TieBreakPolicy | None = None,
) -> MechanismOutcome:
    """Posted price ``p_r``; buyers are served uniformly at random when supply binds."""
    buy = reservation_buyers(types, p_r, tie)
    D = sum(b * a.mass for b, a in zip(buy, types))
    records = []
    for q, prob in supply:
        served = min(q, D)
        frac = served / D if D > 0 else 0.0
        alloc = tuple(frac * b for b in buy)
        pay = tuple(x * p_r for x in alloc)
        util = tuple(x * evaluate(a.curve, a.value - p_r) if x > 0 else 0.0 for x, a in zip(alloc, types))
        records.append(AtomRecord(q, prob, math.nan, served > 0, alloc, pay, util, p_r * served))
    return _aggregate("reservation", float(p_r), types, records, D)


def optimal_reservation_price(
    types: TypeDistribution, supply: SupplyDistribution, tie: TieBreakPolicy | None = None
) -> float:
    """Revenue-maximizing posted price.

    Demand only drops at values, so revenue is increasing between them and
    the optimum sits at a value in the support.
    """
    best, best_rev = types.values[0], -math.inf
    for v in types.values:
        rev = run_reservation_only(types, supply, v, tie).revenue
        if rev > best_rev:
            best, best_rev = v, rev
    return best


@dataclass(frozen=True)
class BenchmarkAtom:
    q: float
    prob: float
    price: float
    wel_minus: float  # reservers at or below the dual spot price pay it, no utility
    wel_plus: float  # everyone above the dual spot price pays it
    marginal: float  # payments of spot buyers rationed exactly at the price

    @property
    def total(self) -> float:
        return self.wel_minus + self.wel_plus + self.marginal


@dataclass(frozen=True)
class BenchmarkWelfare:
    atoms: tuple[BenchmarkAtom, ...]

    @property
    def expected(self) -> float:
        return sum(a.prob * a.total for a in self.atoms)


def _welfare_at_price(curve: UtilityCurve, value: float, price: float) -> float:
    return evaluate(curve, value - price) + price


def benchmark_welfare(eq: Equilibrium) -> BenchmarkWelfare:
    """Welfare if every served reserver paid the dual spot price instead of ``p_r``."""
    if not validate_assumptions(eq).a1:
        raise AssumptionViolated("benchmark welfare needs reservations to be fully served")
    types = eq.types
    out = []
    for spot in eq.spot_dist:
        P = spot.price
        minus = P * eq.T_at(P)
        plus = sum(_welfare_at_price(a.curve, a.value, P) * a.mass for a in types if a.value > P)
        marginal = 0.0
        for i, a in enumerate(types):
            if a.value == P:
                marginal += P * spot.allocation[i] * (1.0 - eq.reserve_fraction[i]) * a.mass
        out.append(BenchmarkAtom(spot.q, spot.prob, P, minus, plus, marginal))
    return BenchmarkWelfare(tuple(out))


@dataclass(frozen=True)
class WelfareChain:
    dual: float
    benchmark: float
    spot: float
    dual_over_benchmark: bool  # E[WEL(dual)] >= E[WEL(benchmark)]
    benchmark_over_spot: bool  # WEL_q(benchmark) >= WEL_q(spot) at every supply atom
    dual_over_spot: bool  # WEL(dual) >= WEL(spot)
    price_dominance: bool  # dual spot price >= spot-only price at every supply atom

    @property
    def ok(self) -> bool:
        return self.dual_over_benchmark and self.benchmark_over_spot and self.dual_over_spot and self.price_dominance


def _spot_welfare_by_atom(outcome: MechanismOutcome) -> list[float]:
    types = outcome.types
    return [r.revenue + sum(a.mass * u for a, u in zip(types, r.utility)) for r in outcome.records]


def check_welfare_chain(eq: Equilibrium) -> WelfareChain:
    """WEL(spot) <= WEL(benchmark) <= WEL(dual), checked atom by atom where it applies."""
    assumptions = validate_assumptions(eq)
    if not (assumptions.a1 and assumptions.a2):
        raise AssumptionViolated(f"welfare chain needs A1 and A2, got {assumptions}")
    dual = run_dual(eq)
    spot = run_spot_only(eq.types, eq.supply)
    bench = benchmark_welfare(eq)
    spot_q = _spot_welfare_by_atom(spot)
    benchmark_over_spot = all(b.total >= s - CHAIN_TOL for b, s in zip(bench.atoms, spot_q))
    dominance = all(
        d.price >= s.price - 1e-12 for d, s in zip(eq.spot_dist, spot.records)
    )
    return WelfareChain(
        dual=dual.welfare,
        benchmark=bench.expected,
        spot=spot.welfare,
        dual_over_benchmark=dual.welfare >= bench.expected - CHAIN_TOL,
        benchmark_over_spot=benchmark_over_spot,
        dual_over_spot=dual.welfare >= spot.welfare - CHAIN_TOL,
        price_dominance=dominance,
    )

