"""Comparative statics, indifference budgets, price sweeps and random scenarios."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .curves import (
    RiskOrder,
    UtilityCurve,
    compare_risk_aversion,
    compose_concave,
    evaluate,
    make_soft_budget,
)
from .equilibrium import (
    AssumptionViolated,
    Equilibrium,
    TieBreakPolicy,
    expected_spot_utility,
    solve,
    validate_assumptions,
)
from .mechanisms import run_dual
from .population import SupplyDistribution, TypeAtom, TypeDistribution
from .scenario import Scenario

STATICS_TOL = 1e-9


class NotMoreAverse(ValueError):
    pass


class NoValidPrice(ValueError):
    pass


Transform = Callable[[TypeAtom], UtilityCurve] | Mapping[TypeAtom, UtilityCurve]


def apply_risk_transform(types: TypeDistribution, g: Transform) -> TypeDistribution:
    """Replace every curve by ``g(atom)``, which must be at least as risk-averse."""
    lookup = g.__getitem__ if isinstance(g, Mapping) else g
    curves = []
    for a in types:
        new = lookup(a)
        order = compare_risk_aversion(new, a.curve)
        if order not in (RiskOrder.MORE_AVERSE, RiskOrder.EQUAL):
            raise NotMoreAverse(f"transform of {a} is {order.value}, not more risk-averse")
        curves.append(new)
    return types.with_curves(curves)


@dataclass(frozen=True)
class StaticsReport:
    grid: tuple[float, ...]
    T: tuple[float, ...]
    T_plus: tuple[float, ...]
    S: tuple[float, ...]
    S_plus: tuple[float, ...]
    revenue: float
    revenue_plus: float

    @property
    def reserve_slack(self) -> float:
        return min(tp - t for t, tp in zip(self.T, self.T_plus))

    @property
    def price_slack(self) -> float:
        return min(s - sp for s, sp in zip(self.S, self.S_plus))

    @property
    def revenue_slack(self) -> float:
        return self.revenue_plus - self.revenue

    @property
    def t_ok(self) -> bool:
        return self.reserve_slack >= -STATICS_TOL

    @property
    def s_ok(self) -> bool:
        return self.price_slack >= -STATICS_TOL

    @property
    def rev_ok(self) -> bool:
        return self.revenue_slack >= -STATICS_TOL

    @property
    def ok(self) -> bool:
        return self.t_ok and self.s_ok and self.rev_ok


def check_statics(
    types: TypeDistribution,
    types_plus: TypeDistribution,
    supply: SupplyDistribution,
    p_r: float,
    tie: TieBreakPolicy | None = None,
) -> StaticsReport:
    """Compare equilibria before and after risk aversion increases."""
    eq = solve(types, supply, p_r, tie)
    eq_plus = solve(types_plus, supply, p_r, tie)
    for label, e in (("original", eq), ("transformed", eq_plus)):
        a = validate_assumptions(e)
        if not (a.a1 and a.a2):
            raise AssumptionViolated(f"{label} scenario: A1={a.a1} A2={a.a2}")
    grid = tuple(sorted({0.0, *types.values, *types_plus.values}))
    return StaticsReport(
        grid,
        tuple(eq.T_at(p) for p in grid),
        tuple(eq_plus.T_at(p) for p in grid),
        tuple(eq.S_at(p) for p in grid),
        tuple(eq_plus.S_at(p) for p in grid),
        run_dual(eq).revenue,
        run_dual(eq_plus).revenue,
    )


def _prefers_reserving(eq: Equilibrium, v: float, b: float) -> bool:
    curve = make_soft_budget(v, b)
    # weak preference up to the same tolerance the solver uses for ties
    return evaluate(curve, v - eq.p_r) >= expected_spot_utility(v, curve, eq.spot_dist) - eq.tie.eps_tie


def indifference_budgets(
    eq: Equilibrium, values: Sequence[float] | None = None, delta: float = 1e-6
) -> dict[float, float | None]:
    """Least soft budget at which a measure-zero buyer of value ``v`` reserves.

    Found by bisection to within ``delta``; None when no budget below ``v``
    makes reserving attractive.
    """
    values = eq.types.values if values is None else values
    out: dict[float, float | None] = {}
    for v in values:
        v = float(v)
        if v < eq.p_r:
            out[v] = None
            continue
        if _prefers_reserving(eq, v, 0.0):
            out[v] = 0.0
            continue
        hi = v - min(delta, v - eq.p_r) / 2 if v > eq.p_r else v - delta / 2
        if hi <= 0 or not _prefers_reserving(eq, v, hi):
            out[v] = None
            continue
        lo = 0.0
        while hi - lo > delta:
            mid = 0.5 * (lo + hi)
            if _prefers_reserving(eq, v, mid):
                hi = mid
            else:
                lo = mid
        out[v] = hi
    return out


@dataclass(frozen=True)
class SweepRow:
    p_r: float
    revenue: float
    welfare: float
    efficiency: float
    T: float
    a1: bool
    a2: bool
    expected_spot_price: float


@dataclass(frozen=True)
class Sweep:
    rows: tuple[SweepRow, ...]
    best: SweepRow


def sweep_reservation_price(
    types: TypeDistribution,
    supply: SupplyDistribution,
    grid: Sequence[float],
    tie: TieBreakPolicy | None = None,
) -> Sweep:
    """Solve at every grid price; the best row maximizes revenue under A1 and A2."""
    if not grid:
        raise ValueError("empty price grid")
    rows = []
    for p in sorted(grid):
        if p <= 0:
            raise ValueError(f"reservation prices must be positive, got {p!r}")
        eq = solve(types, supply, p, tie)
        a = validate_assumptions(eq)
        out = run_dual(eq)
        rows.append(SweepRow(p, out.revenue, out.welfare, out.efficiency, eq.total_reserved, a.a1, a.a2, a.expected_spot_price))
    best = None
    for r in rows:
        # strict improvement keeps the lowest price among ties
        if r.a1 and r.a2 and (best is None or r.revenue > best.revenue):
            best = r
    if best is None:
        raise NoValidPrice("no grid price satisfies both A1 and A2")
    return Sweep(tuple(rows), best)


def parse_grid(text: str) -> list[float]:
    """``lo:hi:step`` inclusive of ``hi``."""
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ValueError(f"grid must be lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise ValueError(f"bad grid {text!r}")
    n = int(np.floor((hi - lo) / step + 1e-9))
    return [round(lo + k * step, 12) for k in range(n + 1)]


# -- random scenarios -------------------------------------------------------


def random_curve(rng: np.random.Generator, max_knots: int = 3, scale: float = 1.0) -> UtilityCurve:
    """Random concave normalized curve with up to ``max_knots`` kinks."""
    k = int(rng.integers(0, max_knots + 1))
    if k == 0:
        return UtilityCurve.identity()
    knots = np.sort(rng.choice(np.arange(1, 41), size=k, replace=False)) * scale / 40
    slope = 1.0
    pts = []
    z0 = u0 = 0.0
    for z in knots:
        u0 += slope * (z - z0)
        z0 = z
        pts.append((float(z), u0))
        slope *= float(rng.choice([0.0, rng.uniform(0.05, 0.95)], p=[0.15, 0.85]))
    return UtilityCurve.from_points(pts, tail_slope=slope)


def random_curve_for(rng: np.random.Generator, value: float, kind: str) -> UtilityCurve:
    if kind == "identity":
        return UtilityCurve.identity()
    if kind == "soft_budget" or (kind == "mixed" and rng.random() < 0.6):
        if rng.random() < 0.25:
            return UtilityCurve.identity()
        return make_soft_budget(value, float(rng.uniform(0, value * 0.999)))
    return random_curve(rng, scale=value)


def random_scenario(
    rng: np.random.Generator,
    max_types: int = 12,
    max_supply: int = 6,
    curves: str = "mixed",
    p_r: float | None = None,
) -> Scenario:
    """Seeded random scenario.

    Values come from {0.1, ..., 1.0}, masses from a flat Dirichlet, supply
    atoms from {0.05, ..., 1.0} with at least one below 1.
    """
    n = int(rng.integers(1, max_types + 1))
    values = rng.integers(1, 11, size=n) / 10
    masses = rng.dirichlet(np.ones(n))
    masses = np.maximum(masses, 1e-6)
    masses /= masses.sum()
    atoms = [
        TypeAtom(float(v), random_curve_for(rng, float(v), curves), float(m))
        for v, m in zip(values, masses)
    ]
    k = int(rng.integers(1, max_supply + 1))
    qs = rng.choice(np.arange(1, 21), size=k, replace=False) / 20
    if qs.min() >= 1.0:
        qs[0] = rng.integers(1, 20) / 20
    probs = rng.dirichlet(np.ones(k))
    probs = np.maximum(probs, 1e-6)
    probs /= probs.sum()
    supply = SupplyDistribution(zip(qs.tolist(), probs.tolist()))
    if p_r is None:
        p_r = float(rng.uniform(0.05, 1.0))
    return Scenario(TypeDistribution(atoms), supply, p_r)


def random_valid_scenario(
    rng: np.random.Generator, max_tries: int = 10_000, **kwargs
) -> tuple[Scenario, Equilibrium]:
    """Random scenario whose equilibrium satisfies A1 and A2."""
    for _ in range(max_tries):
        sc = random_scenario(rng, **kwargs)
        eq = solve(sc.types, sc.supply, sc.p_r, sc.tie)
        a = validate_assumptions(eq)
        if a.a1 and a.a2:
            return sc, eq
    raise RuntimeError("could not draw a scenario satisfying A1 and A2")


def random_transforms(rng: np.random.Generator, types: TypeDistribution) -> list[UtilityCurve]:
    """One concave transform per atom; about a third are the identity."""
    out = []
    for a in types:
        if rng.random() < 0.35:
            out.append(UtilityCurve.identity())
        else:
            out.append(random_curve(rng, max_knots=2, scale=a.value))
    return out


def transformed(types: TypeDistribution, transforms: Sequence[UtilityCurve]) -> TypeDistribution:
    """Compose atom ``i`` with ``transforms[i]``, checked through :func:`apply_risk_transform`."""
    table = {a: compose_concave(a.curve, t) for a, t in zip(types, transforms, strict=True)}
    return apply_risk_transform(types, table)
