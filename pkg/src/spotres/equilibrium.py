"""Subgame-perfect equilibrium of the reservation + spot mechanism.

The reservation decision of a type at value ``v`` only depends on spot
prices strictly below ``v``, and those are pinned down by decisions of
lower-valued types.  Sweeping values upward therefore fixes the reserved
volume ``T`` and the spot-price CDF ``S`` one value at a time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .clearing import SpotAtom, clearing_price_distribution, price_cdf
from .curves import UtilityCurve, evaluate
from .population import (
    InvalidScenario,
    SupplyDistribution,
    TypeAtom,
    TypeDistribution,
    supply_cdf_strict,
)


class AssumptionViolated(ValueError):
    """A1 (no oversubscription) or A2 (p_r above the expected spot price) fails."""


class PriceAtom(NamedTuple):
    price: float
    prob: float
    trades: bool = True


@dataclass(frozen=True)
class TieBreakPolicy:
    """How types within ``eps_tie`` of indifference split their demand.

    ``mode`` is ``"reserve"``, ``"spot"`` or ``"fraction"``; in the last case
    ``theta`` is the share that reserves.
    """

    mode: str = "reserve"
    theta: float = 1.0
    eps_tie: float = 1e-9

    def __post_init__(self) -> None:
        if self.mode not in ("reserve", "spot", "fraction"):
            raise ValueError(f"unknown tie mode {self.mode!r}")
        if not 0 <= self.theta <= 1:
            raise ValueError("theta must lie in [0, 1]")
        if not self.eps_tie > 0:
            raise ValueError("eps_tie must be positive")

    @classmethod
    def fraction(cls, theta: float, eps_tie: float = 1e-9) -> "TieBreakPolicy":
        return cls("fraction", theta, eps_tie)

    @property
    def reserve_share(self) -> float:
        return {"reserve": 1.0, "spot": 0.0}.get(self.mode, self.theta)

    def decide(self, reserve_u: float, spot_u: float) -> float:
        if reserve_u > spot_u + self.eps_tie:
            return 1.0
        if reserve_u < spot_u - self.eps_tie:
            return 0.0
        return self.reserve_share


@dataclass(frozen=True)
class Equilibrium:
    """A strategy profile together with its reserved volume and spot prices.

    ``reserve_fraction[i]`` is the share of ``types.atoms[i]`` that reserves.
    ``grid`` is ``{0} U values``; ``T_cum`` and ``S`` are tabulated on it.
    """

    types: TypeDistribution
    supply: SupplyDistribution
    p_r: float
    tie: TieBreakPolicy
    reserve_fraction: tuple[float, ...]
    grid: tuple[float, ...]
    T_cum: tuple[float, ...]
    S: tuple[float, ...]
    spot_dist: tuple[SpotAtom, ...]

    @property
    def total_reserved(self) -> float:
        return self.T_cum[-1]

    def T_at(self, p: float) -> float:
        return sum(y * a.mass for y, a in zip(self.reserve_fraction, self.types) if a.value <= p)

    def S_at(self, p: float) -> float:
        return price_cdf(self.spot_dist, p)

    def reserving(self) -> list[TypeAtom]:
        return [a for y, a in zip(self.reserve_fraction, self.types) if y > 0]

    def residual(self) -> list[TypeAtom]:
        return [
            TypeAtom(a.value, a.curve, (1.0 - y) * a.mass)
            for y, a in zip(self.reserve_fraction, self.types)
        ]

    def Y(self, v: float) -> float:
        """Mass-weighted reserve share among types at value ``v``."""
        num = den = 0.0
        for y, a in zip(self.reserve_fraction, self.types):
            if a.value == v:
                num += y * a.mass
                den += a.mass
        return num / den if den else 0.0


def expected_spot_utility(
    value: float, curve: UtilityCurve, spot_dist: Iterable[PriceAtom | SpotAtom]
) -> float:
    """Expected utility of skipping the reservation and bidding ``value`` on the spot market."""
    total = 0.0
    for atom in spot_dist:
        if atom.trades and atom.price < value:
            total += atom.prob * evaluate(curve, value - atom.price)
    return total


def reserve_utility(value: float, curve: UtilityCurve, p_r: float) -> float | None:
    """Utility of a guaranteed reservation; None when ``value < p_r``."""
    if value < p_r:
        return None
    return evaluate(curve, value - p_r)


def equilibrium_from_profile(
    types: TypeDistribution,
    supply: SupplyDistribution,
    p_r: float,
    reserve_fraction: Sequence[float],
    tie: TieBreakPolicy | None = None,
) -> Equilibrium:
    """Tabulate ``T`` and ``S`` for an arbitrary strategy profile."""
    tie = tie or TieBreakPolicy()
    y = tuple(float(x) for x in reserve_fraction)
    if len(y) != len(types):
        raise InvalidScenario("profile length does not match the type atoms")
    if any(not 0 <= x <= 1 for x in y):
        raise InvalidScenario("reserve fractions must lie in [0, 1]")
    grid = (0.0, *types.values)
    T_cum = []
    for p in grid:
        T_cum.append(sum(x * a.mass for x, a in zip(y, types) if a.value <= p))
    residual = [TypeAtom(a.value, a.curve, (1.0 - x) * a.mass) for x, a in zip(y, types)]
    spot = tuple(clearing_price_distribution(residual, supply, reserved=T_cum[-1]))
    S = tuple(price_cdf(spot, p) for p in grid)
    return Equilibrium(types, supply, float(p_r), tie, y, grid, tuple(T_cum), S, spot)


def solve(
    types: TypeDistribution,
    supply: SupplyDistribution,
    p_r: float,
    tie: TieBreakPolicy | None = None,
) -> Equilibrium:
    """Unique equilibrium for reservation price ``p_r`` under ``tie``."""
    tie = tie or TieBreakPolicy()
    if not (p_r > 0) or math.isinf(p_r):
        raise InvalidScenario(f"reservation price must be positive and finite, got {p_r!r}")
    atoms = types.atoms
    y = [0.0] * len(atoms)
    # masses strictly above each distinct value, accumulated from the top
    values = types.values
    above = {}
    acc = 0.0
    for v in reversed(values):
        above[v] = acc
        acc += sum(a.mass for a in atoms if a.value == v)
    total_mass = acc

    # prices below the value currently being processed
    lottery: list[PriceAtom] = []
    S_prev = 1.0 - supply_cdf_strict(supply, total_mass)
    if S_prev > 0:
        lottery.append(PriceAtom(0.0, S_prev))
    T = 0.0
    i = 0
    for v in values:
        while i < len(atoms) and atoms[i].value == v:
            a = atoms[i]
            r = reserve_utility(v, a.curve, p_r)
            if r is not None:
                y[i] = tie.decide(r, expected_spot_utility(v, a.curve, lottery))
            T += y[i] * a.mass
            i += 1
        S_v = 1.0 - supply_cdf_strict(supply, above[v] + T)
        if S_v > S_prev:
            lottery.append(PriceAtom(v, S_v - S_prev))
            S_prev = S_v
    return equilibrium_from_profile(types, supply, p_r, y, tie)


@dataclass(frozen=True)
class EquilibriumReport:
    spot_cdf_residual: float
    reserved_residual: float
    deviation_gain: float  # best unilateral gain over all types; <= 0 means none
    worst_type: int | None
    eps_tie: float

    @property
    def max_residual(self) -> float:
        return max(
            self.spot_cdf_residual,
            self.reserved_residual,
            self.deviation_gain - self.eps_tie,
            0.0,
        )

    @property
    def ok(self) -> bool:
        return self.max_residual < 1e-9


def verify_equilibrium(eq: Equilibrium) -> EquilibriumReport:
    """Check both fixed-point identities and every type's best response."""
    types, supply = eq.types, eq.supply
    s_res = t_res = 0.0
    for k, p in enumerate(eq.grid):
        T_p = sum(y * a.mass for y, a in zip(eq.reserve_fraction, types) if a.value <= p)
        t_res = max(t_res, abs(eq.T_cum[k] - T_p))
        target = 1.0 - supply_cdf_strict(supply, types.mass_above(p) + T_p)
        s_res = max(s_res, abs(eq.S[k] - target), abs(eq.S_at(p) - target))

    gain = -math.inf
    worst = None
    for i, (y, a) in enumerate(zip(eq.reserve_fraction, types)):
        c = expected_spot_utility(a.value, a.curve, eq.spot_dist)
        r = reserve_utility(a.value, a.curve, eq.p_r)
        cands = []
        if y > 0:
            # reserving below value: the loss is at least the overpayment
            cands.append(c - r if r is not None else c + (eq.p_r - a.value))
        if y < 1 and r is not None:
            cands.append(r - c)
        for g in cands:
            if g > gain:
                gain, worst = g, i
    if worst is None:
        gain = 0.0
    return EquilibriumReport(s_res, t_res, gain, worst, eq.tie.eps_tie)


@dataclass(frozen=True)
class AssumptionReport:
    a1: bool  # reservations never oversubscribed
    a2: bool  # p_r at least the expected spot price
    expected_spot_price: float
    no_trade: bool  # some supply atom ends without a spot trade


def validate_assumptions(eq: Equilibrium) -> AssumptionReport:
    a1 = supply_cdf_strict(eq.supply, eq.total_reserved) == 0
    trading = [a for a in eq.spot_dist if a.trades]
    prob = sum(a.prob for a in trading)
    if prob > 0:
        e_price = sum(a.prob * a.price for a in trading) / prob
    else:
        e_price = math.nan
    a2 = prob > 0 and eq.p_r >= e_price
    no_trade = len(trading) < len(eq.spot_dist)
    return AssumptionReport(a1, a2, e_price, no_trade)
