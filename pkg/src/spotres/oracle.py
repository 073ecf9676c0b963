"""Finite-agent Monte Carlo check of an analytic equilibrium.

Each supply draw samples a fresh population of ``n_agents`` i.i.d. types
(as per-type counts), lets every agent play the equilibrium strategy, serves
reservations with uniform rationing and then runs a uniform-price spot
auction at the order statistic just below the residual capacity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import UtilityCurve
from .equilibrium import Equilibrium
from .mechanisms import MechanismOutcome, run_dual

GENERATOR = "numpy.random.PCG64"


@dataclass(frozen=True)
class SimulationConfig:
    n_agents: int = 1_000_000
    n_supply_draws: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise ValueError("n_agents must be at least 1")
        if self.n_supply_draws < 2:
            raise ValueError("need at least two supply draws for a standard error")


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_err: float

    def z_score(self, target: float) -> float:
        gap = self.mean - target
        if self.std_err == 0:
            return 0.0 if abs(gap) <= 1e-12 * max(1.0, abs(target)) else math.copysign(math.inf, gap)
        return gap / self.std_err

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.z_score(target)) <= k


@dataclass(frozen=True)
class SimulationResult:
    config: SimulationConfig
    revenue: Estimate
    welfare: Estimate
    efficiency: Estimate
    regret: tuple[Estimate, ...]  # per type atom
    generator: str = GENERATOR
    extra: dict = field(default_factory=dict)

    @property
    def max_regret(self) -> tuple[int, Estimate]:
        i = max(range(len(self.regret)), key=lambda j: self.regret[j].mean)
        return i, self.regret[i]


def curve_values(curve: UtilityCurve, z: np.ndarray) -> np.ndarray:
    """Vectorized evaluation; negative surplus is passed through linearly."""
    z = np.asarray(z, dtype=float)
    if not curve.knots:
        return z * curve.tail_slope
    xs = np.array((0.0, *curve.knots))
    us = np.array((0.0, *curve.values))
    out = np.interp(z, xs, us)
    tail = z > xs[-1]
    out[tail] = us[-1] + curve.tail_slope * (z[tail] - xs[-1])
    neg = z < 0
    out[neg] = z[neg]
    return out


def _split_uniform(rng: np.random.Generator, counts: np.ndarray, take: np.ndarray) -> np.ndarray:
    """Draw ``take[d]`` agents uniformly without replacement from row ``d`` of ``counts``."""
    out = np.zeros_like(counts)
    left = counts.sum(axis=1)
    need = take.astype(np.int64).copy()
    for i in range(counts.shape[1]):
        good = counts[:, i]
        bad = left - good
        drawn = np.zeros_like(need)
        mask = (need > 0) & (good > 0)
        if mask.any():
            drawn[mask] = rng.hypergeometric(good[mask], bad[mask], need[mask])
        out[:, i] = drawn
        need -= drawn
        left = bad
    return out


def _draw(eq: Equilibrium, cfg: SimulationConfig) -> dict[str, np.ndarray]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    atoms = eq.types.atoms
    n, D = cfg.n_agents, cfg.n_supply_draws
    mass = np.array([a.mass for a in atoms])
    value = np.array([a.value for a in atoms])
    y = np.array(eq.reserve_fraction)

    counts = rng.multinomial(n, mass / mass.sum(), size=D)
    reservers = rng.binomial(counts, np.broadcast_to(y, counts.shape))
    bidders = counts - reservers
    qs = np.array([q for q, _ in eq.supply])
    probs = np.array([p for _, p in eq.supply])
    q = qs[rng.choice(len(qs), size=D, p=probs / probs.sum())]
    units = np.floor(q * n + 1e-9).astype(np.int64)

    R = reservers.sum(axis=1)
    served_R = np.minimum(units, R)
    res_win = _split_uniform(rng, reservers, served_R)
    oversubscribed = units < R
    spot_units = units - served_R

    # spot auction over value groups, highest first
    groups = sorted(set(value.tolist()), reverse=True)
    gid = np.array([groups.index(v) for v in value])
    g_counts = np.stack([bidders[:, gid == g].sum(axis=1) for g in range(len(groups))], axis=1)
    cum = np.cumsum(g_counts, axis=1)
    total_bidders = cum[:, -1]
    all_win = spot_units >= total_bidders
    # group holding the (spot_units + 1)-th highest bid
    j = np.minimum((cum < (spot_units + 1)[:, None]).sum(axis=1), len(groups) - 1)
    g_values = np.array(groups)
    price = np.where(all_win, 0.0, g_values[j])
    price = np.where(oversubscribed, np.inf, price)
    trades = ~oversubscribed & ~((spot_units == 0) & (total_bidders > 0))

    above = np.where(j > 0, np.take_along_axis(cum, np.maximum(j - 1, 0)[:, None], axis=1)[:, 0], 0)
    spot_win = np.zeros_like(bidders)
    full = all_win[:, None] | (gid[None, :] < j[:, None])
    spot_win[full] = bidders[full]
    marginal = ~all_win[:, None] & (gid[None, :] == j[:, None])
    marginal_counts = np.where(marginal, bidders, 0)
    rest = np.where(all_win | oversubscribed, 0, spot_units - above)
    spot_win += _split_uniform(rng, marginal_counts, rest)
    spot_win[oversubscribed] = 0

    return dict(
        value=value, y=y, res_win=res_win, spot_win=spot_win, price=price,
        trades=trades, served_R=served_R, R=R, counts=counts,
    )


def simulate(eq: Equilibrium, cfg: SimulationConfig) -> SimulationResult:
    """Empirical revenue, welfare, efficiency and per-type regret."""
    d = _draw(eq, cfg)
    n = cfg.n_agents
    atoms = eq.types.atoms
    value, price = d["value"], d["price"]
    finite_price = np.where(np.isfinite(price), price, 0.0)
    spot_sold = d["spot_win"].sum(axis=1)
    revenue = (eq.p_r * d["served_R"] + finite_price * spot_sold) / n
    utility = np.zeros_like(revenue)
    reserve_rate = np.where(d["R"] > 0, d["served_R"] / np.maximum(d["R"], 1), 1.0)
    regrets = []
    for i, a in enumerate(atoms):
        u_res = float(curve_values(a.curve, np.array([a.value - eq.p_r]))[0])
        surplus = np.maximum(a.value - finite_price, 0.0)
        u_spot = curve_values(a.curve, surplus)
        utility += (d["res_win"][:, i] * u_res + d["spot_win"][:, i] * u_spot) / n

        # a measure-zero deviator facing this draw's outcome
        dev_res = reserve_rate * u_res
        dev_spot = np.where(d["trades"] & (finite_price < a.value), u_spot, 0.0)
        y = d["y"][i]
        played = y * dev_res + (1 - y) * dev_spot
        options = [dev_spot]
        if a.value >= eq.p_r:
            options.append(dev_res)
        best = max(options, key=lambda x: x.mean())
        regrets.append(_estimate(best - played))
    efficiency = ((d["res_win"] + d["spot_win"]) @ value) / n
    return SimulationResult(
        cfg,
        _estimate(revenue),
        _estimate(utility + revenue),
        _estimate(efficiency),
        tuple(regrets),
        extra={"seed": cfg.seed, "n_agents": n, "draws": cfg.n_supply_draws},
    )


def _estimate(x: np.ndarray) -> Estimate:
    x = np.asarray(x, dtype=float)
    # numpy's sum is pairwise, so order of draws does not matter much
    mean = float(np.sum(x) / x.size)
    se = float(np.std(x, ddof=1) / math.sqrt(x.size))
    return Estimate(mean, se)


def best_response_check(eq: Equilibrium, cfg: SimulationConfig) -> tuple[int, Estimate]:
    """Largest estimated gain from a unilateral switch, and the type that has it."""
    return simulate(eq, cfg).max_regret


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    analytic: float
    empirical: float
    std_err: float

    @property
    def z_score(self) -> float:
        return Estimate(self.empirical, self.std_err).z_score(self.analytic)


def analytic_regret(eq: Equilibrium) -> float:
    """Largest expected gain from switching, with rationing accounted exactly."""
    out = run_dual(eq)
    T = eq.total_reserved
    reserve_rate = sum(r.prob * (min(r.q, T) / T if T > 0 else 1.0) for r in out.records)
    best = -math.inf
    for i, a in enumerate(eq.types):
        u_res = float(curve_values(a.curve, np.array([a.value - eq.p_r]))[0])
        spot = 0.0
        for s in eq.spot_dist:
            if s.trades and s.price < a.value:
                spot += s.prob * float(curve_values(a.curve, np.array([a.value - s.price]))[0])
        res = reserve_rate * u_res
        y = eq.reserve_fraction[i]
        played = y * res + (1 - y) * spot
        alt = max(spot, res) if a.value >= eq.p_r else spot
        best = max(best, alt - played)
    return best


def compare(eq: Equilibrium, result: SimulationResult, outcome: MechanismOutcome | None = None) -> list[ComparisonRow]:
    outcome = outcome or run_dual(eq)
    _, reg = result.max_regret
    return [
        ComparisonRow("revenue", outcome.revenue, result.revenue.mean, result.revenue.std_err),
        ComparisonRow("welfare", outcome.welfare, result.welfare.mean, result.welfare.std_err),
        ComparisonRow("efficiency", outcome.efficiency, result.efficiency.mean, result.efficiency.std_err),
        ComparisonRow("max_regret", analytic_regret(eq), reg.mean, reg.std_err),
    ]
