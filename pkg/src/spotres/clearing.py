"""Market-clearing spot prices with uniform rationing at the marginal value."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .population import MASS_TOL, SupplyDistribution, TypeAtom


@dataclass(frozen=True)
class ClearingResult:
    price: float
    sold_mass: float
    allocation: tuple[float, ...]  # per residual atom, fraction served
    trades: bool


@dataclass(frozen=True)
class SpotAtom:
    """Spot-stage outcome for one supply atom."""

    q: float
    prob: float
    price: float  # inf when reservations are oversubscribed and no auction runs
    sold_mass: float
    trades: bool
    allocation: tuple[float, ...]


def clear(residual: Sequence[TypeAtom], supply: float) -> ClearingResult:
    """Clear ``supply`` against truthful unit bids from ``residual``.

    The price is the least point of ``{0} U values`` at which the mass
    bidding strictly above it fits in supply; the atoms sitting exactly at
    the price share what is left.  Zero supply with positive demand prices
    at the top value and does not trade.
    """
    if supply < 0:
        raise ValueError(f"supply must be non-negative, got {supply!r}")
    live = [a for a in residual if a.mass > 0]
    demand = sum(a.mass for a in live)
    grid = [0.0] + sorted({a.value for a in live})
    price = grid[-1]
    above = 0.0
    for p in grid:
        above = sum(a.mass for a in live if a.value > p)
        if above <= supply + MASS_TOL:
            price = p
            break
    marginal = sum(a.mass for a in live if a.value == price)
    frac = 0.0
    if marginal > 0:
        frac = min(max((supply - above) / marginal, 0.0), 1.0)
    trades = not (supply <= MASS_TOL and demand > MASS_TOL)
    alloc = []
    for a in residual:
        if not trades or a.mass <= 0 or a.value < price:
            alloc.append(0.0)
        elif a.value > price:
            alloc.append(1.0)
        else:
            alloc.append(frac)
    sold = sum(x * a.mass for x, a in zip(alloc, residual))
    return ClearingResult(price, sold, tuple(alloc), trades)


def clearing_price_distribution(
    residual: Sequence[TypeAtom], supply: SupplyDistribution, reserved: float = 0.0
) -> list[SpotAtom]:
    """Spot outcome for every supply atom after ``reserved`` mass is served first.

    Supply atoms below ``reserved`` are oversubscribed: the spot stage does
    not run and the price is recorded as infinite.
    """
    out = []
    for q, prob in supply:
        if q < reserved - MASS_TOL:
            out.append(SpotAtom(q, prob, math.inf, 0.0, False, tuple(0.0 for _ in residual)))
            continue
        res = clear(residual, max(q - reserved, 0.0))
        out.append(SpotAtom(q, prob, res.price, res.sold_mass, res.trades, res.allocation))
    return out


def price_cdf(spot: Sequence[SpotAtom], p: float) -> float:
    """Pr[spot price <= p]; oversubscribed atoms never count."""
    return sum(a.prob for a in spot if a.price <= p)
