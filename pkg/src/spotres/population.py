"""Finite type and supply distributions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .curves import UtilityCurve

# tolerance on mass comparisons (clearing condition and supply CDF)
MASS_TOL = 1e-12
SUM_TOL = 1e-9


class InvalidScenario(ValueError):
    pass


@dataclass(frozen=True)
class TypeAtom:
    value: float
    curve: UtilityCurve
    mass: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "mass", float(self.mass))

    @property
    def key(self) -> tuple[float, UtilityCurve]:
        return (self.value, self.curve)


class TypeDistribution:
    """Finite joint distribution over (value, utility curve) pairs.

    Atoms are kept sorted by value; duplicate (value, curve) atoms are merged
    by summing their masses.
    """

    def __init__(self, atoms: Iterable[TypeAtom]):
        merged: dict[tuple[float, UtilityCurve], float] = {}
        order: list[tuple[float, UtilityCurve]] = []
        for a in atoms:
            if not (a.value > 0) or a.value == float("inf"):
                raise InvalidScenario(f"type value must be positive and finite, got {a.value!r}")
            if not (0 < a.mass <= 1):
                raise InvalidScenario(f"type mass must lie in (0, 1], got {a.mass!r}")
            if a.key not in merged:
                merged[a.key] = 0.0
                order.append(a.key)
            merged[a.key] += a.mass
        if not order:
            raise InvalidScenario("no type atoms")
        total = sum(merged.values())
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidScenario(f"type masses sum to {total!r}, expected 1")
        # stable sort keeps the input order among equal values
        order.sort(key=lambda k: k[0])
        self.atoms: tuple[TypeAtom, ...] = tuple(
            TypeAtom(v, c, merged[(v, c)]) for v, c in order
        )

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __eq__(self, other) -> bool:
        return isinstance(other, TypeDistribution) and self.atoms == other.atoms

    def __repr__(self) -> str:
        return f"TypeDistribution({list(self.atoms)!r})"

    @property
    def values(self) -> list[float]:
        """Distinct values, ascending."""
        return sorted({a.value for a in self.atoms})

    def mass_above(self, p: float) -> float:
        return sum(a.mass for a in self.atoms if a.value > p)

    def with_curves(self, curves: Iterable[UtilityCurve]) -> "TypeDistribution":
        return TypeDistribution(
            TypeAtom(a.value, c, a.mass) for a, c in zip(self.atoms, curves, strict=True)
        )


class SupplyDistribution:
    """Finite distribution of the supply ``q``, a fraction of total demand."""

    def __init__(self, atoms: Iterable[tuple[float, float]]):
        merged: dict[float, float] = {}
        for q, prob in atoms:
            q, prob = float(q), float(prob)
            if not (0 <= q <= 1):
                raise InvalidScenario(f"supply q must lie in [0, 1], got {q!r}")
            if not (0 < prob <= 1):
                raise InvalidScenario(f"supply probability must lie in (0, 1], got {prob!r}")
            merged[q] = merged.get(q, 0.0) + prob
        if not merged:
            raise InvalidScenario("no supply atoms")
        total = sum(merged.values())
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidScenario(f"supply probabilities sum to {total!r}, expected 1")
        self.atoms: tuple[tuple[float, float], ...] = tuple(sorted(merged.items()))

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __eq__(self, other) -> bool:
        return isinstance(other, SupplyDistribution) and self.atoms == other.atoms

    def __repr__(self) -> str:
        return f"SupplyDistribution({list(self.atoms)!r})"

    def mean(self) -> float:
        return sum(q * p for q, p in self.atoms)


def value_cdf(dist: TypeDistribution, p: float) -> float:
    """Pr[v <= p]."""
    return sum(a.mass for a in dist.atoms if a.value <= p)


def supply_cdf_strict(dist: SupplyDistribution, x: float) -> float:
    """Pr[q < x], left-continuous."""
    return sum(prob for q, prob in dist.atoms if q < x - MASS_TOL)
