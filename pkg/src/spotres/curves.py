"""Piecewise-linear concave utility curves and the risk-aversion order.

A curve maps a non-negative surplus ``z`` to utility.  It always starts at
the origin with slope 1, its slopes never increase, and they stay in [0, 1].
Beyond the last knot the last slope extends forever.
"""
from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

SLOPE_TOL = 1e-12
_VALID_TOL = 1e-9


class CurveError(ValueError):
    """Base class for invalid curve construction."""


class InvalidCurve(CurveError):
    pass


class InvalidBudget(CurveError):
    pass


class DegenerateCurve(CurveError):
    pass


class NegativeArgument(CurveError):
    pass


class RiskOrder(enum.Enum):
    MORE_AVERSE = "MoreAverse"
    LESS_AVERSE = "LessAverse"
    EQUAL = "Equal"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class UtilityCurve:
    """Concave, non-decreasing, normalized utility curve.

    ``knots`` are the interior breakpoints (strictly increasing, all > 0) and
    ``values`` the utility at each knot.  ``tail_slope`` applies after the
    last knot; with no knots the curve is ``tail_slope * z`` which, by
    normalization, means the identity.
    """

    knots: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    tail_slope: float = 1.0

    def __post_init__(self) -> None:
        if len(self.knots) != len(self.values):
            raise InvalidCurve("knots and values differ in length")
        prev_z = 0.0
        for z in self.knots:
            if not z > prev_z:
                raise InvalidCurve("knots must be positive and strictly increasing")
            prev_z = z
        slopes = self.slopes()
        if abs(slopes[0] - 1.0) > _VALID_TOL:
            raise InvalidCurve(f"first slope must be 1, got {slopes[0]!r}")
        for s in slopes:
            if s < -_VALID_TOL or s > 1.0 + _VALID_TOL:
                raise InvalidCurve(f"slope {s!r} outside [0, 1]")
        for s0, s1 in zip(slopes, slopes[1:]):
            if s1 > s0 + _VALID_TOL:
                raise InvalidCurve("slopes must be non-increasing (concavity)")

    # -- construction ---------------------------------------------------

    @classmethod
    def identity(cls) -> "UtilityCurve":
        return cls()

    @classmethod
    def capped(cls, cap: float) -> "UtilityCurve":
        """The curve ``min(z, cap)``."""
        if cap <= 0:
            raise DegenerateCurve("cap must be positive")
        return cls((float(cap),), (float(cap),), 0.0)

    @classmethod
    def from_points(
        cls, points: Iterable[tuple[float, float]], tail_slope: float | None = None
    ) -> "UtilityCurve":
        """Build from breakpoints after the implicit origin.

        When ``tail_slope`` is omitted the slope of the last segment extends.
        Redundant collinear breakpoints are dropped so equal curves compare
        equal.
        """
        pts = [(float(z), float(u)) for z, u in points]
        if any(not z1 > z0 for (z0, _), (z1, _) in zip([(0.0, 0.0)] + pts, pts)):
            raise InvalidCurve("knots must be positive and strictly increasing")
        if not pts:
            return cls.identity() if tail_slope in (None, 1.0) else cls((), (), tail_slope)
        if tail_slope is None:
            z0, u0 = pts[-2] if len(pts) > 1 else (0.0, 0.0)
            z1, u1 = pts[-1]
            if z1 <= z0:
                raise InvalidCurve("knots must be strictly increasing")
            tail_slope = (u1 - u0) / (z1 - z0)
        tail_slope = float(tail_slope)
        if abs(tail_slope) < _VALID_TOL:
            tail_slope = 0.0
        return cls._canonical(pts, tail_slope)

    @classmethod
    def _canonical(cls, pts: list[tuple[float, float]], tail: float) -> "UtilityCurve":
        # drop knots whose neighbouring slopes agree
        zs = [0.0] + [z for z, _ in pts]
        us = [0.0] + [u for _, u in pts]
        slopes = [(us[i + 1] - us[i]) / (zs[i + 1] - zs[i]) for i in range(len(pts))] + [tail]
        keep_z: list[float] = []
        keep_u: list[float] = []
        for i in range(len(pts)):
            if abs(slopes[i] - slopes[i + 1]) > SLOPE_TOL:
                keep_z.append(zs[i + 1])
                keep_u.append(us[i + 1])
        if not keep_z:
            if abs(tail - 1.0) > _VALID_TOL:
                raise InvalidCurve(f"a single-segment curve must have slope 1, got {tail!r}")
            return cls.identity()
        return cls(tuple(keep_z), tuple(keep_u), tail)

    # -- queries --------------------------------------------------------

    def slopes(self) -> list[float]:
        """Segment slopes, first segment from the origin, tail last."""
        out = []
        z0 = u0 = 0.0
        for z, u in zip(self.knots, self.values):
            out.append((u - u0) / (z - z0))
            z0, u0 = z, u
        out.append(self.tail_slope)
        return out

    def __call__(self, z: float) -> float:
        return evaluate(self, z)

    @property
    def is_identity(self) -> bool:
        return not self.knots and self.tail_slope == 1.0

    @property
    def cap(self) -> float | None:
        """The cap ``c`` if this is ``min(z, c)``, else None."""
        if len(self.knots) == 1 and self.tail_slope == 0.0 and self.knots[0] == self.values[0]:
            return self.knots[0]
        return None

    def level_preimage(self, y: float) -> float | None:
        """Smallest ``z`` with ``u(z) = y``; None when ``y`` is never reached."""
        if y <= 0:
            return 0.0
        z0 = u0 = 0.0
        for z, u in zip(self.knots, self.values):
            if u >= y:
                return z0 + (y - u0) * (z - z0) / (u - u0)
            z0, u0 = z, u
        if self.tail_slope <= 0:
            return z0 if abs(y - u0) <= SLOPE_TOL else None
        return z0 + (y - u0) / self.tail_slope


def evaluate(curve: UtilityCurve, z: float) -> float:
    """Utility of surplus ``z``; exact at breakpoints."""
    if z < 0:
        raise NegativeArgument(f"surplus must be non-negative, got {z!r}")
    knots = curve.knots
    i = bisect.bisect_right(knots, z)
    if i == 0:
        return float(z)
    if i == len(knots):
        return curve.values[-1] + curve.tail_slope * (z - knots[-1])
    z0, u0 = knots[i - 1], curve.values[i - 1]
    z1, u1 = knots[i], curve.values[i]
    if z == z0:
        return u0
    return u0 + (u1 - u0) * (z - z0) / (z1 - z0)


def make_soft_budget(value: float, budget: float) -> UtilityCurve:
    """``u(z) = min(z, value - budget)``: payments under the budget are sunk."""
    if budget < 0 or budget > value:
        raise InvalidBudget(f"budget {budget!r} outside [0, {value!r}]")
    if budget == 0:
        return UtilityCurve.identity()
    cap = value - budget
    if cap <= 0:
        raise DegenerateCurve("budget equal to value gives the zero curve")
    return UtilityCurve.capped(cap)


def _merged_grid(points: Iterable[float]) -> list[float]:
    """Sorted breakpoints with rounding-level near-duplicates dropped."""
    grid: list[float] = []
    for z in sorted(points):
        if grid and z - grid[-1] <= SLOPE_TOL * max(1.0, z):
            continue
        grid.append(z)
    return grid


def _segment_slopes(curve: UtilityCurve, grid: Sequence[float]) -> list[float]:
    out = []
    prev_z, prev_u = 0.0, 0.0
    for z in grid:
        u = evaluate(curve, z)
        out.append((u - prev_u) / (z - prev_z))
        prev_z, prev_u = z, u
    out.append(curve.tail_slope)
    return out


def _is_more_averse(a: UtilityCurve, b: UtilityCurve) -> bool:
    # a is a concave non-decreasing transform of b on the merged grid
    grid = _merged_grid(set(a.knots) | set(b.knots))
    sa = _segment_slopes(a, grid)
    sb = _segment_slopes(b, grid)
    prev_ratio = float("inf")
    for x, y in zip(sa, sb):
        if y <= SLOPE_TOL:
            if x > SLOPE_TOL:
                return False
            continue
        ratio = x / y
        if ratio > prev_ratio + SLOPE_TOL:
            return False
        prev_ratio = ratio
    return True


def compare_risk_aversion(a: UtilityCurve, b: UtilityCurve) -> RiskOrder:
    """Where ``a`` sits relative to ``b`` in the risk-aversion partial order."""
    ab = _is_more_averse(a, b)
    ba = _is_more_averse(b, a)
    if ab and ba:
        return RiskOrder.EQUAL
    if ab:
        return RiskOrder.MORE_AVERSE
    if ba:
        return RiskOrder.LESS_AVERSE
    return RiskOrder.INCOMPARABLE


def compose_concave(curve: UtilityCurve, transform: UtilityCurve) -> UtilityCurve:
    """``transform(curve(z))``; always at least as risk-averse as ``curve``."""
    zs = set(curve.knots)
    for level in transform.knots:
        z = curve.level_preimage(level)
        if z is not None and z > 0:
            zs.add(z)
    # preimages can land a rounding error away from an existing knot
    grid = _merged_grid(zs)
    pts = [(z, evaluate(transform, evaluate(curve, z))) for z in grid]
    last_level = evaluate(curve, grid[-1]) if grid else 0.0
    # the last grid point may sit a rounding error below a transform knot
    i = bisect.bisect_right(transform.knots, last_level + SLOPE_TOL * max(1.0, last_level))
    t_slope = transform.slopes()[i]
    tail = curve.tail_slope * t_slope
    if all(u <= 0 for _, u in pts) and tail <= 0:
        raise DegenerateCurve("composition is identically zero")
    if not pts:
        return UtilityCurve.identity()
    return UtilityCurve._canonical(pts, tail)
