"""Line-oriented scenario files.

::

    # comment
    market p_r=9.99 tie=reserve eps_tie=1e-9
    type v=10 mass=0.5 curve=soft_budget b=9.99
    type v=4 mass=0.5 curve=piecewise pts=1:1,3:2
    supply q=0.99 prob=1

Curve literals are ``soft_budget b=<num>`` or ``piecewise pts=z1:u1,...``
(an implicit first point at 0:0; the last slope extends).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .curves import CurveError, UtilityCurve, make_soft_budget
from .equilibrium import TieBreakPolicy
from .population import InvalidScenario, SupplyDistribution, TypeAtom, TypeDistribution


def fmt(x: float) -> str:
    """12 significant digits, locale independent."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(float(x), ".12g")
    return "0" if s == "-0" else s


class ScenarioError(InvalidScenario):
    """Malformed scenario; ``findings`` holds (line number, message) pairs."""

    def __init__(self, findings: list[tuple[int, str]]):
        self.findings = findings
        super().__init__("\n".join(f"line {n}: {msg}" for n, msg in findings))


@dataclass(frozen=True)
class Scenario:
    types: TypeDistribution
    supply: SupplyDistribution
    p_r: float
    tie: TieBreakPolicy = field(default_factory=TieBreakPolicy)


def _num(text: str, what: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise ValueError(f"{what}: not a number: {text!r}") from None
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"{what}: must be finite")
    return x


def _pairs(tokens: list[str], allowed: set[str], where: str) -> dict[str, str]:
    out = {}
    for tok in tokens:
        key, sep, val = tok.partition("=")
        if not sep:
            raise ValueError(f"{where}: expected key=value, got {tok!r}")
        if key not in allowed:
            raise ValueError(f"{where}: unknown key {key!r}")
        if key in out:
            raise ValueError(f"{where}: duplicate key {key!r}")
        out[key] = val
    return out


def parse_curve(literal: str, value: float) -> UtilityCurve:
    tokens = literal.split()
    if not tokens:
        raise ValueError("empty curve literal")
    kind, rest = tokens[0], tokens[1:]
    if kind == "soft_budget":
        kv = _pairs(rest, {"b"}, "soft_budget")
        if "b" not in kv:
            raise ValueError("soft_budget: missing b")
        return make_soft_budget(value, _num(kv["b"], "b"))
    if kind == "piecewise":
        kv = _pairs(rest, {"pts"}, "piecewise")
        if "pts" not in kv:
            raise ValueError("piecewise: missing pts")
        pts = []
        for item in kv["pts"].split(","):
            z, sep, u = item.partition(":")
            if not sep:
                raise ValueError(f"piecewise: bad point {item!r}")
            pts.append((_num(z, "z"), _num(u, "u")))
        return UtilityCurve.from_points(pts)
    raise ValueError(f"unknown curve kind {kind!r}")


def format_curve(curve: UtilityCurve, value: float) -> str:
    if curve.is_identity:
        return "soft_budget b=0"
    cap = curve.cap
    if cap is not None and cap < value:
        return f"soft_budget b={fmt(value - cap)}"
    pts = list(zip(curve.knots, curve.values))
    z, u = pts[-1]
    pts.append((z + 1.0, u + curve.tail_slope))
    return "piecewise pts=" + ",".join(f"{fmt(z)}:{fmt(u)}" for z, u in pts)


def _parse_tie(text: str, eps: float) -> TieBreakPolicy:
    if text == "reserve":
        return TieBreakPolicy("reserve", 1.0, eps)
    if text == "spot":
        return TieBreakPolicy("spot", 0.0, eps)
    if text.startswith("frac:"):
        return TieBreakPolicy.fraction(_num(text[5:], "tie fraction"), eps)
    raise ValueError(f"unknown tie policy {text!r}")


def format_tie(tie: TieBreakPolicy) -> str:
    if tie.mode == "fraction":
        return f"frac:{fmt(tie.theta)}"
    return tie.mode


def parse_scenario(text: str) -> Scenario:
    findings: list[tuple[int, str]] = []
    atoms: list[TypeAtom] = []
    supply: list[tuple[float, float]] = []
    market: dict | None = None
    market_line = 0
    seen = set()
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, body = line.partition(" ")
        seen.add(head)
        try:
            if head == "market":
                if market is not None:
                    raise ValueError(f"second market line (first on line {market_line})")
                kv = _pairs(body.split(), {"p_r", "tie", "eps_tie"}, "market")
                if "p_r" not in kv:
                    raise ValueError("market: missing p_r")
                eps = _num(kv.get("eps_tie", "1e-9"), "eps_tie")
                market = {"p_r": _num(kv["p_r"], "p_r"), "tie": _parse_tie(kv.get("tie", "reserve"), eps)}
                market_line = n
            elif head == "type":
                before, sep, literal = body.partition("curve=")
                if not sep:
                    raise ValueError("type: missing curve")
                kv = _pairs(before.split(), {"v", "mass"}, "type")
                for key in ("v", "mass"):
                    if key not in kv:
                        raise ValueError(f"type: missing {key}")
                v = _num(kv["v"], "v")
                if v <= 0:
                    raise ValueError("type: v must be positive")
                atoms.append(TypeAtom(v, parse_curve(literal, v), _num(kv["mass"], "mass")))
            elif head == "supply":
                kv = _pairs(body.split(), {"q", "prob"}, "supply")
                for key in ("q", "prob"):
                    if key not in kv:
                        raise ValueError(f"supply: missing {key}")
                supply.append((_num(kv["q"], "q"), _num(kv["prob"], "prob")))
            else:
                raise ValueError(f"unknown directive {head!r}")
        except (ValueError, CurveError) as exc:
            findings.append((n, str(exc)))
    last = max(len(text.splitlines()), 1)
    if market is None:
        findings.append((last, "no market line"))
    if "type" not in seen:
        findings.append((last, "no type atoms"))
    if "supply" not in seen:
        findings.append((last, "no supply atoms"))
    if findings:
        raise ScenarioError(findings)
    try:
        types = TypeDistribution(atoms)
        dist = SupplyDistribution(supply)
        if not market["p_r"] > 0:
            raise InvalidScenario("p_r must be positive")
    except InvalidScenario as exc:
        raise ScenarioError([(market_line if "p_r" in str(exc) else last, str(exc))]) from None
    return Scenario(types, dist, market["p_r"], market["tie"])


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def format_scenario(sc: Scenario) -> str:
    lines = [
        f"market p_r={fmt(sc.p_r)} tie={format_tie(sc.tie)} eps_tie={fmt(sc.tie.eps_tie)}"
    ]
    for a in sc.types:
        lines.append(f"type v={fmt(a.value)} mass={fmt(a.mass)} curve={format_curve(a.curve, a.value)}")
    for q, prob in sc.supply:
        lines.append(f"supply q={fmt(q)} prob={fmt(prob)}")
    return "\n".join(lines) + "\n"
