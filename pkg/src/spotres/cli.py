"""Command-line front end: ``spotres <command> scenario.mkt [options]``.

Exit codes: 0 success, 2 invalid input or a required assumption failing,
1 anything unexpected.  CSV goes to stdout or ``--out``; diagnostics go to
stderr, one per line.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from .curves import CurveError
from .equilibrium import AssumptionViolated, solve, validate_assumptions, verify_equilibrium
from .experiments import (
    NoValidPrice,
    NotMoreAverse,
    apply_risk_transform,
    check_statics,
    indifference_budgets,
    parse_grid,
    sweep_reservation_price,
)
from .curves import compose_concave
from .mechanisms import optimal_reservation_price, run_dual, run_reservation_only, run_spot_only
from .oracle import GENERATOR, SimulationConfig, compare, simulate
from .population import InvalidScenario
from .scenario import ScenarioError, fmt, format_curve, load_scenario, parse_curve

METRICS_HEADER = ["mechanism", "p_r", "revenue", "welfare", "efficiency", "T", "E_spot_price", "A1", "A2"]
SOLVE_HEADER = ["v", "curve", "mass", "reserve_fraction", "T", "S"]


class UsageError(ValueError):
    pass


def _cell(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return "none"
    return fmt(x)


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    return buf.getvalue()


def _solve_rows(eq) -> list[list]:
    return [
        [a.value, format_curve(a.curve, a.value), a.mass, y, eq.T_at(a.value), eq.S_at(a.value)]
        for y, a in zip(eq.reserve_fraction, eq.types)
    ]


def cmd_solve(sc, args) -> tuple[str, int]:
    eq = solve(sc.types, sc.supply, sc.p_r, sc.tie)
    return _csv(SOLVE_HEADER, _solve_rows(eq)), 0


def cmd_compare(sc, args) -> tuple[str, int]:
    eq = solve(sc.types, sc.supply, sc.p_r, sc.tie)
    a = validate_assumptions(eq)
    spot = run_spot_only(sc.types, sc.supply)
    p_res = args.reservation_price or optimal_reservation_price(sc.types, sc.supply, sc.tie)
    res = run_reservation_only(sc.types, sc.supply, p_res, sc.tie)
    dual = run_dual(eq)
    rows = [
        ["spot", None, spot.revenue, spot.welfare, spot.efficiency, 0.0, spot.expected_spot_price, None, None],
        ["reservation", p_res, res.revenue, res.welfare, res.efficiency, res.reserved, None, None, None],
        ["dual", sc.p_r, dual.revenue, dual.welfare, dual.efficiency, eq.total_reserved, a.expected_spot_price, a.a1, a.a2],
    ]
    return _csv(METRICS_HEADER, rows), 0


def cmd_sweep(sc, args) -> tuple[str, int]:
    if not args.grid:
        raise UsageError("sweep needs --grid lo:hi:step")
    sweep = sweep_reservation_price(sc.types, sc.supply, parse_grid(args.grid), sc.tie)
    rows = [[r.p_r, r.revenue, r.welfare, r.efficiency, r.T, r.a1, r.a2] for r in sweep.rows]
    b = sweep.best
    print(f"best p_r={fmt(b.p_r)} revenue={fmt(b.revenue)}", file=sys.stderr)
    return _csv(["p_r", "revenue", "welfare", "efficiency", "T", "A1", "A2"], rows), 0


def load_transform(path: str, types):
    """Transform file lines: ``transform [v=<num>] curve=<curve literal>``.

    A line without ``v`` applies to every atom; later lines override earlier
    ones for the values they name.
    """
    default = None
    by_value: dict[float, tuple[int, str]] = {}
    findings = []
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, body = line.partition(" ")
        before, sep, literal = body.partition("curve=")
        if head != "transform" or not sep:
            findings.append((n, "expected: transform [v=<num>] curve=<curve literal>"))
            continue
        before = before.strip()
        if not before:
            default = (n, literal)
        elif before.startswith("v=") and " " not in before:
            try:
                by_value[float(before[2:])] = (n, literal)
            except ValueError:
                findings.append((n, f"bad value {before[2:]!r}"))
        else:
            findings.append((n, f"unknown keys {before!r}"))
    table = {}
    for a in types:
        choice = by_value.get(a.value, default)
        if choice is None:
            table[a] = a.curve
            continue
        n, literal = choice
        try:
            table[a] = compose_concave(a.curve, parse_curve(literal, a.value))
        except (ValueError, CurveError) as exc:
            findings.append((n, str(exc)))
    if findings:
        raise ScenarioError(findings)
    return table


def cmd_statics(sc, args) -> tuple[str, int]:
    if not args.transform:
        raise UsageError("statics needs --transform <file>")
    try:
        plus = apply_risk_transform(sc.types, load_transform(args.transform, sc.types))
    except ScenarioError as exc:
        exc.path = args.transform
        raise
    rep = check_statics(sc.types, plus, sc.supply, sc.p_r, sc.tie)
    rows = [list(r) for r in zip(rep.grid, rep.T, rep.T_plus, rep.S, rep.S_plus)]
    print(
        f"revenue={fmt(rep.revenue)} revenue_plus={fmt(rep.revenue_plus)} "
        f"T_ok={fmt(rep.t_ok)} S_ok={fmt(rep.s_ok)} revenue_ok={fmt(rep.rev_ok)}",
        file=sys.stderr,
    )
    return _csv(["p", "T", "T_plus", "S", "S_plus"], rows), 0


def cmd_curve(sc, args) -> tuple[str, int]:
    eq = solve(sc.types, sc.supply, sc.p_r, sc.tie)
    values = parse_grid(args.grid) if args.grid else None
    b = indifference_budgets(eq, values, args.delta)
    return _csv(["v", "b_I"], [[v, bi] for v, bi in b.items()]), 0


def cmd_mc(sc, args) -> tuple[str, int]:
    eq = solve(sc.types, sc.supply, sc.p_r, sc.tie)
    cfg = SimulationConfig(args.agents, args.draws, args.seed)
    result = simulate(eq, cfg)
    print(f"generator={GENERATOR} seed={cfg.seed} agents={cfg.n_agents} draws={cfg.n_supply_draws}", file=sys.stderr)
    rows = [[r.metric, r.analytic, r.empirical, r.std_err, r.z_score] for r in compare(eq, result)]
    return _csv(["metric", "analytic", "empirical", "std_err", "z_score"], rows), 0


def _read_solve_csv(path: str) -> list[tuple[float, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SOLVE_HEADER:
            raise UsageError(f"{path}: not a solve table")
        return [(float(r["T"]), float(r["S"])) for r in reader]


def cmd_validate(sc, args) -> tuple[str, int]:
    eq = solve(sc.types, sc.supply, sc.p_r, sc.tie)
    a = validate_assumptions(eq)
    rep = verify_equilibrium(eq)
    rows = [
        ["A1", a.a1],
        ["A2", a.a2],
        ["E_spot_price", a.expected_spot_price],
        ["no_trade", a.no_trade],
        ["fixed_point_residual", max(rep.spot_cdf_residual, rep.reserved_residual)],
        ["deviation_gain", rep.deviation_gain],
        ["max_residual", rep.max_residual],
    ]
    code = 0 if rep.ok else 2
    if args.equilibrium:
        # compare the serialized tables, so formatting is part of the round trip
        ours = [(float(_cell(r[4])), float(_cell(r[5]))) for r in _solve_rows(eq)]
        match = ours == _read_solve_csv(args.equilibrium)
        rows.append(["tables_match", match])
        if not match:
            print(f"{args.equilibrium}: T/S table differs from a fresh solve", file=sys.stderr)
            code = 2
    return _csv(["check", "value"], rows), code


COMMANDS = {
    "solve": cmd_solve,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "statics": cmd_statics,
    "curve": cmd_curve,
    "mc": cmd_mc,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario file")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--grid", help="lo:hi:step")
    common.add_argument("--agents", type=int, default=1_000_000)
    common.add_argument("--draws", type=int, default=10_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--transform", help="risk transform file (statics)")
    common.add_argument("--reservation-price", type=float, help="posted price for the reservation-only row (compare)")
    common.add_argument("--delta", type=float, default=1e-6, help="budget resolution (curve)")
    common.add_argument("--equilibrium", help="solve CSV to check against (validate)")

    parser = argparse.ArgumentParser(prog="spotres", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        sc = load_scenario(args.scenario)
        text, code = COMMANDS[args.command](sc, args)
    except ScenarioError as exc:
        where = getattr(exc, "path", args.scenario)
        for n, msg in exc.findings:
            print(f"{where}:{n}: {msg}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{exc.filename or args.scenario}: {exc.strerror}", file=sys.stderr)
        return 2
    except (InvalidScenario, AssumptionViolated, NoValidPrice, NotMoreAverse, UsageError, CurveError) as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
