"""Three-type example: mechanism metrics, welfare chain and indifference budgets.

    python3 scripts/reproduce_example.py [scenario.mkt]
"""
import sys
from pathlib import Path

from spotres import (
    check_welfare_chain,
    indifference_budgets,
    load_scenario,
    run_dual,
    run_reservation_only,
    run_spot_only,
    solve,
    validate_assumptions,
)
from spotres.experiments import parse_grid
from spotres.scenario import fmt

path = sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "scenarios" / "ex1.mkt"
sc = load_scenario(path)
eq = solve(sc.types, sc.supply, sc.p_r, sc.tie)
a = validate_assumptions(eq)

print("mechanism,revenue,welfare,efficiency")
for out in (
    run_spot_only(sc.types, sc.supply),
    run_reservation_only(sc.types, sc.supply, 10.0, sc.tie),
    run_dual(eq),
):
    print(",".join([out.mechanism, fmt(out.revenue), fmt(out.welfare), fmt(out.efficiency)]))

print()
print(f"reserving: {[(x.value, x.curve.cap) for x in eq.reserving()]}  T={fmt(eq.total_reserved)}")
print(f"A1={fmt(a.a1)} A2={fmt(a.a2)} E[p_s]={fmt(a.expected_spot_price)}")
chain = check_welfare_chain(eq)
print(f"WEL spot={fmt(chain.spot)} <= benchmark={fmt(chain.benchmark)} <= dual={fmt(chain.dual)}")

print()
print("v,b_I")
for v, b in indifference_budgets(eq, parse_grid("10:40:2.5")).items():
    print(f"{fmt(v)},{'none' if b is None else fmt(b)}")
