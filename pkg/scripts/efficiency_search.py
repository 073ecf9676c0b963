"""Search for scenarios where the dual market allocates less value than a posted price.

    python3 scripts/efficiency_search.py [--trials 20000] [--seed 0]

Reservers are served before anyone else, so when supply is short a
low-value reserver can displace a high-value spot bidder that a posted
price would have rationed alongside it.  The default random generator
rarely lands there; this search biases toward it (budgets close to the
value, supply atoms just above the reserved mass) and reports how often
EFF(dual) < EFF(reservation-only at the same price) under A1 and A2.
"""
import argparse

import numpy as np

from spotres import (
    SupplyDistribution,
    TypeAtom,
    TypeDistribution,
    UtilityCurve,
    make_soft_budget,
    run_dual,
    run_reservation_only,
    solve,
    validate_assumptions,
)

ap = argparse.ArgumentParser()
ap.add_argument("--trials", type=int, default=20_000)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()
rng = np.random.default_rng(args.seed)

valid = found = 0
worst = None
for _ in range(args.trials):
    lo, hi = sorted(rng.choice(np.arange(1, 21), size=2, replace=False).astype(float))
    m = float(rng.uniform(0.2, 0.8))
    types = TypeDistribution(
        [TypeAtom(lo, make_soft_budget(lo, lo * float(rng.uniform(0.9, 0.9999))), m), TypeAtom(hi, UtilityCurve.identity(), 1 - m)]
    )
    short = float(rng.uniform(m, 1.0))
    supply = SupplyDistribution([(1.0, 1 - (p := float(rng.uniform(0.05, 0.5)))), (round(short, 6), p)])
    p_r = float(rng.uniform(0.5, lo))
    eq = solve(types, supply, p_r)
    a = validate_assumptions(eq)
    if not (a.a1 and a.a2):
        continue
    valid += 1
    gap = run_dual(eq).efficiency - run_reservation_only(types, supply, p_r).efficiency
    if gap < -1e-9:
        found += 1
        if worst is None or gap < worst[0]:
            worst = (gap, lo, hi, m, short, p, p_r)

print(f"valid scenarios: {valid}, EFF(dual) < EFF(reservation): {found}")
if worst:
    gap, lo, hi, m, short, p, p_r = worst
    print(f"largest gap {gap:.6g}: values ({lo:g}, {hi:g}), low mass {m:.4f}, supply {{1: {1 - p:.4f}, {short:.6f}: {p:.4f}}}, p_r={p_r:.4f}")
