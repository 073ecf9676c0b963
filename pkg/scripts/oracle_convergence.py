"""Monte Carlo gaps against the analytic metrics as the population grows.

    python3 scripts/oracle_convergence.py [--draws 10000] [--seed 0]

Standard-error-normalized gaps should stay O(1) as n grows.
"""
import argparse
from pathlib import Path

from spotres import SimulationConfig, load_scenario, simulate, solve
from spotres.oracle import compare

ap = argparse.ArgumentParser()
ap.add_argument("scenario", nargs="?", default=str(Path(__file__).resolve().parents[1] / "scenarios" / "ex1.mkt"))
ap.add_argument("--draws", type=int, default=10_000)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

sc = load_scenario(args.scenario)
eq = solve(sc.types, sc.supply, sc.p_r, sc.tie)
print("n_agents,metric,analytic,empirical,std_err,z_score")
for n in (10**3, 10**4, 10**5, 10**6):
    res = simulate(eq, SimulationConfig(n, args.draws, args.seed))
    for r in compare(eq, res):
        print(f"{n},{r.metric},{r.analytic:.12g},{r.empirical:.12g},{r.std_err:.6g},{r.z_score:+.3f}")
