"""Dual spot/reservation markets with risk-averse buyers over finite type supports."""
from .curves import (
    CurveError,
    DegenerateCurve,
    InvalidBudget,
    InvalidCurve,
    NegativeArgument,
    RiskOrder,
    UtilityCurve,
    compare_risk_aversion,
    compose_concave,
    evaluate,
    make_soft_budget,
)
from .population import (
    InvalidScenario,
    SupplyDistribution,
    TypeAtom,
    TypeDistribution,
    supply_cdf_strict,
    value_cdf,
)
from .clearing import ClearingResult, SpotAtom, clear, clearing_price_distribution, price_cdf
from .equilibrium import (
    AssumptionViolated,
    Equilibrium,
    EquilibriumReport,
    TieBreakPolicy,
    solve,
    validate_assumptions,
    verify_equilibrium,
)
from .mechanisms import (
    MechanismOutcome,
    benchmark_welfare,
    check_welfare_chain,
    optimal_reservation_price,
    run_dual,
    run_reservation_only,
    run_spot_only,
)
from .experiments import (
    NoValidPrice,
    NotMoreAverse,
    apply_risk_transform,
    check_statics,
    indifference_budgets,
    sweep_reservation_price,
)
from .oracle import SimulationConfig, best_response_check, simulate
from .scenario import Scenario, ScenarioError, format_scenario, load_scenario, parse_scenario

__version__ = "0.1.0"
