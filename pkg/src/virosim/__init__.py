"""Three-compartment in-host viral dynamics toolkit.

Deterministic layer: model definitions, equilibria, stability (``model``) and
ODE integration (``integrate``). Randomized layer: parameter distributions
with a counter-based seeding contract (``sampling``) and Monte-Carlo
persistence experiments (``montecarlo``). The ``virosim`` console script
fronts all of it; see the README for usage.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .backend import BACKEND_NAME
from .integrate import (
    IntegrationError,
    IntegratorConfig,
    Method,
    NonFiniteState,
    StepBudgetExceeded,
    Trajectory,
    integrate,
    state_at,
)
from .model import (
    BOUNDARY_TOLERANCE,
    CubicCoefficients,
    Parameters,
    StabilityKind,
    StabilityReport,
    State,
    characteristic_coefficients_persistence,
    classify,
    cubic_roots,
    extinction_equilibrium,
    jacobian,
    persistence_equilibrium,
    reproduction_number,
    rhs,
    routh_hurwitz_stable,
)
from .montecarlo import (
    AsymptoticR,
    AxisMarginal,
    CellEstimate,
    DisagreementSummary,
    ExperimentConfig,
    FailureRecord,
    FiniteTime,
    InitialConditionGrid,
    IntegrationFailed,
    PersistenceCriterion,
    PersistenceEstimate,
    TrialOutcome,
    criterion_disagreement,
    estimate,
    ic_sweep,
    run_trial,
    wilson_interval,
)
from .sampling import (
    PARAMETER_RANGES,
    PRNG_IDENTITY,
    Constant,
    Distribution,
    LambdaRule,
    RejectionBudgetExceeded,
    Scenario,
    SeedSpec,
    Triangular,
    TruncatedNormal,
    Uniform,
    builtin_scenarios,
    sample,
    sample_parameters,
    truncated_normal_scenario,
    uniform_triangular_scenario,
)

__all__ = [
    "__version__",
    "BACKEND_NAME",
    # model
    "Parameters", "State", "CubicCoefficients", "StabilityKind",
    "StabilityReport", "BOUNDARY_TOLERANCE", "rhs", "jacobian",
    "reproduction_number", "extinction_equilibrium", "persistence_equilibrium",
    "characteristic_coefficients_persistence", "cubic_roots",
    "routh_hurwitz_stable", "classify",
    # integrate
    "Method", "IntegratorConfig", "Trajectory", "IntegrationError",
    "StepBudgetExceeded", "NonFiniteState", "integrate", "state_at",
    # sampling
    "Constant", "Uniform", "Triangular", "TruncatedNormal", "Distribution",
    "RejectionBudgetExceeded", "LambdaRule", "Scenario", "SeedSpec",
    "PRNG_IDENTITY", "sample", "sample_parameters", "PARAMETER_RANGES",
    "truncated_normal_scenario", "uniform_triangular_scenario",
    "builtin_scenarios",
    # montecarlo
    "AsymptoticR", "FiniteTime", "PersistenceCriterion",
    "InitialConditionGrid", "ExperimentConfig", "TrialOutcome",
    "FailureRecord", "IntegrationFailed", "CellEstimate", "AxisMarginal",
    "PersistenceEstimate", "DisagreementSummary", "wilson_interval",
    "run_trial", "estimate", "ic_sweep", "criterion_disagreement",
]
