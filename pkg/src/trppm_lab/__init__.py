"""Trust-region proximal point laboratory.

Exact ball-constrained proximal solvers over a catalog of convex test
problems, displacement-function analysis, regime solvers with
self-auditing traces, and a deterministic verification harness.
"""

from .checks import (
    CheckResult,
    SUITE_NAMES,
    VerificationReport,
    evaluate_trace_check,
    run_suite,
)
from .config import ExperimentConfig, load_config, parse_config
from .displacement import (
    MinDisplacementQuery,
    ball_samples,
    critical_lambda,
    critical_lambda_upper_bound,
    displacement,
    min_displacement_closed_form,
    min_displacement_grid,
    weak_sharp_lambda,
)
from .errors import (
    ClosedFormUnavailable,
    ConfigError,
    InfeasibleRegionError,
    NumericalFailure,
    PreconditionError,
)
from .linalg import eigendecompose, smallest_positive_eigenvalue
from .problems import (
    CATALOG,
    IndicatorBall,
    IndicatorBox,
    Problem,
    Quadratic,
    Quartic1D,
    ScaledAbs,
    SharpNorm,
    make_problem,
)
from .prox import ProxResult, SubproblemSpec, brox, prox, prox_zero, tr_prox
from .solvers import (
    CSV_COLUMNS,
    IterateRecord,
    LambdaRule,
    Regime,
    SolverConfig,
    Termination,
    Trace,
    check_bpm_equivalence,
    empirical_rate,
    run,
    step_ppm,
    step_trppm,
)

__version__ = "0.1.0"

__all__ = [
    "CATALOG",
    "CSV_COLUMNS",
    "CheckResult",
    "ClosedFormUnavailable",
    "ConfigError",
    "ExperimentConfig",
    "IndicatorBall",
    "IndicatorBox",
    "InfeasibleRegionError",
    "IterateRecord",
    "LambdaRule",
    "MinDisplacementQuery",
    "NumericalFailure",
    "PreconditionError",
    "Problem",
    "ProxResult",
    "Quadratic",
    "Quartic1D",
    "Regime",
    "ScaledAbs",
    "SharpNorm",
    "SolverConfig",
    "SubproblemSpec",
    "SUITE_NAMES",
    "Termination",
    "Trace",
    "VerificationReport",
    "ball_samples",
    "brox",
    "check_bpm_equivalence",
    "critical_lambda",
    "critical_lambda_upper_bound",
    "displacement",
    "eigendecompose",
    "empirical_rate",
    "evaluate_trace_check",
    "load_config",
    "make_problem",
    "min_displacement_closed_form",
    "min_displacement_grid",
    "parse_config",
    "prox",
    "prox_zero",
    "run",
    "run_suite",
    "smallest_positive_eigenvalue",
    "step_ppm",
    "step_trppm",
    "tr_prox",
    "weak_sharp_lambda",
]
