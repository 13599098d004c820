"""Constrained nonlinear programming by integrating a gradient flow.

The solver treats a problem

    min f(theta)  s.t.  g(theta) <= 0,  h(theta) = 0

as an initial-value problem over a virtual time: multipliers for the equality
and working inequality constraints are recovered through a pseudo-inverse at
every evaluation point, the parameter vector follows the resulting descent
direction, and violated constraints decay with first-order stable error
dynamics, so infeasible starts are handled without a separate restoration
phase.  Integration stops once the first-order optimality residuals fall
below tolerance.
"""

__version__ = "0.1.0"

from .autodiff import Dual, seed
from .dynamics import (
    GainSet,
    MultiplierBoundWarning,
    PtsState,
    RhsResult,
    WorkingSet,
    classify,
    feasibility_lp,
    pts_update,
    resolve_working_set,
    rhs_feasible,
    rhs_general,
)
from .errors import (
    CyclingError,
    EvaluationError,
    InfeasibleSubproblemError,
    InvalidInputError,
    NlpflowError,
    NumericFailureError,
    ProblemParseError,
    StepFailureError,
    UnknownProblemError,
)
from .integrate import (
    FlowState,
    IntegratorConfig,
    OdeResult,
    Trajectory,
    fd_jacobian,
    integrate_ode,
    solve,
    step_rk45,
    step_stiff,
)
from .linalg import (
    PinvFactorization,
    pinv,
    pinv_gram,
    projector_col,
    projector_row,
    sqrt_spd,
    svd,
)
from .monitor import KktReport, ToleranceSet, decide, kkt_report, lyapunov_value
from .problemfile import parse_problem, serialize_problem
from .problems import (
    EvalPoint,
    NlpProblem,
    builtin,
    builtin_names,
    check_derivatives,
    evaluate,
    finite_difference_derivatives,
)

__all__ = [
    "__version__",
    "Dual", "seed",
    "GainSet", "MultiplierBoundWarning", "PtsState", "RhsResult", "WorkingSet",
    "classify", "feasibility_lp", "pts_update", "resolve_working_set",
    "rhs_feasible", "rhs_general",
    "CyclingError", "EvaluationError", "InfeasibleSubproblemError",
    "InvalidInputError", "NlpflowError", "NumericFailureError",
    "ProblemParseError", "StepFailureError", "UnknownProblemError",
    "FlowState", "IntegratorConfig", "OdeResult", "Trajectory",
    "fd_jacobian", "integrate_ode", "solve", "step_rk45", "step_stiff",
    "PinvFactorization", "pinv", "pinv_gram", "projector_col",
    "projector_row", "sqrt_spd", "svd",
    "KktReport", "ToleranceSet", "decide", "kkt_report", "lyapunov_value",
    "parse_problem", "serialize_problem",
    "EvalPoint", "NlpProblem", "builtin", "builtin_names",
    "check_derivatives", "evaluate", "finite_difference_derivatives",
]
