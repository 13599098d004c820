"""Exception hierarchy shared across the package."""


class NlpflowError(Exception):
    """Base class for all package errors."""


class InvalidInputError(NlpflowError, ValueError):
    """Input violates a documented precondition (non-finite, wrong shape, ...)."""


class NumericFailureError(NlpflowError, RuntimeError):
    """A numerical routine failed to converge or produced non-finite output."""


class EvaluationError(NlpflowError):
    """A problem function produced a non-finite value.

    ``component`` identifies the offending piece: "objective", ("ineq", i),
    ("eq", i), or a derivative counterpart.
    """

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


class ProblemParseError(NlpflowError, ValueError):
    """Problem-file text violates the grammar."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownProblemError(NlpflowError, KeyError):
    """Requested builtin problem name is not registered."""


class CyclingError(NumericFailureError):
    """The working-set loop failed to settle.

    ``index_sets`` records the sequence of candidate sets that oscillated,
    ``lp_gamma`` the auxiliary LP verdict if it was run.
    """

    def __init__(self, message, index_sets=(), lp_gamma=None):
        super().__init__(message)
        self.index_sets = tuple(tuple(s) for s in index_sets)
        self.lp_gamma = lp_gamma


class InfeasibleSubproblemError(NumericFailureError):
    """The instantaneous direction-finding subproblem has no feasible point."""

    def __init__(self, message, lp_gamma=None):
        super().__init__(message)
        self.lp_gamma = lp_gamma


class StepFailureError(NumericFailureError):
    """Adaptive stepper drove the step size below its floor."""
