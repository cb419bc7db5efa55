"""Exception types shared across the package."""


class NumericalFailure(RuntimeError):
    """An inner iterative solver failed to reach its residual tolerance.

    Carries the last residual so callers (and the CLI exit path) can report
    how far the solve got.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = float(residual)


class ConfigError(ValueError):
    """Invalid or unknown experiment configuration content."""


class PreconditionError(ValueError):
    """A mathematical precondition of an operation does not hold.

    Raised e.g. when a rule that needs dist(x, X*) > t is queried inside the
    t-neighborhood. Solvers treat this as a normal termination signal.
    """


class InfeasibleRegionError(ValueError):
    """A sampled region contains no admissible points."""


class ClosedFormUnavailable(ValueError):
    """No closed-form expression is known for the requested quantity."""
