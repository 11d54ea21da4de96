"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid or out-of-range input parameters."""


class GuardError(ParameterError):
    """A computation was refused because it would exceed a size guard."""


class ConvergenceError(RuntimeError):
    """An iterative eigensolver failed to reach the requested tolerance.

    The best estimate seen so far is kept on the exception so callers can
    still report it.
    """

    def __init__(self, message, estimate=float("nan"), residual=float("nan"),
                 iterations=0):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual
        self.iterations = iterations
