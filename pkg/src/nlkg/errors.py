"""Exception types shared across the package.

The CLI maps these onto exit codes: validation-type errors exit with 2,
``ConvergenceError`` with 3 and ``NumericalFailure`` with 4.
"""


class NLKGError(Exception):
    """Base class for all package errors."""


class ParameterError(NLKGError, ValueError):
    """Physical parameters violate their invariants."""


class GridMismatchError(NLKGError, ValueError):
    """Two fields live on different grids."""


class DomainError(NLKGError, ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(NLKGError, ValueError):
    """Hypotheses of a check are not satisfied.

    ``failed`` lists the names of the violated hypotheses.
    """

    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = list(failed)


class NoRootError(NLKGError, ValueError):
    """A scaling equation has no positive root."""


class InsufficientDataError(NLKGError, ValueError):
    """Too few samples to form the requested estimate."""


class ConvergenceError(NLKGError, RuntimeError):
    """An iterative solver stopped without meeting its tolerance."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class DegenerateIterateError(ConvergenceError):
    """A Petviashvili iterate collapsed (nonpositive stabilizing factor)."""


class NumericalFailure(NLKGError, RuntimeError):
    """Non-finite values appeared without a preceding norm blow-up."""
