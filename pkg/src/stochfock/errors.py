"""Exception and warning types shared by every module."""


class StochfockError(Exception):
    """Base class for all library errors."""


class DomainError(StochfockError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResourceError(StochfockError, RuntimeError):
    """A dimension or parameter cap was hit before the requested accuracy.

    ``achieved`` carries the best value reached (a tail mass, a deviation, ...).
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class NumericalError(StochfockError, ArithmeticError):
    """A numerical consistency check failed (residue, positivity, convergence)."""


class AccuracyWarning(UserWarning):
    """Result computed outside its documented accuracy envelope."""
