"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to process status without a lookup table.
"""


class DepthJelError(Exception):
    """Base class for all package errors."""

    exit_code = 4


# -- configuration / data ingestion -------------------------------------------


class ConfigError(DepthJelError, ValueError):
    exit_code = 2


class DataError(DepthJelError, ValueError):
    exit_code = 3


class DataFileNotFound(DataError, FileNotFoundError):
    pass


class MissingColumn(DataError):
    pass


class ParseError(DataError):
    def __init__(self, row, message):
        super().__init__(f"row {row}: {message}")
        self.row = row


class DimensionMismatch(DataError):
    pass


class InsufficientData(DataError):
    pass


# -- numerical ----------------------------------------------------------------


class NumericalError(DepthJelError, ArithmeticError):
    exit_code = 4


class DomainError(NumericalError, ValueError):
    pass


class ZeroDenominator(NumericalError, ZeroDivisionError):
    pass


class ZeroMeanDepth(NumericalError):
    pass


class HullViolation(NumericalError):
    """Zero is not interior to the convex hull of the pseudo-values."""


class NoConvergence(NumericalError):
    def __init__(self, message, grad_norm=float("nan")):
        super().__init__(message)
        self.grad_norm = grad_norm


class ProfileFailure(NumericalError):
    pass


class UnboundedInterval(NumericalError):
    pass


class DegenerateDepths(UserWarning):
    """All sample depths fell at or below the floor; uniform weights used."""
