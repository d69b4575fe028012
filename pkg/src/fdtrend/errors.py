"""Exception hierarchy.

Validation problems derive from :class:`ValueError`; numerical breakdowns
derive from :class:`ArithmeticError`. The CLI maps the former to exit
status 1 and the latter to exit status 2.
"""


class FdtrendError(Exception):
    """Base class for all package errors."""


class ValidationError(FdtrendError, ValueError):
    """Invalid input (bad argument, malformed file, inconsistent shapes)."""


class NumericalError(FdtrendError, ArithmeticError):
    """A computation could not be carried out on otherwise valid input."""


class InvalidBandwidthError(ValidationError):
    pass


class InvalidGridError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class InsufficientDataError(ValidationError):
    pass


class InvalidLevelError(ValidationError):
    pass


class GridMismatchError(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class DegenerateWindowError(NumericalError):
    """Local linear window with too few points or a collinear design."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NotPSDError(NumericalError):
    pass


class ReplicationError(FdtrendError):
    """Wraps an error raised inside a Monte Carlo replication."""

    def __init__(self, replication, cause):
        super().__init__(f"replication {replication}: {cause}")
        self.replication = replication
        self.cause = cause
