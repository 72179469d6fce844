"""Exception hierarchy shared across the package."""


class LoairError(Exception):
    """Base class for all package errors."""


class DomainError(LoairError, ValueError):
    """Argument lies outside the mathematical domain of an operation."""


class ShapeError(LoairError, ValueError):
    """Array dimensions do not agree."""


class ConfigError(LoairError, ValueError):
    """Invalid hyperparameter or configuration value."""


class DataError(LoairError, ValueError):
    """Malformed or unusable input data."""


class ParseError(DataError):
    """A cell of an input file could not be parsed as a finite number."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class InsufficientDataError(DataError):
    """Too few observations for the requested fit."""


class FeatureLookupError(LoairError, KeyError):
    """A named column does not exist."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NumericError(LoairError, ArithmeticError):
    """Non-finite values appeared during a computation."""


class SingularityError(NumericError):
    """Design matrix is rank deficient or too ill-conditioned to solve."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)
