"""Exception hierarchy shared across the package."""


class InvariantError(Exception):
    """Base class for all package errors."""


class ConfigError(InvariantError, ValueError):
    """Invalid configuration or usage."""


class ParseError(InvariantError, ValueError):
    """Malformed input file.  Carries the offending row/column when known."""

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class DomainError(InvariantError, ValueError):
    """Input outside the domain of an operation."""


class NumericalError(InvariantError, ArithmeticError):
    """An iterative method failed to converge or a result violated a sanity bound."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
