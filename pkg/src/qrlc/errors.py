"""Exception types shared across the package."""

from __future__ import annotations


class QrlcError(Exception):
    """Base class for all package errors."""


class DimensionError(QrlcError, ValueError):
    """Operands have incompatible sizes or formats."""


class PreconditionError(QrlcError, ValueError):
    """An input violates a documented precondition."""


class ParameterError(QrlcError, ValueError):
    """A numeric or configuration parameter is out of range."""


class ConsistencyError(QrlcError, RuntimeError):
    """An internal invariant was violated; indicates a bug or corrupt input."""


class FitError(QrlcError, ValueError):
    """A regression could not be performed on the supplied data."""


class DataError(QrlcError, ValueError):
    """A persisted artifact is corrupt or does not match its header."""
