"""Exception types raised by the numerical library.

Commands translate these into exit codes (see `elasticfm.utils.exit_on_error`).
"""
from typing import Optional


class ElasticFMError(Exception):
    """Base class for every error raised by elasticfm."""


class DomainError(ElasticFMError, ValueError):
    """An argument lies outside the domain of an operation."""


class ParameterError(DomainError):
    """A medium, geometry or run-configuration parameter is invalid."""


class CoincidentPointError(DomainError):
    """A Green kernel was evaluated at (numerically) coincident points."""


class SolverError(ElasticFMError, RuntimeError):
    """The forward solver could not meet its residual tolerance."""

    def __init__(
        self, message: str, residual: float, source_index: Optional[int] = None
    ) -> None:
        super().__init__(message)
        self.residual = residual
        self.source_index = source_index


class SingularModeError(ElasticFMError, ArithmeticError):
    """A modal matrix A_n is too ill-conditioned to invert."""

    def __init__(self, message: str, order: int) -> None:
        super().__init__(message)
        self.order = order


class NumericalError(ElasticFMError, ArithmeticError):
    """A dense linear-algebra step failed or produced non-finite values."""
