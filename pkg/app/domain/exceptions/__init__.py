"""
Domain Exceptions - Violated preconditions and invariants.

These exceptions carry a stable ``code`` and the offending values.
They are translated to exit codes and diagnostics at the CLI layer.
"""
from app.domain.exceptions.laboratory_exceptions import (
    DomainException,
    InvalidResolutionError,
    InvalidGridError,
    ParameterDomainError,
    QuadratureAccuracyError,
    ResourceBudgetError,
    InvariantViolationError,
    ConfigurationError,
    WrongRegimeError,
    DegenerateCapacityError,
    require,
    require_grid,
)

__all__ = [
    "DomainException",
    "InvalidResolutionError",
    "InvalidGridError",
    "ParameterDomainError",
    "QuadratureAccuracyError",
    "ResourceBudgetError",
    "InvariantViolationError",
    "ConfigurationError",
    "WrongRegimeError",
    "DegenerateCapacityError",
    "require",
    "require_grid",
]
