"""
Laboratory Domain Exceptions.

Custom exceptions for violated preconditions and invariants of the
numerical laboratory (spaces, subordinators, kernels, seminorms, checks).
"""
from typing import Optional, Sequence


class DomainException(Exception):
    """Base exception for all domain errors."""

    def __init__(self, message: str, code: Optional[str] = None):
        self.message = message
        self.code = code or self.__class__.__name__
        super().__init__(self.message)


class InvalidResolutionError(DomainException):
    """Raised when a space builder receives a node count or level out of range."""

    def __init__(self, kind: str, value: int, allowed: str):
        super().__init__(
            message=f"Invalid resolution {value} for '{kind}': expected {allowed}",
            code="INVALID_RESOLUTION"
        )
        self.kind = kind
        self.value = value
        self.allowed = allowed


class InvalidGridError(DomainException):
    """Raised when a radius/time grid is degenerate or misses the resolved window."""

    def __init__(self, grid_name: str, reason: str):
        super().__init__(
            message=f"Invalid grid '{grid_name}': {reason}",
            code="INVALID_GRID"
        )
        self.grid_name = grid_name
        self.reason = reason


class ParameterDomainError(DomainException):
    """Raised when a scalar parameter lies outside its admissible domain."""

    def __init__(self, parameter: str, value: float, allowed: str):
        super().__init__(
            message=f"Parameter '{parameter}'={value!r} outside admissible domain {allowed}",
            code="PARAMETER_DOMAIN"
        )
        self.parameter = parameter
        self.value = value
        self.allowed = allowed


class QuadratureAccuracyError(DomainException):
    """Raised when an adaptive quadrature does not reach the requested tolerance."""

    def __init__(self, quantity: str, achieved_error: float, tolerance: float):
        super().__init__(
            message=f"Quadrature for {quantity} reached error {achieved_error:.3e} "
                    f"but {tolerance:.3e} was requested",
            code="QUADRATURE_ACCURACY"
        )
        self.quantity = quantity
        self.achieved_error = achieved_error
        self.tolerance = tolerance


class ResourceBudgetError(DomainException):
    """Raised when a dense computation would exceed the configured node budget."""

    def __init__(self, node_count: int, budget: int):
        super().__init__(
            message=f"Dense eigendecomposition of {node_count} nodes exceeds budget {budget}",
            code="RESOURCE_BUDGET"
        )
        self.node_count = node_count
        self.budget = budget


class InvariantViolationError(DomainException):
    """Raised when a constructed object breaks one of its structural invariants."""

    def __init__(self, entity: str, invariant: str, detail: str = ""):
        suffix = f" ({detail})" if detail else ""
        super().__init__(
            message=f"{entity} violates invariant '{invariant}'{suffix}",
            code="INVARIANT_VIOLATION"
        )
        self.entity = entity
        self.invariant = invariant
        self.detail = detail


class ConfigurationError(DomainException):
    """Raised when an operation is configured inconsistently (e.g. kappa missing)."""

    def __init__(self, field: str, reason: str):
        super().__init__(
            message=f"Configuration error for '{field}': {reason}",
            code="CONFIGURATION"
        )
        self.field = field
        self.reason = reason


class WrongRegimeError(DomainException):
    """Raised when a check is requested outside the parameter regime where it applies."""

    def __init__(self, check: str, regime: str, alternative: Optional[str] = None):
        hint = f"; use {alternative} instead" if alternative else ""
        super().__init__(
            message=f"{check} requires {regime}{hint}",
            code="WRONG_REGIME"
        )
        self.check = check
        self.regime = regime
        self.alternative = alternative


class DegenerateCapacityError(DomainException):
    """Raised when a capacity is requested on a conservative (non-killed) space."""

    def __init__(self, space: str):
        super().__init__(
            message=f"Variational capacity on '{space}' is degenerate: "
                    f"the space has no absorbing boundary",
            code="DEGENERATE_CAPACITY"
        )
        self.space = space


def require(condition: bool, parameter: str, value: float, allowed: str) -> None:
    """Raise ParameterDomainError unless condition holds."""
    if not condition:
        raise ParameterDomainError(parameter, value, allowed)


def require_grid(values: Sequence[float], grid_name: str, minimum: int = 2) -> None:
    """Raise InvalidGridError for grids that are too short or not strictly positive."""
    if len(values) < minimum:
        raise InvalidGridError(grid_name, f"needs at least {minimum} points, got {len(values)}")
    if any(not (v > 0) for v in values):
        raise InvalidGridError(grid_name, "all grid points must be strictly positive")
