"""
Report Entities.

Machine-readable results of fits and inequality checks. Every report can
be flattened to a JSON-safe dictionary with deterministic key order.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

from app.domain.exceptions import InvariantViolationError


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


def json_safe(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats for JSON output."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [json_safe(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    return value


@dataclass(frozen=True)
class SlopeFit:
    """Ordinary least squares fit of log values against log abscissae."""
    log_x: tuple[float, ...]
    log_y: tuple[float, ...]
    slope: float
    intercept: float
    r_squared: float
    slope_stderr: float
    window: tuple[float, float]

    def __post_init__(self):
        if len(self.log_x) < 5:
            raise InvariantViolationError("SlopeFit", "at least 5 points", f"got {len(self.log_x)}")

    def passes_gate(self, r2_gate: float) -> bool:
        return bool(self.r_squared >= r2_gate)

    def to_dict(self) -> dict:
        return json_safe({
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "slope_stderr": self.slope_stderr,
            "points": len(self.log_x),
            "window": list(self.window),
        })


@dataclass(frozen=True)
class BoundFitReport:
    """Two-sided kernel envelope fit: c5 t^-g Phi(c6 s) <= p_t <= c3 t^-g Phi(c4 s)."""
    profile: str
    exponent: float
    c3: float
    c4: float
    c5: float
    c6: float
    diagonal_fit: SlopeFit
    predicted_slope: float
    coverage: float
    window: tuple[float, float]

    def __post_init__(self):
        if self.c5 > self.c3:
            raise InvariantViolationError("BoundFitReport", "c5 <= c3")

    def to_dict(self) -> dict:
        return json_safe({
            "profile": self.profile,
            "exponent": self.exponent,
            "c3": self.c3, "c4": self.c4, "c5": self.c5, "c6": self.c6,
            "diagonal_fit": self.diagonal_fit.to_dict(),
            "predicted_slope": self.predicted_slope,
            "coverage": self.coverage,
            "window": list(self.window),
        })


@dataclass(frozen=True)
class SeminormReport:
    function_id: str
    besov: float
    besov_argmax_t: float
    ks_limsup: float
    ks_sup: float
    w_norm: float
    grigoryan_inf: float
    grigoryan_p: float
    edge_pinned: bool
    window: tuple[float, float]

    def __post_init__(self):
        values = (self.besov, self.ks_limsup, self.ks_sup, self.w_norm, self.grigoryan_inf, self.grigoryan_p)
        if any(v < 0 for v in values):
            raise InvariantViolationError("SeminormReport", "nonnegative entries", self.function_id)
        if self.ks_limsup > self.ks_sup * (1 + 1e-12) + 1e-300:
            raise InvariantViolationError("SeminormReport", "ks_limsup <= ks_sup", self.function_id)

    def table_row(self) -> tuple:
        return (self.function_id, self.besov, self.ks_limsup, self.ks_sup, self.w_norm,
                self.grigoryan_inf, self.grigoryan_p)

    def to_dict(self) -> dict:
        return json_safe({
            "function_id": self.function_id,
            "besov": self.besov,
            "besov_argmax_t": self.besov_argmax_t,
            "ks_limsup": self.ks_limsup,
            "ks_sup": self.ks_sup,
            "w_norm": self.w_norm,
            "N_p_inf": self.grigoryan_inf,
            "N_p_p": self.grigoryan_p,
            "edge_pinned": self.edge_pinned,
            "window": list(self.window),
        })


@dataclass(frozen=True)
class CriticalExponentReport:
    p: float
    delta: float
    estimate: Optional[float]
    prediction: Optional[float]
    bracket: Optional[tuple[float, float]]
    beta_p: Optional[float]
    fits: dict[str, SlopeFit]
    witness: Optional[str]
    tolerance: float
    status: CheckStatus

    def __post_init__(self):
        if self.estimate is not None and not (0.0 < self.estimate <= 1.0):
            raise InvariantViolationError("CriticalExponentReport", "estimate in (0, 1]", f"{self.estimate}")

    def to_dict(self) -> dict:
        return json_safe({
            "p": self.p,
            "delta": self.delta,
            "estimate": self.estimate,
            "prediction": self.prediction,
            "bracket": list(self.bracket) if self.bracket else None,
            "beta_p": self.beta_p,
            "witness": self.witness,
            "fits": {k: v.to_dict() for k, v in sorted(self.fits.items())},
            "tolerance": self.tolerance,
            "status": self.status,
        })


@dataclass(frozen=True)
class InequalityReport:
    """
    lhs <= constant * rhs with a fitted constant.

    passed is True when the constant is finite and within its cap (and any
    extra rate requirement of the check holds). Inconclusive reports carry
    neither pass nor fail.
    """
    name: str
    lhs: float
    rhs: float
    constant: float
    cap: float
    passed: bool
    tolerance: float
    metadata: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    inconclusive: bool = False
    fit: Optional[SlopeFit] = None

    @property
    def status(self) -> CheckStatus:
        if self.inconclusive:
            return CheckStatus.INCONCLUSIVE
        return CheckStatus.PASS if self.passed else CheckStatus.FAIL

    def to_dict(self) -> dict:
        return json_safe({
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.constant,
            "cap": self.cap,
            "status": self.status,
            "tolerance": self.tolerance,
            "metadata": dict(sorted(self.metadata.items())),
            "values": dict(sorted(self.values.items())),
            "fit": self.fit.to_dict() if self.fit else None,
        })
