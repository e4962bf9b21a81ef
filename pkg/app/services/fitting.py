"""
Log-log regression and refinement-level stability.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import linregress

from app.core.config import settings
from app.domain.entities import SlopeFit
from app.domain.exceptions import InvalidGridError
from app.domain.value_objects import ResolvedWindow

MIN_FIT_POINTS = 5


def slope_fit(
    x: Sequence[float],
    y: Sequence[float],
    window: Optional[ResolvedWindow] = None,
    quantity: str = "slope fit",
) -> SlopeFit:
    """
    Ordinary least squares of log y against log x.

    Points outside the window and non-positive values are dropped.

    Raises:
        InvalidGridError: fewer than 5 usable points remain
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(y) & (y > 0) & (x > 0)
    if window is not None:
        keep &= np.array([window.contains(v) for v in x], dtype=bool)
    x, y = x[keep], y[keep]
    if x.size < MIN_FIT_POINTS:
        raise InvalidGridError(quantity, f"needs >= {MIN_FIT_POINTS} positive points in the window, got {x.size}")
    order = np.argsort(x)
    log_x, log_y = np.log(x[order]), np.log(y[order])
    result = linregress(log_x, log_y)
    return SlopeFit(
        log_x=tuple(log_x.tolist()),
        log_y=tuple(log_y.tolist()),
        slope=float(result.slope),
        intercept=float(result.intercept),
        r_squared=float(result.rvalue ** 2),
        slope_stderr=float(result.stderr),
        window=(float(x[order][0]), float(x[order][-1])),
    )


@dataclass(frozen=True)
class StabilityCheck:
    """Relative change of a fitted constant between two refinement levels."""
    name: str
    coarse: float
    fine: float
    relative_change: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.relative_change) and self.relative_change <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "coarse": self.coarse,
            "fine": self.fine,
            "relative_change": self.relative_change if np.isfinite(self.relative_change) else None,
            "tolerance": self.tolerance,
            "status": "pass" if self.passed else "fail",
        }


def level_stability(name: str, coarse: float, fine: float, tolerance: Optional[float] = None) -> StabilityCheck:
    tolerance = settings.stability_tolerance if tolerance is None else tolerance
    if not (np.isfinite(coarse) and np.isfinite(fine)):
        change = float("inf")
    elif coarse == fine:
        change = 0.0
    else:
        change = abs(fine - coarse) / max(abs(coarse), np.finfo(float).tiny)
    return StabilityCheck(name=name, coarse=float(coarse), fine=float(fine), relative_change=float(change),
                          tolerance=float(tolerance))
