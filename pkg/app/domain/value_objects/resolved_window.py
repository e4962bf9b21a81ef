"""
Resolved Window Value Object.

Range of times or radii where a discrete model follows continuum scaling:
between lattice scale and spectral-gap (or diameter) scale.
"""
from dataclasses import dataclass

import numpy as np

from app.domain.exceptions import InvalidGridError


@dataclass(frozen=True)
class ResolvedWindow:
    lower: float
    upper: float
    quantity: str = "t"

    def __post_init__(self):
        if not (0.0 < self.lower < self.upper):
            raise InvalidGridError(
                f"{self.quantity}-window",
                f"empty resolved window [{self.lower:.3e}, {self.upper:.3e}]",
            )

    def contains(self, value: float) -> bool:
        # relative slack so grids generated on the window edges stay inside
        return self.lower * (1 - 1e-12) <= value <= self.upper * (1 + 1e-12)

    def restrict(self, grid) -> np.ndarray:
        """Return the grid points lying inside the window, ascending."""
        values = np.sort(np.asarray(grid, dtype=float))
        inside = values[[self.contains(v) for v in values]]
        return inside

    def log_grid(self, count: int, lower_multiplier: float = 1.0, upper_multiplier: float = 1.0) -> np.ndarray:
        """Log-spaced grid of `count` points spanning the (scaled) window."""
        lo = self.lower * lower_multiplier
        hi = self.upper * upper_multiplier
        if not (0 < lo < hi):
            raise InvalidGridError(f"{self.quantity}-grid", "multipliers collapse the window")
        return np.geomspace(lo, hi, count)

    @property
    def decades(self) -> float:
        return float(np.log10(self.upper / self.lower))

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "lower": self.lower, "upper": self.upper}
