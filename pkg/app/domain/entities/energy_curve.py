"""
Energy Curve Entity.

Besov energy t -> E_p(t, f) of one function on an ascending log grid.
"""
from dataclasses import dataclass

import numpy as np

from app.domain.exceptions import InvariantViolationError


@dataclass(frozen=True, eq=False)
class EnergyCurve:
    p: float
    delta: float
    grid: np.ndarray
    energies: np.ndarray
    function_id: str

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        energies = np.asarray(self.energies, dtype=float)
        if grid.shape != energies.shape:
            raise InvariantViolationError("EnergyCurve", "grid and energies aligned")
        if np.any(np.diff(grid) <= 0):
            raise InvariantViolationError("EnergyCurve", "ascending grid")
        if not np.all(np.isfinite(energies)):
            raise InvariantViolationError("EnergyCurve", "finite energies", self.function_id)
        # tiny negatives come from cancellation only
        energies = np.where(energies < 0.0, 0.0, energies)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "energies", energies)

    def scaled(self, alpha: float) -> np.ndarray:
        """t^(-alpha) E_p(t)^(1/p) along the grid."""
        return self.grid ** (-alpha) * self.energies ** (1.0 / self.p)

    @property
    def is_constant_function(self) -> bool:
        return bool(np.all(self.energies == 0.0))

    def rows(self, alpha: float) -> list[tuple[float, float, float]]:
        """(t, E_p, t^-alpha E_p^(1/p)) rows for CSV export."""
        scaled = self.scaled(alpha)
        return [(float(t), float(e), float(s)) for t, e, s in zip(self.grid, self.energies, scaled)]
