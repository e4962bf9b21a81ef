"""
Kernel Matrix Entity.

Dense symmetric heat kernel p_t(x, y) (delta = 1) or subordinated kernel
p_t^(delta)(x, y), in units of 1/measure.
"""
from dataclasses import dataclass

import numpy as np

from app.domain.exceptions import InvariantViolationError

NEGATIVE_CLIP = 1e-10
ROW_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    t: float
    delta: float
    entries: np.ndarray
    measure: np.ndarray
    stochastic: bool

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=float)
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        if not np.array_equal(entries, entries.T):
            raise InvariantViolationError("KernelMatrix", "symmetric entries")
        if entries.min() < 0.0:
            raise InvariantViolationError("KernelMatrix", "nonnegative entries", f"min={entries.min():.3e}")

    @classmethod
    def from_raw(cls, t: float, delta: float, raw: np.ndarray, measure: np.ndarray, stochastic: bool) -> "KernelMatrix":
        """
        Symmetrize and clip floating-point noise.

        Negative entries down to -1e-10 (relative to the largest entry when
        that exceeds one) are set to zero; anything more negative is an
        invariant violation.
        """
        entries = 0.5 * (raw + raw.T)
        scale = max(1.0, float(np.abs(entries).max()))
        if entries.min() < -NEGATIVE_CLIP * scale:
            raise InvariantViolationError(
                "KernelMatrix", "entries >= -1e-10", f"min={entries.min():.3e} at t={t}, delta={delta}"
            )
        entries = np.where(entries < 0.0, 0.0, entries)
        return cls(t=float(t), delta=float(delta), entries=entries, measure=measure, stochastic=stochastic)

    @property
    def node_count(self) -> int:
        return int(self.entries.shape[0])

    def row_integrals(self) -> np.ndarray:
        """sum_j p(i, j) mu_j for each i."""
        return self.entries @ self.measure

    def apply(self, f: np.ndarray) -> np.ndarray:
        """P f (x) = sum_y p(x, y) f(y) mu(y)."""
        return self.entries @ (np.asarray(f, dtype=float) * self.measure)

    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).copy()

    def check_mass(self, tolerance: float = ROW_TOLERANCE) -> None:
        """Row integrals are 1 when stochastic and at most 1 when killed."""
        rows = self.row_integrals()
        if self.stochastic and np.max(np.abs(rows - 1.0)) > tolerance:
            raise InvariantViolationError("KernelMatrix", "row integrals equal 1",
                                          f"max deviation {np.max(np.abs(rows - 1.0)):.3e}")
        if not self.stochastic and rows.max() > 1.0 + tolerance:
            raise InvariantViolationError("KernelMatrix", "row integrals at most 1", f"max {rows.max():.6f}")
