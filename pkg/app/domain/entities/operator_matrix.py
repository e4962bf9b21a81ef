"""
Operator Matrix Entity.

Dense fractional power (-L)^delta stored through its symmetric kernel:
((-L)^delta f)(x) = sum_y k(x, y) f(y) mu(y).
"""
from dataclasses import dataclass

import numpy as np

from app.domain.exceptions import InvariantViolationError


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    delta: float
    kernel: np.ndarray
    measure: np.ndarray
    route: str = "spectral"

    def __post_init__(self):
        kernel = np.ascontiguousarray(self.kernel, dtype=float)
        kernel.flags.writeable = False
        object.__setattr__(self, "kernel", kernel)
        if not np.array_equal(kernel, kernel.T):
            raise InvariantViolationError("OperatorMatrix", "symmetric kernel", self.route)

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.kernel @ (np.asarray(f, dtype=float) * self.measure)

    def matrix(self) -> np.ndarray:
        """Matrix acting on node values: kernel times diag(mu)."""
        return self.kernel * self.measure[np.newaxis, :]

    def quadratic_form(self, f: np.ndarray) -> float:
        g = np.asarray(f, dtype=float) * self.measure
        return float(g @ self.kernel @ g)
