"""
Spectral Decomposition Entity.

Eigenvalues and mu-orthonormal eigenvectors of the (killed) generator.
All kernels and fractional powers are built from this object.
"""
from dataclasses import dataclass

import numpy as np

from app.domain.exceptions import InvariantViolationError


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    Solution of A phi = lambda M phi.

    eigenvectors has shape (node_count, k): column k is phi_k extended by
    zero on boundary nodes. Orthonormality is with respect to
    <f, g> = sum_i f_i g_i mu_i.
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    measure: np.ndarray
    killed: bool

    def __post_init__(self):
        for name in ("eigenvalues", "eigenvectors", "measure"):
            array = np.ascontiguousarray(getattr(self, name), dtype=float)
            array.flags.writeable = False
            object.__setattr__(self, name, array)
        if np.any(np.diff(self.eigenvalues) < 0):
            raise InvariantViolationError("SpectralDecomposition", "ascending eigenvalues")
        if self.eigenvalues[0] < 0:
            raise InvariantViolationError("SpectralDecomposition", "nonnegative eigenvalues")

    @property
    def node_count(self) -> int:
        return int(self.eigenvectors.shape[0])

    @property
    def mode_count(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def spectral_gap(self) -> float:
        """Smallest positive eigenvalue (lambda_0 when killed, lambda_1 otherwise)."""
        return float(self.eigenvalues[0] if self.killed else self.eigenvalues[1])

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        """<f, phi_k> for all k."""
        return self.eigenvectors.T @ (np.asarray(f, dtype=float) * self.measure)

    def synthesize(self, coefficients: np.ndarray) -> np.ndarray:
        return self.eigenvectors @ coefficients

    def multiplier_matrix(self, multiplier: np.ndarray) -> np.ndarray:
        """Symmetric matrix sum_k m_k phi_k(i) phi_k(j)."""
        weighted = self.eigenvectors * multiplier[np.newaxis, :]
        matrix = weighted @ self.eigenvectors.T
        return 0.5 * (matrix + matrix.T)

    def apply_multiplier(self, multiplier: np.ndarray, f: np.ndarray) -> np.ndarray:
        """sum_k m_k <f, phi_k> phi_k without forming a matrix."""
        return self.synthesize(multiplier * self.coefficients(f))
