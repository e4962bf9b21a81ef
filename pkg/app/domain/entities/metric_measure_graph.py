"""
Metric Measure Graph Entity.

Discrete approximation (X, d, mu, E) of a metric measure Dirichlet space:
nodes with an ambient embedding, a pairwise metric, node masses, edge
conductances and an optional absorbing boundary.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from app.domain.exceptions import InvariantViolationError
from app.domain.value_objects import GeometryParams, SpaceKind, BoundaryMode


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class MetricMeasureGraph:
    """
    Immutable discrete metric measure Dirichlet space.

    The quadratic form is E(f, f) = sum over edges c_ij (f_i - f_j)^2, the
    mass matrix is diag(mu). Boundary nodes are absorbing: functions of the
    killed form vanish there.
    """
    kind: SpaceKind
    resolution: int
    positions: np.ndarray
    coordinate: np.ndarray
    metric: np.ndarray
    measure: np.ndarray
    conductances: sp.csr_matrix
    geometry: GeometryParams
    spacing: float
    boundary: tuple[int, ...] = ()
    boundary_mode: BoundaryMode = BoundaryMode.NONE
    label: Optional[str] = None
    _interior: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "positions", _frozen(self.positions))
        object.__setattr__(self, "coordinate", _frozen(self.coordinate))
        object.__setattr__(self, "metric", _frozen(self.metric))
        object.__setattr__(self, "measure", _frozen(self.measure))
        object.__setattr__(self, "conductances", sp.csr_matrix(self.conductances, dtype=float))
        object.__setattr__(self, "boundary", tuple(sorted(int(b) for b in self.boundary)))
        mask = np.ones(self.node_count, dtype=bool)
        mask[list(self.boundary)] = False
        interior = np.flatnonzero(mask)
        interior.flags.writeable = False
        object.__setattr__(self, "_interior", interior)

    # Query Methods

    @property
    def node_count(self) -> int:
        return int(self.measure.shape[0])

    @property
    def interior(self) -> np.ndarray:
        """Indices of non-boundary nodes, ascending."""
        return self._interior

    @property
    def is_killed(self) -> bool:
        return len(self.boundary) > 0

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.measure))

    @property
    def diameter(self) -> float:
        return float(self.metric.max())

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        suffix = f"-{self.boundary_mode.value}" if self.kind == SpaceKind.INTERVAL else ""
        key = "m" if self.kind.uses_level else "n"
        return f"{self.kind.value}{suffix}({key}={self.resolution})"

    def form_matrix(self) -> sp.csr_matrix:
        """Graph Laplacian A = D - C of the conductances (sparse, symmetric)."""
        degree = np.asarray(self.conductances.sum(axis=1)).ravel()
        return (sp.diags(degree) - self.conductances).tocsr()

    def killed(self, f: np.ndarray) -> np.ndarray:
        """Copy of f with boundary values set to zero."""
        g = np.array(f, dtype=float, copy=True)
        if self.is_killed:
            g[list(self.boundary)] = 0.0
        return g

    def quadratic_form(self, f: np.ndarray) -> float:
        """E(f, f) of the (killed) form."""
        g = self.killed(f)
        return float(g @ (self.form_matrix() @ g))

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(np.asarray(f, dtype=float) * self.measure))

    def lp_norm(self, f: np.ndarray, p: float) -> float:
        """L^p(mu) norm; p = inf gives the sup norm."""
        a = np.abs(np.asarray(f, dtype=float))
        if np.isinf(p):
            return float(a.max())
        return float(np.sum(a ** p * self.measure) ** (1.0 / p))

    # Invariant checks

    def validate(self, triples: int = 10_000, seed: int = 0) -> None:
        """Raise InvariantViolationError when a structural invariant fails."""
        n = self.node_count
        d = self.metric
        if d.shape != (n, n):
            raise InvariantViolationError("MetricMeasureGraph", "metric shape", f"{d.shape} for {n} nodes")
        if not np.array_equal(d, d.T):
            raise InvariantViolationError("MetricMeasureGraph", "metric symmetric")
        if np.any(np.diag(d) != 0.0):
            raise InvariantViolationError("MetricMeasureGraph", "metric zero on the diagonal")
        off = d[~np.eye(n, dtype=bool)]
        if off.size and off.min() <= 0.0:
            raise InvariantViolationError("MetricMeasureGraph", "metric positive off the diagonal")
        rng = np.random.default_rng(seed)
        i, j, k = rng.integers(0, n, size=(3, triples))
        slack = 1e-12 * max(1.0, self.diameter)
        if np.any(d[i, k] > d[i, j] + d[j, k] + slack):
            raise InvariantViolationError("MetricMeasureGraph", "triangle inequality")
        if np.any(self.measure <= 0.0) or not np.isfinite(self.total_mass):
            raise InvariantViolationError("MetricMeasureGraph", "positive finite measure")
        c = self.conductances
        if abs(c - c.T).max() > 0.0:
            raise InvariantViolationError("MetricMeasureGraph", "conductances symmetric")
        if np.any(c.diagonal() != 0.0) or (c.nnz and c.data.min() < 0.0):
            raise InvariantViolationError("MetricMeasureGraph", "conductances nonnegative with zero diagonal")
        inner = c[self.interior][:, self.interior]
        components, _ = connected_components(inner, directed=False)
        if components != 1:
            raise InvariantViolationError(
                "MetricMeasureGraph", "interior connected", f"{components} components"
            )

    def __hash__(self) -> int:
        return hash((self.kind, self.resolution, self.boundary_mode, self.label))
