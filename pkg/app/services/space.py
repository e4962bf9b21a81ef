"""
Space builders.

Discrete metric measure Dirichlet spaces: circle, interval, Sierpinski
gasket, Vicsek set and a raw adjacency-list loader, plus ball queries,
Ahlfors regularity fits and resolved radius windows.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist
from scipy.stats import linregress

from app.core.config import settings
from app.domain.entities import MetricMeasureGraph, SlopeFit
from app.domain.exceptions import (
    InvalidGridError,
    InvalidResolutionError,
    ParameterDomainError,
    ResourceBudgetError,
)
from app.domain.value_objects import (
    BoundaryMode,
    GeometryParams,
    Provenance,
    ResolvedWindow,
    SpaceKind,
)
from app.log.logging import logger

GASKET_LEVELS = (1, 8)
VICSEK_LEVELS = (1, 6)
MIN_NODES = 8

# corner cells of the X arrangement, in units of one third of the parent
_VICSEK_OFFSETS = ((0, 0), (2, 0), (1, 1), (0, 2), (2, 2))


def _require_nodes(kind: str, n: int) -> None:
    if n < MIN_NODES:
        raise InvalidResolutionError(kind, n, f"n >= {MIN_NODES}")


def _require_level(kind: str, level: int, bounds: tuple[int, int]) -> None:
    if not (bounds[0] <= level <= bounds[1]):
        raise InvalidResolutionError(kind, level, f"{bounds[0]} <= m <= {bounds[1]}")


def _require_budget(node_count: int) -> None:
    # every graph carries a dense metric
    if node_count > settings.dense_node_budget:
        raise ResourceBudgetError(node_count, settings.dense_node_budget)


def _edges_to_conductances(n: int, edges: np.ndarray, weights: np.ndarray) -> sp.csr_matrix:
    upper = sp.coo_matrix((weights, (edges[:, 0], edges[:, 1])), shape=(n, n))
    return (upper + upper.T).tocsr()


def build_circle(n: int) -> MetricMeasureGraph:
    """
    Cycle graph on the unit-circumference circle.

    Spacing 1/n, masses 1/n, neighbour conductance n, arc-length metric.
    """
    _require_nodes("circle", n)
    _require_budget(n)
    x = np.arange(n) / n
    gap = np.abs(x[:, None] - x[None, :])
    metric = np.minimum(gap, 1.0 - gap)
    np.fill_diagonal(metric, 0.0)
    positions = np.column_stack([np.cos(2 * np.pi * x), np.sin(2 * np.pi * x)]) / (2 * np.pi)
    edges = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
    geometry = GeometryParams(d_H=1.0, d_W=2.0, kappa=1.0, kappa_provenance=Provenance.ANALYTIC)
    graph = MetricMeasureGraph(
        kind=SpaceKind.CIRCLE,
        resolution=n,
        positions=positions,
        coordinate=x,
        metric=metric,
        measure=np.full(n, 1.0 / n),
        conductances=_edges_to_conductances(n, edges, np.full(n, float(n))),
        geometry=geometry,
        spacing=1.0 / n,
    )
    logger.debug("Built circle", event_type="SPACE_BUILT", kind="circle", node_count=n)
    return graph


def build_interval(n: int, boundary_mode: BoundaryMode = BoundaryMode.REFLECTING) -> MetricMeasureGraph:
    """
    Path graph with n nodes at i/(n-1) on [0, 1].

    Masses follow the trapezoid rule (h inside, h/2 at the ends) and the
    conductance is 1/h. Absorbing mode marks both endpoints as boundary.
    """
    _require_nodes("interval", n)
    _require_budget(n)
    boundary_mode = BoundaryMode(boundary_mode)
    if boundary_mode == BoundaryMode.NONE:
        raise ParameterDomainError("boundary_mode", boundary_mode.value, "{absorbing, reflecting}")
    h = 1.0 / (n - 1)
    x = np.arange(n) * h
    metric = np.abs(x[:, None] - x[None, :])
    measure = np.full(n, h)
    measure[[0, -1]] = h / 2
    edges = np.column_stack([np.arange(n - 1), np.arange(1, n)])
    boundary = (0, n - 1) if boundary_mode == BoundaryMode.ABSORBING else ()
    graph = MetricMeasureGraph(
        kind=SpaceKind.INTERVAL,
        resolution=n,
        positions=np.column_stack([x, np.zeros(n)]),
        coordinate=x,
        metric=metric,
        measure=measure,
        conductances=_edges_to_conductances(n, edges, np.full(n - 1, 1.0 / h)),
        geometry=GeometryParams(d_H=1.0, d_W=2.0, kappa=1.0, kappa_provenance=Provenance.ANALYTIC),
        spacing=h,
        boundary=boundary,
        boundary_mode=boundary_mode,
    )
    logger.debug(
        "Built interval",
        event_type="SPACE_BUILT",
        kind="interval",
        node_count=n,
        boundary_mode=boundary_mode.value,
    )
    return graph


def _index_lattice(cells: list[tuple[int, ...]], corners) -> tuple[dict, list[list[int]]]:
    """Map lattice points to sorted node indices; return per-cell corner indices."""
    points = sorted({corner for cell in cells for corner in corners(cell)})
    index = {point: i for i, point in enumerate(points)}
    return index, [[index[c] for c in corners(cell)] for cell in cells]


def gasket_node_count(level: int) -> int:
    return (3 ** (level + 1) + 3) // 2


def build_gasket(level: int) -> MetricMeasureGraph:
    """
    Level-m Sierpinski gasket graph V_m.

    Lattice corners (0,0), (2^m,0), (0,2^m); a lattice point (a, b) sits at
    a*(1,0) + b*(1/2, sqrt(3)/2) scaled by 2^-m. Every level-m cell edge
    carries conductance (5/3)^m and every cell spreads mass 3^-m over its
    three corners.
    """
    _require_level("gasket", level, GASKET_LEVELS)
    _require_budget(gasket_node_count(level))
    cells = [(0, 0, 2 ** level)]
    while cells[0][2] > 1:
        cells = [
            (a + da, b + db, s // 2)
            for a, b, s in cells
            for da, db in ((0, 0), (s // 2, 0), (0, s // 2))
        ]
    index, cell_nodes = _index_lattice(cells, lambda c: ((c[0], c[1]), (c[0] + 1, c[1]), (c[0], c[1] + 1)))
    n = len(index)
    lattice = np.array(sorted(index, key=index.get), dtype=float)
    scale = 2.0 ** -level
    positions = scale * np.column_stack([lattice[:, 0] + 0.5 * lattice[:, 1], np.sqrt(3) / 2 * lattice[:, 1]])

    corners = np.array(cell_nodes)
    edges = np.concatenate([corners[:, [0, 1]], corners[:, [1, 2]], corners[:, [0, 2]]])
    incidence = np.bincount(corners.ravel(), minlength=n)
    measure = 3.0 ** -level * incidence / 3.0

    metric = cdist(positions, positions)
    np.fill_diagonal(metric, 0.0)
    geometry = GeometryParams(d_H=np.log(3) / np.log(2), d_W=np.log(5) / np.log(2))
    graph = MetricMeasureGraph(
        kind=SpaceKind.GASKET,
        resolution=level,
        positions=positions,
        coordinate=positions[:, 0],
        metric=metric,
        measure=measure,
        conductances=_edges_to_conductances(n, edges, np.full(len(edges), (5.0 / 3.0) ** level)),
        geometry=geometry,
        spacing=scale,
    )
    logger.debug("Built gasket", event_type="SPACE_BUILT", kind="gasket", level=level, node_count=n)
    return graph


def vicsek_node_count(level: int) -> int:
    count = 4
    for _ in range(level):
        count = 5 * count - 4
    return count


def build_vicsek(level: int) -> MetricMeasureGraph:
    """
    Level-m Vicsek graph.

    Each square cell is split into its centre and four corner sub-squares
    (side 1/3). A level-m cell is the complete graph on its four corners
    with conductance 3^m per edge and mass 5^-m shared by the corners.
    """
    _require_level("vicsek", level, VICSEK_LEVELS)
    _require_budget(vicsek_node_count(level))
    cells = [(0, 0, 3 ** level)]
    while cells[0][2] > 1:
        cells = [
            (a + da * (s // 3), b + db * (s // 3), s // 3)
            for a, b, s in cells
            for da, db in _VICSEK_OFFSETS
        ]
    index, cell_nodes = _index_lattice(
        cells, lambda c: ((c[0], c[1]), (c[0] + 1, c[1]), (c[0], c[1] + 1), (c[0] + 1, c[1] + 1))
    )
    n = len(index)
    scale = 3.0 ** -level
    positions = scale * np.array(sorted(index, key=index.get), dtype=float)

    corners = np.array(cell_nodes)
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    edges = np.concatenate([corners[:, list(pair)] for pair in pairs])
    incidence = np.bincount(corners.ravel(), minlength=n)
    measure = 5.0 ** -level * incidence / 4.0

    metric = cdist(positions, positions)
    np.fill_diagonal(metric, 0.0)
    geometry = GeometryParams(d_H=np.log(5) / np.log(3), d_W=np.log(15) / np.log(3))
    graph = MetricMeasureGraph(
        kind=SpaceKind.VICSEK,
        resolution=level,
        positions=positions,
        coordinate=positions[:, 0],
        metric=metric,
        measure=measure,
        conductances=_edges_to_conductances(n, edges, np.full(len(edges), 3.0 ** level)),
        geometry=geometry,
        spacing=scale,
    )
    logger.debug("Built vicsek", event_type="SPACE_BUILT", kind="vicsek", level=level, node_count=n)
    return graph


def load_adjacency(path: str | Path, label: Optional[str] = None) -> MetricMeasureGraph:
    """
    Load a weighted edge list ("i j conductance" per line, '#' comments).

    Masses are uniform, the metric is the shortest-path distance with edge
    length 1/conductance and the geometry is unset.
    """
    rows = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParameterDomainError(f"{path}:{line_no}", line, "'i j conductance'")
        i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        if i == j or w <= 0:
            raise ParameterDomainError(f"{path}:{line_no}", line, "i != j and conductance > 0")
        rows.append((min(i, j), max(i, j), w))
    if not rows:
        raise InvalidResolutionError("adjacency", 0, "at least one edge")
    edges = np.array([(i, j) for i, j, _ in rows], dtype=int)
    weights = np.array([w for _, _, w in rows])
    n = int(edges.max()) + 1
    _require_budget(n)
    conductances = _edges_to_conductances(n, edges, weights)
    lengths = conductances.copy()
    lengths.data = 1.0 / lengths.data
    metric = shortest_path(lengths, directed=False)
    if not np.all(np.isfinite(metric)):
        raise InvalidResolutionError("adjacency", n, "a connected edge list")
    coordinate = metric[0] / metric[0].max()
    graph = MetricMeasureGraph(
        kind=SpaceKind.ADJACENCY,
        resolution=n,
        positions=np.column_stack([coordinate, np.zeros(n)]),
        coordinate=coordinate,
        metric=metric,
        measure=np.full(n, 1.0 / n),
        conductances=conductances,
        geometry=GeometryParams.unset(),
        spacing=float(lengths.data.min()),
        label=label or f"adjacency({Path(path).name})",
    )
    logger.info("Loaded adjacency list", event_type="SPACE_LOADED", path=str(path), node_count=n)
    return graph


def build_space(
    kind: SpaceKind | str,
    resolution: int,
    boundary_mode: BoundaryMode | str = BoundaryMode.NONE,
) -> MetricMeasureGraph:
    """Dispatch to the builder named by kind."""
    kind = SpaceKind(kind)
    if kind == SpaceKind.CIRCLE:
        return build_circle(resolution)
    if kind == SpaceKind.INTERVAL:
        mode = BoundaryMode(boundary_mode)
        return build_interval(resolution, BoundaryMode.REFLECTING if mode == BoundaryMode.NONE else mode)
    if kind == SpaceKind.GASKET:
        return build_gasket(resolution)
    if kind == SpaceKind.VICSEK:
        return build_vicsek(resolution)
    raise ParameterDomainError("kind", kind.value, "a builder kind (adjacency graphs are loaded from a file)")


# Query Methods

def ball(graph: MetricMeasureGraph, center: int, r: float) -> np.ndarray:
    """Ascending indices y with d(center, y) < r."""
    if not (0 <= center < graph.node_count):
        raise ParameterDomainError("center", center, f"[0, {graph.node_count})")
    if not r > 0:
        raise ParameterDomainError("r", r, "r > 0")
    return np.flatnonzero(graph.metric[center] < r)


def ball_masses(graph: MetricMeasureGraph, r: float, centers: Optional[np.ndarray] = None) -> np.ndarray:
    """mu(B(x, r)) for every x in centers (all nodes by default)."""
    rows = graph.metric if centers is None else graph.metric[centers]
    out = np.empty(rows.shape[0])
    # chunked to keep the boolean mask small
    for start in range(0, rows.shape[0], 1024):
        block = rows[start:start + 1024]
        out[start:start + 1024] = (block < r) @ graph.measure
    return out


def resolved_radii(graph: MetricMeasureGraph) -> ResolvedWindow:
    """Radii between four lattice spacings and a quarter of the diameter."""
    return ResolvedWindow(4.0 * graph.spacing, graph.diameter / 4.0, quantity="r")


def radius_grid(graph: MetricMeasureGraph, count: int = 8, window: Optional[ResolvedWindow] = None) -> np.ndarray:
    """
    Log-spaced radii snapped to half-lattice values (k + 1/2) h.

    Snapping keeps ball masses away from jumps of the staircase r -> mu(B).
    """
    window = window or resolved_radii(graph)
    h = graph.spacing
    raw = np.geomspace(window.lower, window.upper, count)
    snapped = (np.floor(raw / h) + 0.5) * h
    snapped = np.unique(snapped[(snapped >= window.lower * (1 - 1e-12)) & (snapped <= window.upper)])
    if snapped.size < 3:
        raise InvalidGridError("r-grid", f"only {snapped.size} distinct radii in {window.to_dict()}")
    return snapped


def _default_ahlfors_radii(graph: MetricMeasureGraph) -> np.ndarray:
    h = graph.spacing
    upper = graph.diameter / 4.0
    if graph.kind in (SpaceKind.GASKET, SpaceKind.VICSEK):
        # constant phase relative to the cell scaling ratio
        ratio = 2.0 if graph.kind == SpaceKind.GASKET else 3.0
        steps = int(np.floor(2 * np.log(upper / (1.1 * h)) / np.log(ratio))) + 1
        return 1.1 * h * ratio ** (np.arange(steps) / 2.0)
    ks = np.unique(np.round(np.geomspace(1, max(2, upper / h - 0.5), 12)).astype(int))
    return (ks + 0.5) * h


@dataclass(frozen=True)
class AhlforsFit:
    d_H: float
    c1: float
    c2: float
    fit: SlopeFit

    def to_dict(self) -> dict:
        return {"d_H": self.d_H, "c1": self.c1, "c2": self.c2, "fit": self.fit.to_dict()}


def ahlfors_fit(
    graph: MetricMeasureGraph,
    r_grid: Optional[Sequence[float]] = None,
    max_centers: int = 4000,
    seed: Optional[int] = None,
) -> AhlforsFit:
    """
    Estimate d_H from mu(B(x, r)) ~ r^d_H.

    The slope of the node-averaged log ball mass against log r is the
    estimate; c1 and c2 are the extreme values of mu(B(x,r)) / r^d_H.
    Radii outside [h, diameter/2] are dropped; at least 5 radii spanning a
    factor 4 must remain.
    """
    radii = np.sort(np.asarray(_default_ahlfors_radii(graph) if r_grid is None else r_grid, dtype=float))
    radii = radii[(radii >= graph.spacing) & (radii <= graph.diameter / 2.0)]
    if radii.size < 5 or radii[-1] / radii[0] < 4.0:
        raise InvalidGridError("ahlfors r-grid", "needs >= 5 radii spanning a factor 4 inside [h, diameter/2]")
    centers = None
    if graph.node_count > max_centers:
        rng = np.random.default_rng(settings.default_seed if seed is None else seed)
        centers = np.sort(rng.choice(graph.node_count, size=max_centers, replace=False))
    masses = np.stack([ball_masses(graph, r, centers) for r in radii], axis=1)
    log_r = np.log(radii)
    mean_log_mass = np.log(masses).mean(axis=0)
    result = linregress(log_r, mean_log_mass)
    d_H = float(result.slope)
    ratios = masses / radii[None, :] ** d_H
    fit = SlopeFit(
        log_x=tuple(log_r.tolist()),
        log_y=tuple(mean_log_mass.tolist()),
        slope=d_H,
        intercept=float(result.intercept),
        r_squared=float(result.rvalue ** 2),
        slope_stderr=float(result.stderr),
        window=(float(radii[0]), float(radii[-1])),
    )
    logger.info(
        f"Ahlfors fit on {graph.name}: d_H={d_H:.4f}",
        event_type="AHLFORS_FIT",
        space=graph.name,
        d_H=d_H,
        r_squared=fit.r_squared,
    )
    return AhlforsFit(d_H=d_H, c1=float(ratios.min()), c2=float(ratios.max()), fit=fit)
