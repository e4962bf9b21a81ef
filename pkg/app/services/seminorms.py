"""
Seminorms on metric measure graphs.

Heat-semigroup Besov seminorm, Korevaar-Schoen r-functionals (limsup and
sup variants), fractional Sobolev W-norm, Grigor'yan N-norms and the BV
variation functional.
"""
from concurrent.futures import Executor
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from app.domain.entities import EnergyCurve, KernelMatrix, MetricMeasureGraph, SeminormReport, SpectralDecomposition
from app.domain.exceptions import InvalidGridError, ParameterDomainError, require
from app.domain.value_objects import ResolvedWindow
from app.log.logging import logger
from app.services.space import radius_grid, resolved_radii
from app.services.spectral import kernel_at, metric_energy, time_grid

SMALLEST_SCALES = 3


class KSMode(str, Enum):
    LIMSUP_SMALLEST = "limsup_smallest"
    SUP = "sup"


def _differences(f: np.ndarray, p: float) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return np.abs(f[:, None] - f[None, :]) ** p


# Besov

def besov_energy(kernel: KernelMatrix, f: np.ndarray, p: float) -> float:
    """E_p(t, f) = sum_ij |f_i - f_j|^p p_t(i, j) mu_i mu_j."""
    require(p >= 1, "p", p, "p >= 1")
    return _kernel_weighted_sum(kernel, _differences(f, p))


def energy_curves(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    functions: Mapping[str, np.ndarray],
    p: float,
    t_grid: Optional[Sequence[float]] = None,
    executor: Optional[Executor] = None,
) -> dict[str, EnergyCurve]:
    """
    E_p(t, f) on the resolved time grid for several functions at once.

    One kernel is formed per grid point and shared by all functions. With
    an executor the grid points are evaluated concurrently; map keeps the
    grid order so the curves are identical either way.
    """
    require(p >= 1, "p", p, "p >= 1")
    _, grid = time_grid(spec, graph, delta, t_grid)
    names = list(functions)
    differences = [_differences(functions[name], p) for name in names]

    def energies_at(t: float) -> list[float]:
        kernel = kernel_at(spec, delta, t)
        return [_kernel_weighted_sum(kernel, d) for d in differences]

    rows = list(executor.map(energies_at, grid)) if executor is not None else [energies_at(t) for t in grid]
    table = np.array(rows).reshape(grid.size, len(names))
    return {
        name: EnergyCurve(p=p, delta=delta, grid=grid, energies=table[:, k], function_id=name)
        for k, name in enumerate(names)
    }


def _kernel_weighted_sum(kernel: KernelMatrix, differences: np.ndarray) -> float:
    mu = kernel.measure
    return float(mu @ (differences * kernel.entries) @ mu)


def energy_curve(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    f: np.ndarray,
    p: float,
    t_grid: Optional[Sequence[float]] = None,
    function_id: str = "f",
    executor: Optional[Executor] = None,
) -> EnergyCurve:
    """E_p(t, f) on the resolved time grid."""
    return energy_curves(spec, graph, delta, {function_id: f}, p, t_grid, executor)[function_id]


@dataclass(frozen=True)
class BesovValue:
    value: float
    argmax_t: float
    edge_pinned: bool


def besov_supremum(curve: EnergyCurve, alpha: float, window: Optional[ResolvedWindow] = None) -> BesovValue:
    """
    max over the window of t^-alpha E_p(t)^(1/p) with its argmax.

    edge_pinned is set when the maximum sits on the first or last grid
    point, i.e. the supremum may lie outside the window.
    """
    require(alpha >= 0, "alpha", alpha, "alpha >= 0")
    grid, scaled = curve.grid, curve.scaled(alpha)
    if window is not None:
        inside = np.array([window.contains(t) for t in grid], dtype=bool)
        grid, scaled = grid[inside], scaled[inside]
    if grid.size == 0:
        raise InvalidGridError("t-grid", "empty resolved window for the Besov supremum")
    if curve.is_constant_function:
        return BesovValue(value=0.0, argmax_t=float(grid[0]), edge_pinned=False)
    index = int(np.argmax(scaled))
    return BesovValue(
        value=float(scaled[index]),
        argmax_t=float(grid[index]),
        edge_pinned=index in (0, grid.size - 1),
    )


def besov_norm(curve: EnergyCurve, alpha: float, window: Optional[ResolvedWindow] = None) -> float:
    """||f||_{p, alpha} over the resolved window."""
    return besov_supremum(curve, alpha, window).value


def besov_norms(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    functions: Mapping[str, np.ndarray],
    p: float,
    alpha: float,
    t_grid: Optional[Sequence[float]] = None,
    executor: Optional[Executor] = None,
) -> dict[str, float]:
    curves = energy_curves(spec, graph, delta, functions, p, t_grid, executor)
    return {name: besov_norm(curve, alpha) for name, curve in curves.items()}


# Korevaar-Schoen

def _resolved_radius_grid(graph: MetricMeasureGraph, r_grid: Optional[Sequence[float]], minimum: int = 1) -> np.ndarray:
    window = resolved_radii(graph)
    grid = radius_grid(graph) if r_grid is None else window.restrict(r_grid)
    if grid.size < minimum:
        raise InvalidGridError("r-grid", f"{grid.size} radii inside the resolved window "
                                         f"[{window.lower:.3e}, {window.upper:.3e}], need {minimum}")
    return grid


def ks_functional(graph: MetricMeasureGraph, f: np.ndarray, lam: float, p: float, r: float) -> float:
    """
    int int_{B(x, r)} |f(x) - f(y)|^p / (r^(lam p) mu(B(x, r))) dmu(y) dmu(x).
    """
    require(lam > 0, "lambda", lam, "lambda > 0")
    require(p >= 1, "p", p, "p >= 1")
    mu = graph.measure
    f = np.asarray(f, dtype=float)
    total = 0.0
    for start in range(0, graph.node_count, 1024):
        rows = slice(start, start + 1024)
        inside = graph.metric[rows] < r
        ball = inside @ mu
        local = (inside * np.abs(f[rows, None] - f[None, :]) ** p) @ mu
        total += float(np.sum(mu[rows] * local / ball))
    return total / r ** (lam * p)


def ks_profile(
    graph: MetricMeasureGraph,
    f: np.ndarray,
    lam: float,
    p: float,
    r_grid: Optional[Sequence[float]] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(radii, r-functional values) over the resolved radii."""
    radii = _resolved_radius_grid(graph, r_grid)
    return radii, np.array([ks_functional(graph, f, lam, p, r) for r in radii])


def ks_norm(
    graph: MetricMeasureGraph,
    f: np.ndarray,
    lam: float,
    p: float,
    r_grid: Optional[Sequence[float]] = None,
    mode: KSMode | str = KSMode.SUP,
) -> float:
    """
    Korevaar-Schoen seminorm.

    limsup_smallest takes the max over the 3 smallest resolved radii, sup
    over all of them; the result is the p-th root of that max.
    """
    mode = KSMode(mode)
    radii, values = ks_profile(graph, f, lam, p, r_grid)
    if mode == KSMode.LIMSUP_SMALLEST:
        if radii.size < SMALLEST_SCALES:
            raise InvalidGridError("r-grid", f"needs {SMALLEST_SCALES} resolved radii for limsup_smallest")
        values = values[:SMALLEST_SCALES]
    return float(values.max() ** (1.0 / p))


def variation(
    graph: MetricMeasureGraph,
    f: np.ndarray,
    d_W: Optional[float] = None,
    kappa: Optional[float] = None,
    r_grid: Optional[Sequence[float]] = None,
) -> float:
    """
    Var(f): min over the 3 smallest resolved radii of the r-functional
    with lambda = d_W - kappa and p = 1.

    Raises:
        ConfigurationError: kappa neither stored nor supplied
    """
    kappa = graph.geometry.require_kappa(kappa)
    if d_W is None:
        _, d_W = graph.geometry.require_dimensions()
    radii = _resolved_radius_grid(graph, r_grid, minimum=SMALLEST_SCALES)[:SMALLEST_SCALES]
    return float(min(ks_functional(graph, f, d_W - kappa, 1.0, r) for r in radii))


# Fractional Sobolev

def w_norm(graph: MetricMeasureGraph, f: np.ndarray, lam: float, p: float) -> float:
    """(sum_{i != j} |f_i - f_j|^p d^(-d_H - lam p) mu_i mu_j)^(1/p)."""
    require(lam > 0, "lambda", lam, "lambda > 0")
    require(p >= 1, "p", p, "p >= 1")
    d_H, _ = graph.geometry.require_dimensions()
    return float(metric_energy(graph, d_H + lam * p, f, p) ** (1.0 / p))


# Grigor'yan

def grigoryan_seminorm(graph: MetricMeasureGraph, f: np.ndarray, alpha: float, p: float, r: float) -> float:
    """N_p^alpha(f, r) = r^(-alpha - d_H/p) (int int_{d < r} |f(x) - f(y)|^p)^(1/p)."""
    require(p >= 1, "p", p, "p >= 1")
    require(r > 0, "r", r, "r > 0")
    d_H, _ = graph.geometry.require_dimensions()
    mu = graph.measure
    f = np.asarray(f, dtype=float)
    total = 0.0
    for start in range(0, graph.node_count, 1024):
        rows = slice(start, start + 1024)
        inside = graph.metric[rows] < r
        total += float(mu[rows] @ ((inside * np.abs(f[rows, None] - f[None, :]) ** p) @ mu))
    return float(r ** (-alpha - d_H / p) * total ** (1.0 / p))


def grigoryan_norm(
    graph: MetricMeasureGraph,
    f: np.ndarray,
    alpha: float,
    p: float,
    q: float,
    r_grid: Optional[Sequence[float]] = None,
) -> float:
    """
    N^alpha_{p,q}(f) over the resolved radii: sup for q = inf, otherwise
    (int N_p^alpha(f, r)^q dr/r)^(1/q) by the trapezoid rule in log r.
    """
    if not (q == p or np.isinf(q)):
        raise ParameterDomainError("q", q, f"{{{p}, inf}}")
    radii = _resolved_radius_grid(graph, r_grid, minimum=2)
    values = np.array([grigoryan_seminorm(graph, f, alpha, p, r) for r in radii])
    if np.isinf(q):
        return float(values.max())
    return float(trapezoid(values ** q, np.log(radii)) ** (1.0 / q))


# Reports

def seminorm_report(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    f: np.ndarray,
    p: float,
    alpha: float,
    function_id: str = "f",
    t_grid: Optional[Sequence[float]] = None,
    r_grid: Optional[Sequence[float]] = None,
    executor: Optional[Executor] = None,
) -> tuple[SeminormReport, EnergyCurve]:
    """
    All seminorms of f at one (delta, p, alpha).

    Korevaar-Schoen, W and Grigor'yan norms use lambda = alpha delta d_W,
    the scale at which each is comparable to ||f||_{p, alpha}.
    """
    _, d_W = graph.geometry.require_dimensions()
    curve = energy_curve(spec, graph, delta, f, p, t_grid, function_id, executor)
    besov = besov_supremum(curve, alpha)
    lam = alpha * delta * d_W
    radii, values = ks_profile(graph, f, lam, p, r_grid)
    ks_sup = float(values.max() ** (1.0 / p))
    ks_limsup = float(values[:SMALLEST_SCALES].max() ** (1.0 / p))
    report = SeminormReport(
        function_id=function_id,
        besov=besov.value,
        besov_argmax_t=besov.argmax_t,
        ks_limsup=ks_limsup,
        ks_sup=ks_sup,
        w_norm=w_norm(graph, f, lam, p),
        grigoryan_inf=grigoryan_norm(graph, f, lam, p, np.inf, radii),
        grigoryan_p=grigoryan_norm(graph, f, lam, p, p, radii),
        edge_pinned=besov.edge_pinned,
        window=(float(curve.grid[0]), float(curve.grid[-1])),
    )
    logger.debug(
        f"Seminorms of {function_id} on {graph.name}",
        event_type="SEMINORM_REPORT",
        space=graph.name,
        delta=delta,
        p=p,
        alpha=alpha,
        besov=report.besov,
        edge_pinned=report.edge_pinned,
    )
    return report, curve
