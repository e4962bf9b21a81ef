"""
Spectral calculus on metric measure graphs.

Eigendecomposition of the generator, heat and subordinated kernels
(spectral route and subordination-integral route), fractional powers of
the generator (spectral route and Bochner route), kernel envelope fits
and the fractional energy comparison.
"""
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh
from scipy.special import gamma as gamma_fn

from app.core.config import settings
from app.domain.entities import (
    BoundFitReport,
    KernelMatrix,
    MetricMeasureGraph,
    OperatorMatrix,
    SpectralDecomposition,
)
from app.domain.exceptions import (
    InvalidGridError,
    InvariantViolationError,
    ParameterDomainError,
    ResourceBudgetError,
    require,
)
from app.domain.value_objects import ResolvedWindow
from app.log.logging import logger
from app.services.fitting import slope_fit
from app.services.subordinator import EXP_CUTOFF, StableDensityEvaluator, integrate

ZERO_EIGENVALUE = 1e-9          # relative to the largest eigenvalue
UNRESOLVED_ENTRY = 1e-12        # kernel entries below this fraction of the diagonal are not fitted
ENVELOPE_QUANTILES = (0.005, 0.995)
SCALING_FRACTION = 0.6         # share (in log t) of the window used for rate fits
BINARY_HEADER = struct.Struct("<qdd")


def _require_order(delta: float, allow_one: bool = True) -> None:
    if allow_one:
        require(0.0 < delta <= 1.0, "delta", delta, "(0, 1]")
    else:
        require(0.0 < delta < 1.0, "delta", delta, "(0, 1)")


# Eigendecomposition

def eigendecompose(graph: MetricMeasureGraph, budget: Optional[int] = None) -> SpectralDecomposition:
    """
    Solve A phi = lambda M phi densely on the interior nodes.

    The symmetric transform M^-1/2 A M^-1/2 is diagonalized; eigenvectors
    are mapped back, extended by zero on the boundary and sign-fixed so
    that their largest-magnitude entry is positive.
    """
    budget = settings.dense_node_budget if budget is None else budget
    if graph.node_count > budget:
        raise ResourceBudgetError(graph.node_count, budget)
    form = graph.form_matrix().toarray()
    if not np.array_equal(form, form.T):
        raise InvariantViolationError("MetricMeasureGraph", "symmetric form matrix", graph.name)

    interior = graph.interior
    mu = graph.measure[interior]
    root = np.sqrt(mu)
    block = form[np.ix_(interior, interior)]
    transformed = block / root[:, None] / root[None, :]
    transformed = 0.5 * (transformed + transformed.T)
    eigenvalues, vectors = eigh(transformed)

    phi = vectors / root[:, None]
    pivot = np.argmax(np.abs(phi), axis=0)
    signs = np.sign(phi[pivot, np.arange(phi.shape[1])])
    phi = phi * np.where(signs == 0, 1.0, signs)[None, :]

    scale = max(float(eigenvalues[-1]), 1.0)
    eigenvalues = np.where(np.abs(eigenvalues) <= ZERO_EIGENVALUE * scale, 0.0, eigenvalues)
    if eigenvalues.min() < 0:
        raise InvariantViolationError("SpectralDecomposition", "nonnegative eigenvalues", f"min={eigenvalues.min():.3e}")
    if not graph.is_killed:
        # ground state of a conservative form is exactly constant
        phi[:, 0] = 1.0 / np.sqrt(graph.total_mass)
        eigenvalues[0] = 0.0

    full = np.zeros((graph.node_count, interior.size))
    full[interior] = phi
    spec = SpectralDecomposition(
        eigenvalues=eigenvalues,
        eigenvectors=full,
        measure=graph.measure,
        killed=graph.is_killed,
    )
    logger.info(
        f"Eigendecomposition of {graph.name}",
        event_type="EIGENDECOMPOSITION",
        space=graph.name,
        node_count=graph.node_count,
        modes=spec.mode_count,
        spectral_gap=spec.spectral_gap,
    )
    return spec


@dataclass(frozen=True)
class DecompositionResiduals:
    residual: float
    orthogonality: float

    def within(self, tolerance: float = 1e-8) -> bool:
        return self.residual <= tolerance and self.orthogonality <= tolerance


def decomposition_residuals(graph: MetricMeasureGraph, spec: SpectralDecomposition) -> DecompositionResiduals:
    """
    max_k |A phi_k - lambda_k M phi_k| / |A| on the interior, and
    max |<phi_j, phi_k> - delta_jk|.
    """
    interior = graph.interior
    form = graph.form_matrix().toarray()[np.ix_(interior, interior)]
    phi = spec.eigenvectors[interior]
    mu = graph.measure[interior]
    residual = form @ phi - (mu[:, None] * phi) * spec.eigenvalues[None, :]
    gram = phi.T @ (mu[:, None] * phi)
    return DecompositionResiduals(
        residual=float(np.abs(residual).max() / np.abs(form).max()),
        orthogonality=float(np.abs(gram - np.eye(gram.shape[0])).max()),
    )


# Kernels

def heat_kernel(spec: SpectralDecomposition, t: float) -> KernelMatrix:
    """p_t(x, y) = sum_k exp(-lambda_k t) phi_k(x) phi_k(y)."""
    require(t > 0, "t", t, "t > 0")
    raw = spec.multiplier_matrix(np.exp(-spec.eigenvalues * t))
    return KernelMatrix.from_raw(t, 1.0, raw, spec.measure, stochastic=not spec.killed)


def semigroup_multiplier(spec: SpectralDecomposition, delta: float, t: float) -> np.ndarray:
    return np.exp(-t * spec.eigenvalues ** delta)


def subordinated_kernel(spec: SpectralDecomposition, delta: float, t: float) -> KernelMatrix:
    """p_t^(delta)(x, y) = sum_k exp(-t lambda_k^delta) phi_k(x) phi_k(y)."""
    _require_order(delta)
    require(t > 0, "t", t, "t > 0")
    if delta == 1.0:
        return heat_kernel(spec, t)
    raw = spec.multiplier_matrix(semigroup_multiplier(spec, delta, t))
    return KernelMatrix.from_raw(t, delta, raw, spec.measure, stochastic=not spec.killed)


def subordinated_kernel_by_integral(
    spec: SpectralDecomposition,
    delta: float,
    t: float,
    tolerance: Optional[float] = None,
) -> KernelMatrix:
    """
    p_t^(delta) = int eta_t(s) p_s ds by quadrature against the
    subordinator density.

    The integral is linear in p_s, so it is evaluated mode by mode on one
    shared quadrature rule and assembled with the eigenvectors.
    """
    _require_order(delta, allow_one=False)
    require(t > 0, "t", t, "t > 0")
    tolerance = settings.quadrature_abs_tol if tolerance is None else tolerance
    evaluator = StableDensityEvaluator(delta=delta)
    multipliers = evaluator.laplace_transform(t, spec.eigenvalues, tolerance=tolerance)
    logger.debug(
        "Subordination integral",
        event_type="SUBORDINATION_QUADRATURE",
        delta=delta,
        t=t,
        modes=spec.mode_count,
        max_deviation=float(np.max(np.abs(multipliers - semigroup_multiplier(spec, delta, t)))),
    )
    raw = spec.multiplier_matrix(multipliers)
    return KernelMatrix.from_raw(t, delta, raw, spec.measure, stochastic=not spec.killed)


def kernel_at(spec: SpectralDecomposition, delta: float, t: float) -> KernelMatrix:
    return heat_kernel(spec, t) if delta == 1.0 else subordinated_kernel(spec, delta, t)


def compose(first: KernelMatrix, second: KernelMatrix) -> KernelMatrix:
    """(k1 o k2)(x, y) = sum_z k1(x, z) k2(z, y) mu(z)."""
    if first.delta != second.delta:
        raise ParameterDomainError("delta", second.delta, f"equal to {first.delta}")
    raw = first.entries @ (first.measure[:, None] * second.entries)
    return KernelMatrix.from_raw(first.t + second.t, first.delta, raw, first.measure,
                                 stochastic=first.stochastic and second.stochastic)


def apply_semigroup(spec: SpectralDecomposition, delta: float, t: float, f: np.ndarray) -> np.ndarray:
    """P_t^(delta) f without forming the kernel."""
    _require_order(delta)
    require(t > 0, "t", t, "t > 0")
    return spec.apply_multiplier(semigroup_multiplier(spec, delta, t), f)


# Fractional powers

def fractional_laplacian(spec: SpectralDecomposition, delta: float) -> OperatorMatrix:
    """(-L)^delta = sum_k lambda_k^delta phi_k <phi_k, .>."""
    _require_order(delta)
    kernel = spec.multiplier_matrix(spec.eigenvalues ** delta)
    return OperatorMatrix(delta=delta, kernel=kernel, measure=spec.measure, route="spectral")


def generator_matrix(graph: MetricMeasureGraph) -> np.ndarray:
    """M^-1 A on the interior, zero rows and columns on the boundary."""
    form = graph.form_matrix().toarray()
    out = np.zeros_like(form)
    interior = graph.interior
    out[np.ix_(interior, interior)] = form[np.ix_(interior, interior)] / graph.measure[interior][:, None]
    return out


def bochner_multipliers(eigenvalues: np.ndarray, delta: float, tolerance: Optional[float] = None) -> np.ndarray:
    """
    delta/Gamma(1-delta) int_0^inf t^(-delta-1) (1 - exp(-lambda t)) dt per eigenvalue.

    Split at t = 1. On (0, 1] the log-scale integral starts at 1e-6/lambda_max with a
    two-term Taylor correction below; on [1, inf) the integral of
    t^(-delta-1) is 1/delta exactly and the exponential part is cut where
    exp(-lambda_min t) drops below exp(-80).
    """
    _require_order(delta, allow_one=False)
    tolerance = settings.quadrature_abs_tol if tolerance is None else tolerance
    lam = np.asarray(eigenvalues, dtype=float)
    out = np.zeros_like(lam)
    positive = lam > 0
    if not np.any(positive):
        return out
    lp = lam[positive]

    t_lo = 1e-6 / lp.max()

    def near(t: float) -> np.ndarray:
        return t ** (-delta - 1.0) * -np.expm1(-t * lp)

    head = integrate(near, t_lo, 1.0, tolerance * max(1.0, lp.max() ** delta),
                     "Bochner integral on (0, 1]", log_scale=True)
    head = head + lp * t_lo ** (1 - delta) / (1 - delta) - lp ** 2 * t_lo ** (2 - delta) / (2 * (2 - delta))

    t_hi = 1.0 + EXP_CUTOFF / lp.min()

    def far(t: float) -> np.ndarray:
        return t ** (-delta - 1.0) * np.exp(-t * lp)

    tail = integrate(far, 1.0, t_hi, tolerance, "Bochner integral on [1, inf)", log_scale=True)
    out[positive] = delta / gamma_fn(1 - delta) * (head + 1.0 / delta - tail)
    return out


def fractional_laplacian_bochner(
    spec: SpectralDecomposition,
    delta: float,
    tolerance: Optional[float] = None,
) -> OperatorMatrix:
    """(-L)^delta f = -delta/Gamma(1-delta) int t^(-delta-1) (P_t f - f) dt by quadrature."""
    multipliers = bochner_multipliers(spec.eigenvalues, delta, tolerance)
    kernel = spec.multiplier_matrix(multipliers)
    return OperatorMatrix(delta=delta, kernel=kernel, measure=spec.measure, route="bochner")


# Resolved windows

def resolved_time_window(spec: SpectralDecomposition, graph: MetricMeasureGraph, delta: float = 1.0) -> ResolvedWindow:
    """
    Times between lattice scale (8h)^(delta d_W) and spectral-gap
    saturation lambda_gap^(-delta).
    """
    _require_order(delta)
    _, d_W = graph.geometry.require_dimensions()
    lower = (8.0 * graph.spacing) ** (delta * d_W)
    upper = spec.spectral_gap ** (-delta)
    return ResolvedWindow(lower, upper, quantity="t")


def time_grid(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    t_grid: Optional[Sequence[float]] = None,
    count: Optional[int] = None,
) -> tuple[ResolvedWindow, np.ndarray]:
    """Window and the grid restricted to it (default: log grid over the window)."""
    window = resolved_time_window(spec, graph, delta)
    if t_grid is None:
        grid = window.log_grid(count or settings.default_t_grid_count)
    else:
        grid = window.restrict(t_grid)
    if grid.size < 5:
        raise InvalidGridError("t-grid", f"{grid.size} points inside the resolved window "
                                         f"[{window.lower:.3e}, {window.upper:.3e}]")
    return window, grid


# Kernel bounds

def _profile(kind: str, d_H: float, d_W: float, delta: float):
    if kind == "sub_gaussian":
        power = d_W / (d_W - 1.0)
        return lambda s, c: np.exp(-c * s ** power)
    exponent = d_H + delta * d_W
    return lambda s, c: (1.0 + c * s) ** (-exponent)


def kernel_bound_fit(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    t_grid: Optional[Sequence[float]] = None,
    sample_pairs: int = 20_000,
    seed: Optional[int] = None,
) -> BoundFitReport:
    """
    Fit c5 t^-g Phi(c s) <= p_t(x, y) <= c3 t^-g Phi(c s), g = d_H/(delta d_W),
    s = d(x, y) t^(-1/(delta d_W)).

    Phi is (1 + c s)^(-d_H - delta d_W) for delta < 1 and the sub-Gaussian
    exp(-c s^(d_W/(d_W-1))) for delta = 1. c is chosen on a log grid to
    make the 0.5% and 99.5% quantiles of p t^g / Phi closest; those
    quantiles are c5 and c3. The on-diagonal fit regresses the mean log
    diagonal against log t.
    """
    _require_order(delta)
    d_H, d_W = graph.geometry.require_dimensions()
    window, grid = time_grid(spec, graph, delta, t_grid)
    exponent = d_H / (delta * d_W)
    kind = "sub_gaussian" if delta == 1.0 else "polynomial"
    profile = _profile(kind, d_H, d_W, delta)

    nodes = graph.interior
    m = nodes.size
    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    if m * (m + 1) // 2 <= sample_pairs:
        a, b = np.triu_indices(m)
    else:
        a, b = rng.integers(0, m, size=(2, sample_pairs))
    rows, cols = nodes[a], nodes[b]
    distances = graph.metric[rows, cols]

    diagonal_means, scaled, arguments = [], [], []
    for t in grid:
        kernel = kernel_at(spec, delta, t)
        diagonal = kernel.diagonal()[nodes]
        diagonal_means.append(np.exp(np.mean(np.log(diagonal))))
        values = kernel.entries[rows, cols]
        keep = values > UNRESOLVED_ENTRY * diagonal.max()
        scaled.append(values[keep] * t ** exponent)
        arguments.append(distances[keep] / t ** (1.0 / (delta * d_W)))
    scaled = np.concatenate(scaled)
    arguments = np.concatenate(arguments)

    best = None
    for c in np.logspace(-2, 2, 41):
        ratio = scaled / profile(arguments, c)
        low, high = np.quantile(ratio, ENVELOPE_QUANTILES)
        spread = np.log(high) - np.log(low) if low > 0 else np.inf
        if best is None or spread < best[0]:
            best = (spread, c, low, high)
    _, c, low, high = best
    envelope = profile(arguments, c)
    covered = (scaled >= low * envelope * (1 - 1e-12)) & (scaled <= high * envelope * (1 + 1e-12))

    # the slowest mode bends the diagonal near the top of the window
    cut = window.lower * (window.upper / window.lower) ** SCALING_FRACTION
    lower = grid <= cut * (1 + 1e-12)
    if np.count_nonzero(lower) < 5:
        lower = np.ones(grid.size, dtype=bool)
    fit = slope_fit(grid[lower], np.asarray(diagonal_means)[lower], quantity="on-diagonal kernel")
    report = BoundFitReport(
        profile=kind,
        exponent=exponent,
        c3=float(high),
        c4=float(c),
        c5=float(low),
        c6=float(c),
        diagonal_fit=fit,
        predicted_slope=-exponent,
        coverage=float(np.mean(covered)),
        window=(float(grid[0]), float(grid[-1])),
    )
    logger.info(
        f"Kernel bound fit on {graph.name}",
        event_type="KERNEL_BOUND_FIT",
        space=graph.name,
        delta=delta,
        slope=fit.slope,
        predicted=-exponent,
        coverage=report.coverage,
    )
    return report


def sub_gaussian_fit(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    t_grid: Optional[Sequence[float]] = None,
    sample_pairs: int = 20_000,
    seed: Optional[int] = None,
) -> BoundFitReport:
    """Envelope fit of the base heat kernel with the sub-Gaussian profile."""
    return kernel_bound_fit(spec, graph, 1.0, t_grid, sample_pairs, seed)


# Energies

@dataclass(frozen=True)
class FractionalEnergy:
    spectral: float
    metric: float

    @property
    def ratio(self) -> Optional[float]:
        return None if self.metric == 0.0 else self.spectral / self.metric

    def to_dict(self) -> dict:
        return {"spectral": self.spectral, "metric": self.metric, "ratio": self.ratio}


def spectral_energy(spec: SpectralDecomposition, delta: float, f: np.ndarray) -> float:
    """E^(delta)(f, f) = sum_k lambda_k^delta <f, phi_k>^2."""
    coefficients = spec.coefficients(f)
    return float(np.sum(spec.eigenvalues ** delta * coefficients ** 2))


def metric_energy(graph: MetricMeasureGraph, exponent: float, f: np.ndarray, p: float = 2.0) -> float:
    """sum_{i != j} |f_i - f_j|^p d(i, j)^(-exponent) mu_i mu_j."""
    f = np.asarray(f, dtype=float)
    d = graph.metric
    with np.errstate(divide="ignore"):
        weights = np.where(d > 0, d ** (-exponent), 0.0)
    differences = np.abs(f[:, None] - f[None, :]) ** p
    mu = graph.measure
    return float(mu @ (differences * weights) @ mu)


def fractional_energy(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    f: np.ndarray,
) -> FractionalEnergy:
    """Spectral energy next to the metric double sum with kernel d^(-d_H - delta d_W)."""
    _require_order(delta)
    d_H, d_W = graph.geometry.require_dimensions()
    g = graph.killed(f)
    return FractionalEnergy(
        spectral=spectral_energy(spec, delta, g),
        metric=metric_energy(graph, d_H + delta * d_W, g),
    )


# Export

KERNEL_CSV_HEADER = ("row", "col", "value", "row_integral")


def kernel_csv_rows(kernel: KernelMatrix) -> list[tuple[int, int, float, float]]:
    """(row, col, value, row integral of that row) in row-major order."""
    n = kernel.node_count
    rows, cols = np.divmod(np.arange(n * n), n)
    integrals = kernel.row_integrals()[rows]
    return list(zip(rows.tolist(), cols.tolist(), kernel.entries.ravel().tolist(), integrals.tolist()))


def kernel_binary(kernel: KernelMatrix) -> bytes:
    """Header (int64 node_count, float64 t, float64 delta) then column-major float64 entries."""
    header = BINARY_HEADER.pack(kernel.node_count, kernel.t, kernel.delta)
    return header + np.asarray(kernel.entries, dtype="<f8").tobytes(order="F")


def read_kernel_binary(payload: bytes) -> tuple[int, float, float, np.ndarray]:
    n, t, delta = BINARY_HEADER.unpack_from(payload)
    entries = np.frombuffer(payload, dtype="<f8", offset=BINARY_HEADER.size).reshape((n, n), order="F")
    return n, t, delta, entries
