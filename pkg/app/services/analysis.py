"""
Exponent estimation.

Critical Besov exponents from the scaling of E_p(t, f), the weak
Bakry-Emery Hölder rate of the subordinated semigroup and the transience
criterion.
"""
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.domain.entities import (
    CheckStatus,
    CriticalExponentReport,
    MetricMeasureGraph,
    SlopeFit,
    SpectralDecomposition,
    json_safe,
)
from app.domain.exceptions import InvalidGridError, require
from app.domain.value_objects import GeometryParams
from app.log.logging import logger
from app.services.fitting import slope_fit
from app.services.seminorms import energy_curves
from app.services.spectral import SCALING_FRACTION, apply_semigroup, resolved_time_window

EXHAUSTIVE_PAIRS = 2000     # node count up to which every pair is scanned
SAMPLED_PAIRS = 100_000


def scaling_grid(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    count: Optional[int] = None,
    fraction: float = SCALING_FRACTION,
) -> np.ndarray:
    """
    Log grid over the lower part of the resolved time window.

    Near the top of the window the slowest mode bends every log-log curve,
    so rate fits stop at lower * (upper/lower)^fraction.
    """
    require(0.0 < fraction <= 1.0, "fraction", fraction, "(0, 1]")
    window = resolved_time_window(spec, graph, delta)
    return window.log_grid(count or settings.default_t_grid_count,
                           upper_multiplier=(window.lower / window.upper) ** (1.0 - fraction))


def rate_status(fit: SlopeFit, bound: float, r2_gate: Optional[float] = None) -> CheckStatus:
    """
    Status of the requirement slope >= bound.

    A fit below the R^2 gate is inconclusive unless the slope clears the
    bound by two standard errors.
    """
    r2_gate = settings.r2_gate if r2_gate is None else r2_gate
    if not fit.passes_gate(r2_gate):
        cleared = np.isfinite(fit.slope_stderr) and fit.slope - 2.0 * fit.slope_stderr >= bound
        return CheckStatus.PASS if cleared else CheckStatus.INCONCLUSIVE
    return CheckStatus.PASS if fit.slope >= bound else CheckStatus.FAIL


# Transience

@dataclass(frozen=True)
class Transience:
    delta: float
    transient: bool
    spectral_dimension: float

    def to_dict(self) -> dict:
        return json_safe({"delta": self.delta, "transient": self.transient,
                          "spectral_dimension": self.spectral_dimension})


def transience(geometry: GeometryParams, delta: float) -> Transience:
    """delta < min{1, d_H/d_W}; equivalently 2 d_H/(delta d_W) > 2."""
    require(0.0 < delta <= 1.0, "delta", delta, "(0, 1]")
    d_H, d_W = geometry.require_dimensions()
    return Transience(
        delta=delta,
        transient=bool(delta < min(1.0, d_H / d_W)),
        spectral_dimension=2.0 * d_H / (delta * d_W),
    )


# Critical exponents

def beta_p(p: float, kappa: float, d_W: float) -> float:
    return (1.0 - 2.0 / p) * kappa / d_W + 1.0 / p


def critical_exponent_prediction(
    geometry: GeometryParams,
    delta: float,
    p: float,
    kappa: Optional[float] = None,
) -> tuple[Optional[float], Optional[tuple[float, float]], Optional[float]]:
    """
    (point prediction, bracket, beta_p).

    p = 1: min{1, (1 - kappa/d_W)/delta}. p >= 2: 1/p. 1 < p < 2: only the
    bracket [1/(2 delta), min{beta_p/delta, 1/p}]. Quantities needing an
    unknown kappa are None.
    """
    if p >= 2:
        return 1.0 / p, None, None
    _, d_W = geometry.require_dimensions()
    if kappa is None and not geometry.has_kappa:
        return None, None, None
    k = geometry.require_kappa(kappa)
    b = beta_p(p, k, d_W)
    if p == 1:
        return geometry.critical_exponent_l1(delta, k), None, b
    return None, (1.0 / (2.0 * delta), min(b / delta, 1.0 / p)), b


def critical_exponent(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    p: float,
    family: Mapping[str, np.ndarray],
    t_grid: Optional[Sequence[float]] = None,
    kappa: Optional[float] = None,
    tolerance: float = 0.05,
    executor: Optional[Executor] = None,
) -> CriticalExponentReport:
    """
    Estimate alpha_p^# as the largest fitted slope of log E_p(t)^(1/p)
    against log t over the family.

    Fits below the R^2 gate are discarded; with none left the report is
    inconclusive. Estimates above 1/p + tolerance fail regardless of the
    prediction.
    """
    require(0.0 < delta < 1.0, "delta", delta, "(0, 1)")
    require(p >= 1, "p", p, "p >= 1")
    if not family:
        raise InvalidGridError("family", "empty function family")
    grid = scaling_grid(spec, graph, delta) if t_grid is None else t_grid
    curves = energy_curves(spec, graph, delta, family, p, grid, executor)
    fits: dict[str, SlopeFit] = {}
    for name, curve in curves.items():
        if curve.is_constant_function:
            continue
        fits[name] = slope_fit(curve.grid, curve.energies ** (1.0 / p), quantity=f"E_p({name})")

    accepted = {name: fit for name, fit in fits.items() if fit.passes_gate(settings.r2_gate)}
    prediction, bracket, b = critical_exponent_prediction(graph.geometry, delta, p, kappa)
    estimate = witness = None
    if accepted:
        witness = max(accepted, key=lambda name: accepted[name].slope)
        slope = accepted[witness].slope
        estimate = min(1.0, slope) if slope > 0 else None

    if estimate is None:
        status = CheckStatus.INCONCLUSIVE
    elif estimate > 1.0 / p + tolerance:
        status = CheckStatus.FAIL
    elif prediction is not None:
        status = CheckStatus.PASS if abs(estimate - prediction) <= tolerance else CheckStatus.FAIL
    elif bracket is not None:
        inside = bracket[0] - tolerance <= estimate <= bracket[1] + tolerance
        status = CheckStatus.PASS if inside else CheckStatus.FAIL
    else:
        status = CheckStatus.INCONCLUSIVE

    logger.info(
        f"Critical exponent on {graph.name}",
        event_type="CRITICAL_EXPONENT",
        space=graph.name,
        delta=delta,
        p=p,
        estimate=estimate,
        prediction=prediction,
        witness=witness,
        status=status.value,
    )
    return CriticalExponentReport(
        p=p,
        delta=delta,
        estimate=estimate,
        prediction=prediction,
        bracket=bracket,
        beta_p=b,
        fits=fits,
        witness=witness,
        tolerance=tolerance,
        status=status,
    )


# Weak Bakry-Emery

@dataclass(frozen=True)
class WeakBakryEmeryFit:
    """
    Hölder rate of P_t^(delta) on bounded functions.

    kappa_hat comes from the slope of the envelope H(t): the largest
    nearest-neighbour increment over the whole family, which scales like
    t^(-kappa/(delta d_W)). constant uses the analytic kappa over sampled
    pairs when one is stored.
    """
    delta: float
    kappa_hat: float
    constant: Optional[float]
    fit: SlopeFit
    nearest_neighbour_argmax: Optional[bool]
    status: CheckStatus

    def to_dict(self) -> dict:
        return json_safe({
            "delta": self.delta,
            "kappa_hat": self.kappa_hat,
            "constant": self.constant,
            "fit": self.fit.to_dict(),
            "nearest_neighbour_argmax": self.nearest_neighbour_argmax,
            "status": self.status,
        })


def _pairs(graph: MetricMeasureGraph, seed: Optional[int]) -> tuple[np.ndarray, np.ndarray]:
    n = graph.node_count
    if n <= EXHAUSTIVE_PAIRS:
        return np.triu_indices(n, k=1)
    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    i, j = rng.integers(0, n, size=(2, SAMPLED_PAIRS))
    keep = i != j
    return i[keep], j[keep]


def weak_be_fit(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    family: Mapping[str, np.ndarray],
    t_grid: Optional[Sequence[float]] = None,
    seed: Optional[int] = None,
) -> WeakBakryEmeryFit:
    """
    Fit |P_t g(x) - P_t g(y)| <= C d(x, y)^kappa t^(-kappa/(delta d_W)) ||g||_inf.

    Constant members are skipped; the others are scaled to sup norm 1.
    """
    require(0.0 < delta <= 1.0, "delta", delta, "(0, 1]")
    _, d_W = graph.geometry.require_dimensions()
    members = [f / np.max(np.abs(f)) for f in family.values() if np.ptp(f) > 0]
    if not members:
        raise InvalidGridError("family", "no non-constant bounded function")
    grid = scaling_grid(spec, graph, delta) if t_grid is None else np.asarray(t_grid, dtype=float)
    edges = graph.conductances.tocoo()
    upper = edges.row < edges.col
    ei, ej = edges.row[upper], edges.col[upper]
    kappa = graph.geometry.kappa if graph.geometry.has_kappa else None
    pi, pj = _pairs(graph, seed) if kappa is not None else (None, None)

    increments = np.zeros((len(members), grid.size))
    best_constant, best_edge = 0.0, None
    for k, t in enumerate(grid):
        for m, g in enumerate(members):
            s = apply_semigroup(spec, delta, t, g)
            increments[m, k] = np.max(np.abs(s[ei] - s[ej]))
            if kappa is None:
                continue
            quotients = np.abs(s[pi] - s[pj]) / graph.metric[pi, pj] ** kappa
            arg = int(np.argmax(quotients))
            value = float(quotients[arg]) * t ** (kappa / (delta * d_W))
            if value > best_constant:
                best_constant = value
                best_edge = bool(graph.conductances[pi[arg], pj[arg]] != 0)

    envelope = increments.max(axis=0)
    if not np.all(envelope > 0):
        raise InvalidGridError("family", "semigroup increments vanish on the grid")
    fit = slope_fit(grid, envelope, quantity="weak Bakry-Emery envelope")
    kappa_hat = -fit.slope * delta * d_W
    status = CheckStatus.PASS if fit.passes_gate(settings.r2_gate) else CheckStatus.INCONCLUSIVE
    logger.info(
        f"Weak Bakry-Emery fit on {graph.name}",
        event_type="WEAK_BE_FIT",
        space=graph.name,
        delta=delta,
        kappa_hat=kappa_hat,
        r_squared=fit.r_squared,
        nearest_neighbour_argmax=best_edge,
    )
    return WeakBakryEmeryFit(
        delta=delta,
        kappa_hat=float(kappa_hat),
        constant=best_constant if kappa is not None else None,
        fit=fit,
        nearest_neighbour_argmax=best_edge,
        status=status,
    )
