"""
Inequality checks.

Each check evaluates both sides of a functional inequality on the
discrete space, fits the constant and reports pass, fail or
inconclusive. Wrong-regime requests raise WrongRegimeError naming the
check that applies instead.
"""
from concurrent.futures import Executor
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from app.core.config import settings
from app.domain.entities import CheckStatus, InequalityReport, MetricMeasureGraph, SpectralDecomposition
from app.domain.exceptions import InvalidGridError, ParameterDomainError, WrongRegimeError, require
from app.log.logging import logger
from app.services.analysis import rate_status, scaling_grid
from app.services.families import non_constant
from app.services.fitting import slope_fit
from app.services.seminorms import (
    besov_norms,
    besov_supremum,
    energy_curves,
    grigoryan_norm,
    ks_norm,
    variation,
    w_norm,
)
from app.services.spectral import apply_semigroup, kernel_bound_fit, sub_gaussian_fit

QUANTILE_LEVELS = 64
REGIME_TOLERANCE = 1e-9
DEFAULT_CAP = 100.0


def _metadata(graph: MetricMeasureGraph, delta: float, p: Optional[float] = None) -> dict:
    return {"space": graph.name, "delta": delta, "p": p, "resolution": graph.resolution}


def _finite(*values: float) -> bool:
    return all(np.isfinite(v) for v in values)


def _ratio(numerator: float, denominator: float) -> float:
    return float(numerator / denominator) if denominator > 0 else np.inf


def _log_report(report: InequalityReport) -> InequalityReport:
    logger.info(
        f"{report.name}: {report.status.value}",
        event_type="INEQUALITY_CHECK",
        check=report.name,
        constant=report.constant,
        status=report.status.value,
        **{k: v for k, v in report.metadata.items() if k != "p" or v is not None},
    )
    return report


def _prepared(graph: MetricMeasureGraph, f: np.ndarray) -> np.ndarray:
    """Killed copy on spaces with boundary, mean-free copy otherwise."""
    f = np.asarray(f, dtype=float)
    if graph.is_killed:
        return graph.killed(f)
    return f - graph.integrate(f) / graph.total_mass


def _alpha_one(graph: MetricMeasureGraph, delta: float, kappa: Optional[float]) -> float:
    return graph.geometry.critical_exponent_l1(delta, kappa)


def _bracket_report(
    name: str,
    ratios: dict[str, float],
    graph: MetricMeasureGraph,
    delta: float,
    p: Optional[float],
    cap: float,
    extra: Optional[dict] = None,
) -> InequalityReport:
    """Report for a two-sided comparison: lhs/rhs is the bracket [min, max] of the ratios."""
    usable = {k: v for k, v in ratios.items() if np.isfinite(v) and v > 0}
    if not usable:
        raise InvalidGridError("family", f"no function with both sides positive for {name}")
    upper, lower = max(usable.values()), min(usable.values())
    width = upper / lower
    values = {"ratios": dict(sorted(ratios.items())), "bracket": [lower, upper]}
    values.update(extra or {})
    return _log_report(InequalityReport(
        name=name,
        lhs=upper,
        rhs=lower,
        constant=width,
        cap=cap,
        passed=bool(np.isfinite(width) and width <= cap),
        tolerance=settings.stability_tolerance,
        metadata=_metadata(graph, delta, p),
        values=values,
    ))


# Co-area

def level_edges(f: np.ndarray, levels: int = QUANTILE_LEVELS) -> np.ndarray:
    """
    0 followed by the level values of f >= 0.

    With at most `levels` distinct positive values every value is a level;
    otherwise the levels are quantiles of the distinct values (the maximum
    always included).
    """
    values = np.unique(f[f > 0])
    if values.size > levels:
        values = np.unique(np.quantile(values, np.linspace(0.0, 1.0, levels)))
    return np.concatenate([[0.0], values])


def level_slices(f: np.ndarray, levels: int = QUANTILE_LEVELS) -> tuple[np.ndarray, np.ndarray]:
    """
    (level widths, slice thresholds) for the super-level sets of f >= 0.

    Slice k is {f > threshold_k} and weighs width_k; the slicing is exact
    when every distinct value is a level.
    """
    edges = level_edges(f, levels)
    return np.diff(edges), 0.5 * (edges[:-1] + edges[1:])


def layer_cake(graph: MetricMeasureGraph, f: np.ndarray) -> float:
    """int_0^inf mu({f > t}) dt over every distinct value of f >= 0."""
    f = np.asarray(f, dtype=float)
    widths, thresholds = level_slices(f, levels=f.size)
    return float(sum(w * graph.measure[f > s].sum() for w, s in zip(widths, thresholds)))


def coarea_check(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    f: np.ndarray,
    kappa: Optional[float] = None,
    t_grid: Optional[Sequence[float]] = None,
    levels: int = QUANTILE_LEVELS,
    cap: float = 5.0,
    executor: Optional[Executor] = None,
) -> InequalityReport:
    """
    int_0^inf ||1_{f > t}||_{1, alpha} dt against ||f||_{1, alpha} with
    alpha = alpha_1^#. Passes when the ratio lies in [1/cap, cap].

    The level integral is the trapezoid rule over the level edges; the
    super-level set at the top edge is empty.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ParameterDomainError("f", float(f.min()), "f >= 0")
    alpha = _alpha_one(graph, delta, kappa)
    metadata = _metadata(graph, delta, 1.0)
    sanity = {"layer_cake": layer_cake(graph, f), "l1_norm": graph.lp_norm(f, 1.0), "alpha": alpha}
    if np.ptp(f) == 0:
        return _log_report(InequalityReport(
            name="coarea", lhs=0.0, rhs=0.0, constant=1.0, cap=cap, passed=True,
            tolerance=settings.stability_tolerance, metadata=metadata, values=sanity,
        ))
    edges = level_edges(f, levels)
    functions = {"f": f}
    functions.update({f"level_{k}": (f > t).astype(float) for k, t in enumerate(edges)})
    norms = besov_norms(spec, graph, delta, functions, 1.0, alpha, t_grid, executor)
    slice_norms = np.array([norms[f"level_{k}"] for k in range(edges.size)])
    lhs = float(trapezoid(slice_norms, edges))
    rhs = norms["f"]
    ratio = _ratio(lhs, rhs)
    sanity["levels"] = int(edges.size)
    return _log_report(InequalityReport(
        name="coarea",
        lhs=lhs,
        rhs=rhs,
        constant=ratio,
        cap=cap,
        passed=bool(np.isfinite(ratio) and 1.0 / cap <= ratio <= cap),
        tolerance=settings.stability_tolerance,
        metadata=metadata,
        values=sanity,
    ))


# Pseudo-Poincaré

def pseudo_poincare_check(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    f: np.ndarray,
    t_grid: Optional[Sequence[float]] = None,
    kappa: Optional[float] = None,
    tolerance: float = 0.05,
    cap: float = DEFAULT_CAP,
) -> InequalityReport:
    """
    ||P_t f - f||_1 <= C t^alpha N(f), alpha = alpha_1^#.

    N is Var(f) when alpha < 1 and the W_{delta d_W, 1} norm when alpha = 1.
    The fitted slope must reach alpha - tolerance.
    """
    alpha = _alpha_one(graph, delta, kappa)
    _, d_W = graph.geometry.require_dimensions()
    grid = scaling_grid(spec, graph, delta) if t_grid is None else np.asarray(t_grid, dtype=float)
    f = np.asarray(f, dtype=float)
    distances = np.array([graph.lp_norm(apply_semigroup(spec, delta, t, f) - f, 1.0) for t in grid])
    if alpha < 1.0:
        rhs_name, rhs = "variation", variation(graph, f, kappa=kappa)
    else:
        rhs_name, rhs = "w_norm", w_norm(graph, f, delta * d_W, 1.0)
    fit = slope_fit(grid, distances, quantity="||P_t f - f||_1")
    status = rate_status(fit, alpha - tolerance)
    constant = float(np.max(distances / grid ** alpha) / rhs) if rhs > 0 else np.inf
    return _log_report(InequalityReport(
        name="pseudo_poincare",
        lhs=float(distances.max()),
        rhs=rhs,
        constant=constant,
        cap=cap,
        passed=status == CheckStatus.PASS and np.isfinite(constant) and constant <= cap,
        tolerance=tolerance,
        metadata=_metadata(graph, delta, 1.0),
        values={"alpha": alpha, "rhs_norm": rhs_name, "slope_bound": alpha - tolerance,
                "smallest_t_distance": float(distances[0])},
        inconclusive=status == CheckStatus.INCONCLUSIVE,
        fit=fit,
    ))


# Sobolev, isoperimetric and L-infinity embeddings

def _require_sobolev_regime(graph: MetricMeasureGraph, delta: float, check: str) -> tuple[float, float]:
    d_H, d_W = graph.geometry.require_dimensions()
    if d_H <= delta * d_W:
        critical = abs(d_H - delta * d_W) < REGIME_TOLERANCE
        raise WrongRegimeError(check, "d_H > delta d_W", "linfty_check" if critical else None)
    return d_H, d_W


def sobolev_exponent(d_H: float, d_W: float, delta: float, p: float) -> float:
    """q = p d_H / (d_H - delta d_W)."""
    return p * d_H / (d_H - delta * d_W)


def sobolev_check(
    graph: MetricMeasureGraph,
    delta: float,
    p: float,
    family: Mapping[str, np.ndarray],
    cap: float = DEFAULT_CAP,
) -> InequalityReport:
    """||f||_q <= C ||f||_{W_{delta d_W / p, p}} with q = p d_H/(d_H - delta d_W)."""
    require(p >= 1, "p", p, "p >= 1")
    d_H, d_W = _require_sobolev_regime(graph, delta, "sobolev_check")
    q = sobolev_exponent(d_H, d_W, delta, p)
    ratios, sides = {}, {}
    for name, f in non_constant(family).items():
        g = _prepared(graph, f)
        lhs, rhs = graph.lp_norm(g, q), w_norm(graph, g, delta * d_W / p, p)
        if rhs > 0:
            ratios[name] = lhs / rhs
            sides[name] = (lhs, rhs)
    if not ratios:
        raise InvalidGridError("family", "no non-constant function for sobolev_check")
    witness = max(ratios, key=ratios.get)
    constant = ratios[witness]
    return _log_report(InequalityReport(
        name="sobolev",
        lhs=sides[witness][0],
        rhs=sides[witness][1],
        constant=constant,
        cap=cap,
        passed=bool(_finite(constant) and constant <= cap),
        tolerance=settings.stability_tolerance,
        metadata=_metadata(graph, delta, p),
        values={"q": q, "witness": witness, "ratios": dict(sorted(ratios.items()))},
    ))


def isoperimetric_check(
    graph: MetricMeasureGraph,
    delta: float,
    sets: Sequence[np.ndarray],
    cap: float = DEFAULT_CAP,
) -> InequalityReport:
    """
    mu(E)^((d_H - delta d_W)/d_H) <= Theta int_E int_{X \\ E} d^(-d_H - delta d_W).

    Empty sets and the whole space are skipped.
    """
    d_H, d_W = _require_sobolev_regime(graph, delta, "isoperimetric_check")
    exponent = d_H + delta * d_W
    mu = graph.measure
    with np.errstate(divide="ignore"):
        weights = np.where(graph.metric > 0, graph.metric ** (-exponent), 0.0)
    measures, perimeters, ratios = [], [], []
    for mask in sets:
        mask = np.asarray(mask, dtype=bool)
        if not mask.any() or mask.all():
            continue
        mass = float(mu[mask].sum())
        perimeter = float(mu[mask] @ weights[np.ix_(mask, ~mask)] @ mu[~mask])
        measures.append(mass)
        perimeters.append(perimeter)
        ratios.append(mass ** ((d_H - delta * d_W) / d_H) / perimeter)
    if not ratios:
        raise InvalidGridError("sets", "no nonempty proper set")
    k = int(np.argmax(ratios))
    theta = ratios[k]
    return _log_report(InequalityReport(
        name="isoperimetric",
        lhs=measures[k] ** ((d_H - delta * d_W) / d_H),
        rhs=perimeters[k],
        constant=theta,
        cap=cap,
        passed=bool(_finite(theta) and theta <= cap),
        tolerance=settings.stability_tolerance,
        metadata=_metadata(graph, delta),
        values={"measures": measures, "perimeters": perimeters, "ratios": ratios},
    ))


def linfty_check(
    graph: MetricMeasureGraph,
    delta: float,
    family: Mapping[str, np.ndarray],
    cap: float = DEFAULT_CAP,
) -> InequalityReport:
    """ess-osc f <= C ||f||_{W_{delta d_W, 1}} at the critical scale d_H = delta d_W."""
    d_H, d_W = graph.geometry.require_dimensions()
    if abs(d_H - delta * d_W) >= REGIME_TOLERANCE:
        alternative = "sobolev_check" if d_H > delta * d_W else None
        raise WrongRegimeError("linfty_check", "d_H = delta d_W", alternative)
    ratios, sides = {}, {}
    for name, f in non_constant(family).items():
        g = graph.killed(f) if graph.is_killed else np.asarray(f, dtype=float)
        lhs, rhs = float(np.ptp(g)), w_norm(graph, g, delta * d_W, 1.0)
        if rhs > 0:
            ratios[name] = lhs / rhs
            sides[name] = (lhs, rhs)
    if not ratios:
        raise InvalidGridError("family", "no non-constant function for linfty_check")
    witness = max(ratios, key=ratios.get)
    constant = ratios[witness]
    return _log_report(InequalityReport(
        name="linfty",
        lhs=sides[witness][0],
        rhs=sides[witness][1],
        constant=constant,
        cap=cap,
        passed=bool(_finite(constant) and constant <= cap),
        tolerance=settings.stability_tolerance,
        metadata=_metadata(graph, delta, 1.0),
        values={"witness": witness, "ratios": dict(sorted(ratios.items()))},
    ))


# Smoothing

def lp_smoothing_check(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    p: float,
    f: np.ndarray,
    t_grid: Optional[Sequence[float]] = None,
    tolerance: float = 0.05,
    cap: float = DEFAULT_CAP,
    executor: Optional[Executor] = None,
) -> InequalityReport:
    """
    ||P_t f||_{p, 1/p} <= C t^(-1/p) ||f||_p for p >= 2.

    The slope of log ||P_t f||_{p, 1/p} must reach -1/p - tolerance.
    ||P_t f - f||_p at the smallest t is reported as the density check.
    """
    if p < 2:
        raise WrongRegimeError("lp_smoothing_check", "p >= 2")
    grid = scaling_grid(spec, graph, delta) if t_grid is None else np.asarray(t_grid, dtype=float)
    f = np.asarray(f, dtype=float)
    smoothed = {f"t_{k}": apply_semigroup(spec, delta, t, f) for k, t in enumerate(grid)}
    norms_by_key = besov_norms(spec, graph, delta, smoothed, p, 1.0 / p, executor=executor)
    norms = np.array([norms_by_key[f"t_{k}"] for k in range(grid.size)])
    rhs = graph.lp_norm(f, p)
    fit = slope_fit(grid, norms, quantity="||P_t f||_{p,1/p}")
    bound = -1.0 / p - tolerance
    status = rate_status(fit, bound)
    constant = float(np.max(norms * grid ** (1.0 / p)) / rhs) if rhs > 0 else np.inf
    return _log_report(InequalityReport(
        name="lp_smoothing",
        lhs=float(norms.max()),
        rhs=rhs,
        constant=constant,
        cap=cap,
        passed=status == CheckStatus.PASS and _finite(constant) and constant <= cap,
        tolerance=tolerance,
        metadata=_metadata(graph, delta, p),
        values={"slope_bound": bound,
                "strong_continuity": graph.lp_norm(smoothed["t_0"] - f, p)},
        inconclusive=status == CheckStatus.INCONCLUSIVE,
        fit=fit,
    ))


def linf_smoothing_check(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    p: float,
    f: np.ndarray,
    t_grid: Optional[Sequence[float]] = None,
    tolerance: float = 0.1,
    cap: float = DEFAULT_CAP,
) -> InequalityReport:
    """||P_t f||_inf <= C t^(-d_H/(p delta d_W)) ||f||_p; slope >= -d_H/(p delta d_W) - tolerance."""
    require(p >= 1, "p", p, "p >= 1")
    d_H, d_W = graph.geometry.require_dimensions()
    rate = d_H / (p * delta * d_W)
    grid = scaling_grid(spec, graph, delta) if t_grid is None else np.asarray(t_grid, dtype=float)
    f = np.asarray(f, dtype=float)
    sups = np.array([graph.lp_norm(apply_semigroup(spec, delta, t, f), np.inf) for t in grid])
    rhs = graph.lp_norm(f, p)
    fit = slope_fit(grid, sups, quantity="||P_t f||_inf")
    status = rate_status(fit, -rate - tolerance)
    constant = float(np.max(sups * grid ** rate) / rhs) if rhs > 0 else np.inf
    return _log_report(InequalityReport(
        name="linf_smoothing",
        lhs=float(sups.max()),
        rhs=rhs,
        constant=constant,
        cap=cap,
        passed=status == CheckStatus.PASS and _finite(constant) and constant <= cap,
        tolerance=tolerance,
        metadata=_metadata(graph, delta, p),
        values={"rate": rate, "slope_bound": -rate - tolerance},
        inconclusive=status == CheckStatus.INCONCLUSIVE,
        fit=fit,
    ))


# Characterizations and equivalences

def bv_characterization_check(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    family: Mapping[str, np.ndarray],
    kappa: Optional[float] = None,
    t_grid: Optional[Sequence[float]] = None,
    cap: float = DEFAULT_CAP,
) -> InequalityReport:
    """c Var(f) <= ||f||_{1, alpha_1^#} <= C Var(f), valid when alpha_1^# < 1."""
    _, d_W = graph.geometry.require_dimensions()
    k = graph.geometry.require_kappa(kappa)
    if delta <= 1.0 - k / d_W:
        raise WrongRegimeError("bv_characterization_check", "delta > 1 - kappa/d_W",
                               "the fractional Sobolev identification (sobolev_check)")
    alpha = _alpha_one(graph, delta, k)
    members = non_constant(family)
    norms = besov_norms(spec, graph, delta, members, 1.0, alpha, t_grid)
    ratios = {}
    for name, f in members.items():
        var = variation(graph, f, d_W=d_W, kappa=k)
        ratios[name] = _ratio(norms[name], var)
    return _bracket_report("bv_characterization", ratios, graph, delta, 1.0, cap, {"alpha": alpha})


def equivalence_checks(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    p: float,
    alpha: float,
    family: Mapping[str, np.ndarray],
    t_grid: Optional[Sequence[float]] = None,
    cap: float = DEFAULT_CAP,
    executor: Optional[Executor] = None,
) -> list[InequalityReport]:
    """
    Ratio brackets of ||f||_{p, alpha} against its comparable seminorms:
    Korevaar-Schoen sup and Grigor'yan N_{p, inf} at lambda = alpha delta
    d_W (alpha < 1/p), and at alpha = 1/p the W-norm, N_{p, p} and the
    value at the left edge of the window.
    """
    if alpha >= 1.0 / p:
        raise WrongRegimeError("equivalence_checks", "alpha < 1/p")
    _, d_W = graph.geometry.require_dimensions()
    members = non_constant(family)
    curves = energy_curves(spec, graph, delta, members, p, t_grid, executor)
    lam, critical = alpha * delta * d_W, delta * d_W / p
    pairs: dict[str, dict[str, float]] = {
        "besov_ks": {}, "besov_grigoryan_inf": {}, "besov_w": {}, "besov_grigoryan_p": {}, "locality": {},
    }
    for name, f in members.items():
        curve = curves[name]
        besov = besov_supremum(curve, alpha).value
        besov_critical = besov_supremum(curve, 1.0 / p).value
        left_edge = float(curve.scaled(1.0 / p)[0])
        pairs["besov_ks"][name] = _ratio(besov, ks_norm(graph, f, lam, p))
        pairs["besov_grigoryan_inf"][name] = _ratio(besov, grigoryan_norm(graph, f, lam, p, np.inf))
        pairs["besov_w"][name] = _ratio(besov_critical, w_norm(graph, f, critical, p))
        pairs["besov_grigoryan_p"][name] = _ratio(besov_critical, grigoryan_norm(graph, f, critical, p, p))
        pairs["locality"][name] = _ratio(besov_critical, left_edge)
    return [
        _bracket_report(f"equivalence:{key}", ratios, graph, delta, p, cap, {"alpha": alpha})
        for key, ratios in pairs.items()
    ]


def kernel_bounds_check(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    t_grid: Optional[Sequence[float]] = None,
    tolerance: float = 0.05,
    cap: float = np.inf,
) -> InequalityReport:
    """
    On-diagonal slope -d_H/(delta d_W) within tolerance; constant is the
    envelope width c3/c5. The base kernel envelope with the sub-Gaussian
    profile is reported next to it under "sub_gaussian".
    """
    grid = scaling_grid(spec, graph, delta) if t_grid is None else t_grid
    bounds = kernel_bound_fit(spec, graph, delta, grid)
    base = sub_gaussian_fit(spec, graph)
    fit = bounds.diagonal_fit
    width = bounds.c3 / bounds.c5 if bounds.c5 > 0 else np.inf
    slope_ok = abs(fit.slope - bounds.predicted_slope) <= tolerance
    return _log_report(InequalityReport(
        name="kernel_bounds",
        lhs=fit.slope,
        rhs=bounds.predicted_slope,
        constant=width,
        cap=cap,
        passed=bool(slope_ok and np.isfinite(width) and width <= cap),
        tolerance=tolerance,
        metadata=_metadata(graph, delta),
        values={**bounds.to_dict(), "sub_gaussian": base.to_dict()},
        inconclusive=not fit.passes_gate(settings.r2_gate),
        fit=fit,
    ))
