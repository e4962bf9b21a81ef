"""
Variational capacity of the fractional form.

Cap_0(K) = inf { E^(delta)(f, f) : f >= 1 on K } on a killed space, and
the total capacity Cap_1 with the L^2 mass added to the form. By the
Markov property the minimizer equals 1 on K, so the problem reduces to a
linear solve on the complement block.
"""
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from app.core.config import settings
from app.domain.entities import InequalityReport, MetricMeasureGraph, SpectralDecomposition
from app.domain.exceptions import (
    ConfigurationError,
    DegenerateCapacityError,
    InvalidGridError,
    WrongRegimeError,
    require,
)
from app.log.logging import logger
from app.services.analysis import transience
from app.services.families import non_constant
from app.services.inequalities import QUANTILE_LEVELS, level_edges

STRONG_TYPE_CONSTANT = 4.0


def fractional_form_matrix(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    mass: float = 0.0,
) -> np.ndarray:
    """
    Q with E^(delta)(f, f) + mass ||f||_2^2 = f_I^T Q f_I over interior nodes I.

    Q = M Phi diag(lambda^delta) Phi^T M + mass M restricted to I.
    """
    require(0.0 < delta <= 1.0, "delta", delta, "(0, 1]")
    interior = graph.interior
    mu = spec.measure[interior]
    weighted = spec.eigenvectors[interior] * mu[:, None]
    q = (weighted * spec.eigenvalues ** delta) @ weighted.T
    q = 0.5 * (q + q.T)
    if mass:
        q[np.diag_indices_from(q)] += mass * mu
    return q


def _as_mask(graph: MetricMeasureGraph, nodes) -> np.ndarray:
    nodes = np.asarray(nodes)
    if nodes.dtype == bool:
        if nodes.shape != (graph.node_count,):
            raise ConfigurationError("K", f"mask of shape {nodes.shape} for {graph.node_count} nodes")
        return nodes
    mask = np.zeros(graph.node_count, dtype=bool)
    mask[nodes.astype(int)] = True
    return mask


def _constrained_minimum(q: np.ndarray, pinned: np.ndarray) -> float:
    """min f^T Q f subject to f = 1 on the pinned (interior) positions."""
    free = ~pinned
    ones = np.ones(int(pinned.sum()))
    value = float(ones @ q[np.ix_(pinned, pinned)] @ ones)
    if free.any():
        coupling = q[np.ix_(free, pinned)] @ ones
        solution = cho_solve(cho_factor(q[np.ix_(free, free)]), -coupling)
        value += float(coupling @ solution)
    return value


def _interior_positions(graph: MetricMeasureGraph, mask: np.ndarray) -> np.ndarray:
    if graph.is_killed and mask[list(graph.boundary)].any():
        raise ConfigurationError("K", "the set touches the absorbing boundary")
    return mask[graph.interior]


def capacity(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    nodes,
    form: Optional[np.ndarray] = None,
) -> float:
    """
    Cap_0(K) for K given as node indices or a boolean mask.

    Raises:
        DegenerateCapacityError: the space has no absorbing boundary
        ConfigurationError: K meets the boundary
    """
    if not graph.is_killed:
        raise DegenerateCapacityError(graph.name)
    mask = _as_mask(graph, nodes)
    if not mask.any():
        return 0.0
    pinned = _interior_positions(graph, mask)
    q = fractional_form_matrix(spec, graph, delta) if form is None else form
    return _constrained_minimum(q, pinned)


def cap1(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    nodes,
    form: Optional[np.ndarray] = None,
) -> float:
    """Total capacity Cap_1(K) of E^(delta) + ||.||_2^2; defined on conservative spaces too."""
    mask = _as_mask(graph, nodes)
    if not mask.any():
        return 0.0
    pinned = _interior_positions(graph, mask)
    q = fractional_form_matrix(spec, graph, delta, mass=1.0) if form is None else form
    return _constrained_minimum(q, pinned)


def capacity_properties_check(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    sets: Sequence[np.ndarray],
    tolerance: float = 1e-9,
) -> InequalityReport:
    """
    Monotonicity over nested pairs and subadditivity over all pairs.

    constant is the worst ratio Cap_0(A u B) / (Cap_0(A) + Cap_0(B)); the
    check passes when it stays at 1 and no nested pair decreases.
    """
    if not graph.is_killed:
        raise DegenerateCapacityError(graph.name)
    q = fractional_form_matrix(spec, graph, delta)
    masks = [m for m in (_as_mask(graph, s) for s in sets) if m.any()]
    if len(masks) < 2:
        raise InvalidGridError("sets", "capacity properties need at least two nonempty sets")
    values = [_constrained_minimum(q, _interior_positions(graph, m)) for m in masks]

    worst, inversions, nested = 0.0, 0, 0
    for a in range(len(masks)):
        for b in range(a + 1, len(masks)):
            union = _constrained_minimum(q, _interior_positions(graph, masks[a] | masks[b]))
            worst = max(worst, union / (values[a] + values[b]))
            for small, large in ((a, b), (b, a)):
                if not np.any(masks[small] & ~masks[large]):
                    nested += 1
                    if values[small] > values[large] * (1 + tolerance):
                        inversions += 1
    report = InequalityReport(
        name="capacity",
        lhs=worst,
        rhs=1.0,
        constant=worst,
        cap=1.0 + tolerance,
        passed=bool(worst <= 1.0 + tolerance and inversions == 0),
        tolerance=tolerance,
        metadata={"space": graph.name, "delta": delta, "p": 2.0, "resolution": graph.resolution},
        values={"capacities": values, "masses": [float(graph.measure[m].sum()) for m in masks],
                "nested_pairs": nested, "monotonicity_violations": inversions},
    )
    logger.info(
        f"capacity: {report.status.value}",
        event_type="INEQUALITY_CHECK",
        check=report.name,
        space=graph.name,
        delta=delta,
        sets=len(masks),
        inversions=inversions,
    )
    return report


def form_energy(graph: MetricMeasureGraph, q: np.ndarray, f: np.ndarray) -> float:
    g = graph.killed(f)[graph.interior]
    return float(g @ q @ g)


def _require_transient(graph: MetricMeasureGraph, delta: float, check: str) -> None:
    if not transience(graph.geometry, delta).transient:
        raise WrongRegimeError(check, "0 < delta < min(1, d_H/d_W)")
    if not graph.is_killed:
        raise DegenerateCapacityError(graph.name)


def capacity_sobolev_check(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    sets: Sequence[np.ndarray],
    family: Mapping[str, np.ndarray],
    kappa_cap: Optional[float] = None,
    cap: float = 100.0,
) -> InequalityReport:
    """
    mu(K)^(1/kappa) <= Theta Cap_0(K) over the sets, then
    ||f||_{2 kappa} <= C E^(delta)(f, f)^(1/2) over the family.

    kappa defaults to d_H/(d_H - delta d_W).
    """
    _require_transient(graph, delta, "capacity_sobolev_check")
    d_H, d_W = graph.geometry.require_dimensions()
    kappa_cap = d_H / (d_H - delta * d_W) if kappa_cap is None else kappa_cap
    require(kappa_cap >= 0.5, "kappa_cap", kappa_cap, ">= 1/2")
    q = fractional_form_matrix(spec, graph, delta)

    thetas = []
    for mask in sets:
        mask = _as_mask(graph, mask)
        if not mask.any():
            continue
        value = _constrained_minimum(q, _interior_positions(graph, mask))
        thetas.append(float(graph.measure[mask].sum() ** (1.0 / kappa_cap) / value))
    if not thetas:
        raise InvalidGridError("sets", "no nonempty set for capacity_sobolev_check")

    ratios, sides = {}, {}
    for name, f in non_constant(family).items():
        g = graph.killed(f)
        energy = form_energy(graph, q, g)
        if energy > 0:
            lhs = graph.lp_norm(g, 2.0 * kappa_cap)
            ratios[name] = lhs / np.sqrt(energy)
            sides[name] = (lhs, float(np.sqrt(energy)))
    if not ratios:
        raise InvalidGridError("family", "no function with positive energy")
    witness = max(ratios, key=ratios.get)
    theta, constant = max(thetas), ratios[witness]
    report = InequalityReport(
        name="capacity_sobolev",
        lhs=sides[witness][0],
        rhs=sides[witness][1],
        constant=constant,
        cap=cap,
        passed=bool(np.isfinite(theta) and np.isfinite(constant) and constant <= cap),
        tolerance=settings.stability_tolerance,
        metadata={"space": graph.name, "delta": delta, "p": 2.0, "resolution": graph.resolution},
        values={"kappa_cap": kappa_cap, "theta": theta, "set_ratios": thetas,
                "ratios": dict(sorted(ratios.items())), "witness": witness},
    )
    logger.info(
        f"capacity_sobolev: {report.status.value}",
        event_type="INEQUALITY_CHECK",
        check=report.name,
        space=graph.name,
        delta=delta,
        theta=theta,
        constant=constant,
    )
    return report


def capacitary_strong_type_check(
    spec: SpectralDecomposition,
    graph: MetricMeasureGraph,
    delta: float,
    f: np.ndarray,
    levels: int = QUANTILE_LEVELS,
) -> InequalityReport:
    """
    int_0^inf 2t Cap_0({|f| > t}) dt <= 4 E^(delta)(f, f).

    The level integral is summed exactly between the levels of |f|, each
    interval using the capacity at its lower end, so the left side is never
    underestimated when the levels are coarsened to quantiles.
    """
    if not graph.is_killed:
        raise DegenerateCapacityError(graph.name)
    q = fractional_form_matrix(spec, graph, delta)
    g = np.abs(graph.killed(f))
    edges = level_edges(g, levels)
    lhs = 0.0
    for lower, upper in zip(edges[:-1], edges[1:]):
        pinned = _interior_positions(graph, g > lower)
        lhs += (upper ** 2 - lower ** 2) * _constrained_minimum(q, pinned)
    rhs = form_energy(graph, q, g)
    constant = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)
    report = InequalityReport(
        name="capacitary_strong_type",
        lhs=float(lhs),
        rhs=rhs,
        constant=float(constant),
        cap=STRONG_TYPE_CONSTANT,
        passed=bool(constant <= STRONG_TYPE_CONSTANT * (1 + 1e-9)),
        tolerance=0.0,
        metadata={"space": graph.name, "delta": delta, "p": 2.0, "resolution": graph.resolution},
        values={"levels": int(edges.size - 1)},
    )
    logger.info(
        f"capacitary_strong_type: {report.status.value}",
        event_type="INEQUALITY_CHECK",
        check=report.name,
        space=graph.name,
        delta=delta,
        constant=report.constant,
    )
    return report
