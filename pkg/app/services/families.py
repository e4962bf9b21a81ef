"""
Test functions and test sets on a metric measure graph.

The canonical family has six members spanning smooth, BV and
critical-regularity behaviour. Every member is scaled to sup norm 1 and
built from the metric distance to a centre node, so the same recipe
works on every space.
"""
from enum import Enum
from typing import Optional

import numpy as np

from app.core.config import settings
from app.domain.entities import MetricMeasureGraph, SpectralDecomposition
from app.domain.exceptions import ParameterDomainError, require
from app.log.logging import logger


class FunctionKind(str, Enum):
    SMOOTHED_INDICATOR = "smoothed_indicator"
    SHARP_INDICATOR = "sharp_indicator"
    LOW_MODE = "low_mode"
    ROUGH = "rough"
    TENT = "tent"
    EIGENVECTOR = "eigenvector"


CANONICAL_ORDER = (
    FunctionKind.SMOOTHED_INDICATOR,
    FunctionKind.SHARP_INDICATOR,
    FunctionKind.LOW_MODE,
    FunctionKind.ROUGH,
    FunctionKind.TENT,
    FunctionKind.EIGENVECTOR,
)


def center_node(graph: MetricMeasureGraph) -> int:
    """Node whose coordinate is closest to the middle of the coordinate range."""
    c = graph.coordinate
    return int(np.argmin(np.abs(c - 0.5 * (c.min() + c.max()))))


def _normalized(f: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(f))
    return f / scale if scale > 0 else f


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def midpoint_displacement(count: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """
    Random midpoint displacement bridge on 2^L + 1 >= count points.

    Displacements shrink by 2^-hurst per level; both ends are pinned at 0.
    """
    require(0.0 < hurst < 1.0, "hurst", hurst, "(0, 1)")
    levels = max(1, int(np.ceil(np.log2(max(count - 1, 2)))))
    m = 2 ** levels
    path = np.zeros(m + 1)
    step, scale = m, 1.0
    while step > 1:
        half = step // 2
        left = path[0:m - half:step]
        right = path[step::step]
        path[half::step] = 0.5 * (left + right) + scale * rng.standard_normal(left.size)
        scale *= 2.0 ** (-hurst)
        step = half
    return path


def build_function(
    graph: MetricMeasureGraph,
    spec: SpectralDecomposition,
    kind: FunctionKind | str,
    center: Optional[int] = None,
    radius: float = 0.25,
    mode: int = 1,
    hurst: Optional[float] = None,
    seed: Optional[int] = None,
) -> np.ndarray:
    """
    One test function.

    radius is a fraction of the diameter. mode counts non-constant
    eigenvectors from 1. hurst defaults to kappa/d_W (0.5 when kappa is
    unknown).
    """
    kind = FunctionKind(kind)
    require(0.0 < radius < 1.0, "radius", radius, "(0, 1)")
    center = center_node(graph) if center is None else int(center)
    if not 0 <= center < graph.node_count:
        raise ParameterDomainError("center", center, f"[0, {graph.node_count})")
    diameter = graph.diameter
    distance = graph.metric[center]
    r = radius * diameter

    if kind == FunctionKind.SMOOTHED_INDICATOR:
        width = diameter / 16.0
        f = _smoothstep((r + width - distance) / width)
    elif kind == FunctionKind.SHARP_INDICATOR:
        f = (distance < r).astype(float)
    elif kind == FunctionKind.LOW_MODE:
        f = np.cos(np.pi * distance / diameter)
    elif kind == FunctionKind.TENT:
        f = np.maximum(0.0, 1.0 - distance / r)
    elif kind == FunctionKind.ROUGH:
        if hurst is None:
            geometry = graph.geometry
            hurst = geometry.kappa / geometry.d_W if geometry.has_kappa and geometry.d_W else 0.5
        hurst = float(np.clip(hurst, 0.05, 0.95))
        rng = np.random.default_rng(settings.default_seed if seed is None else seed)
        path = midpoint_displacement(graph.node_count, hurst, rng)
        c = graph.coordinate
        u = (c - c.min()) / max(c.max() - c.min(), np.finfo(float).tiny)
        f = np.interp(u, np.linspace(0.0, 1.0, path.size), path)
    else:
        first = 0 if spec.killed else 1
        index = first + mode - 1
        if not (1 <= mode and index < spec.mode_count):
            raise ParameterDomainError("mode", mode, f"[1, {spec.mode_count - first}]")
        f = np.array(spec.eigenvectors[:, index])
    return _normalized(np.asarray(f, dtype=float))


def canonical_family(
    graph: MetricMeasureGraph,
    spec: SpectralDecomposition,
    seed: Optional[int] = None,
) -> dict[str, np.ndarray]:
    """The six canonical test functions keyed by kind, in a fixed order."""
    family = {kind.value: build_function(graph, spec, kind, seed=seed) for kind in CANONICAL_ORDER}
    logger.debug(
        f"Canonical family on {graph.name}",
        event_type="FAMILY_BUILT",
        space=graph.name,
        members=len(family),
    )
    return family


def non_constant(family: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {name: f for name, f in family.items() if np.ptp(f) > 0}


# Test sets

def measure_sets(graph: MetricMeasureGraph, fractions, center: Optional[int] = None) -> list[np.ndarray]:
    """
    Balls around the centre holding (at least) the given fractions of the
    total mass, as boolean masks. On the circle these are arcs.
    """
    center = center_node(graph) if center is None else center
    order = np.argsort(graph.metric[center], kind="stable")
    cumulative = np.cumsum(graph.measure[order]) / graph.total_mass
    sets = []
    for fraction in fractions:
        require(0.0 < fraction < 1.0, "fraction", fraction, "(0, 1)")
        size = int(np.searchsorted(cumulative, fraction - 1e-12)) + 1
        mask = np.zeros(graph.node_count, dtype=bool)
        mask[order[:size]] = True
        sets.append(mask)
    return sets


def dyadic_sets(graph: MetricMeasureGraph, count: int = 10) -> list[np.ndarray]:
    """
    Dyadic coordinate cells [k 2^-j, (k+1) 2^-j) that stay off both ends
    of the coordinate range (and hence off an absorbing boundary), coarse
    levels first.
    """
    c = graph.coordinate
    u = (c - c.min()) / max(c.max() - c.min(), np.finfo(float).tiny)
    sets: list[np.ndarray] = []
    level = 2
    while len(sets) < count and level < 12:
        cells = 2 ** level
        for k in range(1, cells - 1):
            mask = (u >= k / cells) & (u < (k + 1) / cells)
            if graph.is_killed:
                mask[list(graph.boundary)] = False
            if mask.any():
                sets.append(mask)
            if len(sets) == count:
                break
        level += 1
    return sets
