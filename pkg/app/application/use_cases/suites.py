"""
Suite registry.

Maps every suite name of a scenario to a runner. A runner evaluates one
suite at one delta (looping over p and the test functions itself) and
returns SuiteResult records in a deterministic order.
"""
import json
from concurrent.futures import Executor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from app.domain.entities import (
    CheckStatus,
    InequalityReport,
    MetricMeasureGraph,
    SlopeFit,
    SpectralDecomposition,
    json_safe,
)
from app.domain.exceptions import DegenerateCapacityError, InvalidGridError, WrongRegimeError
from app.log.logging import logger
from app.schemas.scenario import ScenarioConfig, SuiteName
from app.services import analysis, capacity, inequalities
from app.services.families import build_function, canonical_family, dyadic_sets, measure_sets, non_constant
from app.services.spectral import resolved_time_window

ISOPERIMETRIC_FRACTIONS = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
CAPACITY_SETS = 10


@dataclass(frozen=True)
class CurveTable:
    name: str
    header: tuple[str, ...]
    rows: tuple[tuple, ...]


@dataclass(frozen=True)
class SuiteResult:
    """One record of report.json."""
    suite: str
    space: str
    params: dict
    status: CheckStatus
    constant: Optional[float]
    values: dict
    window: Optional[tuple[float, float]] = None
    tolerance: Optional[float] = None
    subject: Optional[str] = None
    curves: tuple[CurveTable, ...] = field(default=(), compare=False)

    @property
    def key(self) -> tuple[str, str, str]:
        """Identity across refinement levels."""
        return self.suite, json.dumps(json_safe(self.params), sort_keys=True), self.subject or ""

    def to_dict(self) -> dict:
        return json_safe({
            "suite": self.suite,
            "space": self.space,
            "params": dict(sorted(self.params.items())),
            "subject": self.subject,
            "status": self.status,
            "constant": self.constant,
            "values": self.values,
            "window": list(self.window) if self.window else None,
            "tolerance": self.tolerance,
        })


def build_family(config: ScenarioConfig, graph: MetricMeasureGraph, spec: SpectralDecomposition) -> dict[str, np.ndarray]:
    if config.family == "canonical":
        return canonical_family(graph, spec, seed=config.seed)
    return {
        item.function_id: build_function(
            graph, spec, item.kind,
            center=item.center, radius=item.radius, mode=item.mode, hurst=item.hurst,
            seed=config.seed if item.seed is None else item.seed,
        )
        for item in config.family
    }


@dataclass
class SuiteContext:
    """Everything a runner needs at one resolution."""
    config: ScenarioConfig
    graph: MetricMeasureGraph
    spec: SpectralDecomposition
    family: dict[str, np.ndarray]
    executor: Optional[Executor] = None

    def t_grid(self, delta: float) -> Optional[np.ndarray]:
        """Configured grid over the resolved window; None lets each check pick its own."""
        grid = self.config.t_grid
        if grid is None:
            return None
        window = resolved_time_window(self.spec, self.graph, delta)
        return window.log_grid(grid.count, grid.lower_multiplier, grid.upper_multiplier)

    @cached_property
    def kappa(self) -> tuple[Optional[float], str]:
        """(kappa, provenance): configured, stored with the geometry, or fitted once."""
        if self.config.kappa is not None:
            return self.config.kappa, "configured"
        geometry = self.graph.geometry
        if geometry.has_kappa:
            return geometry.kappa, geometry.kappa_provenance.value
        if geometry.d_W is None:
            return None, "unset"
        fit = analysis.weak_be_fit(self.spec, self.graph, self.config.deltas[0], self.family,
                                   seed=self.config.seed)
        if fit.status != CheckStatus.PASS or not 0.0 < fit.kappa_hat < geometry.d_W:
            logger.warning(
                "kappa could not be estimated",
                event_type="KAPPA_UNRESOLVED",
                space=self.graph.name,
                kappa_hat=fit.kappa_hat,
            )
            return None, "unset"
        logger.info("Estimated kappa", event_type="KAPPA_ESTIMATED", space=self.graph.name,
                    kappa_hat=fit.kappa_hat)
        return fit.kappa_hat, "estimated"

    @property
    def kappa_value(self) -> Optional[float]:
        return self.kappa[0]

    @property
    def members(self) -> dict[str, np.ndarray]:
        return non_constant(self.family)

    def alphas(self, p: float) -> list[float]:
        return list(self.config.alphas) if self.config.alphas else [0.5 / p]


Runner = Callable[[SuiteContext, float], list[SuiteResult]]


def _label(value: float) -> str:
    return format(value, "g")


def _fit_curve(name: str, fit: SlopeFit, column: str) -> CurveTable:
    rows = tuple((float(np.exp(x)), float(np.exp(y))) for x, y in zip(fit.log_x, fit.log_y))
    return CurveTable(name=name, header=("t", column), rows=rows)


def _from_report(
    suite: SuiteName,
    ctx: SuiteContext,
    params: dict,
    report: InequalityReport,
    subject: Optional[str] = None,
) -> SuiteResult:
    curves = ()
    if report.fit is not None:
        stem = "_".join([suite.value] + [f"{k}{_label(v)}" for k, v in sorted(params.items())]
                        + ([subject] if subject else []))
        curves = (_fit_curve(stem, report.fit, report.name),)
    return SuiteResult(
        suite=suite.value,
        space=ctx.graph.name,
        params=params,
        status=report.status,
        constant=report.constant,
        values=report.to_dict(),
        window=report.fit.window if report.fit else None,
        tolerance=report.tolerance,
        subject=subject,
        curves=curves,
    )


def _guarded(suite: SuiteName, ctx: SuiteContext, params: dict, run: Callable[[], list[SuiteResult]]) -> list[SuiteResult]:
    """Run one cell; a check outside its regime becomes an inconclusive record."""
    try:
        return run()
    except (WrongRegimeError, DegenerateCapacityError) as error:
        logger.warning(
            error.message,
            event_type="SUITE_NOT_APPLICABLE",
            suite=suite.value,
            space=ctx.graph.name,
            code=error.code,
        )
        return [SuiteResult(
            suite=suite.value,
            space=ctx.graph.name,
            params=params,
            status=CheckStatus.INCONCLUSIVE,
            constant=None,
            values={"error": error.code, "message": error.message,
                    "alternative": getattr(error, "alternative", None)},
        )]


# Runners

def run_critical_exponent(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    results = []
    kappa, provenance = ctx.kappa if any(p < 2 for p in ctx.config.ps) else (None, "unset")
    for p in ctx.config.ps:
        report = analysis.critical_exponent(ctx.spec, ctx.graph, delta, p, ctx.family, ctx.t_grid(delta),
                                            kappa=kappa, executor=ctx.executor)
        params = {"delta": delta, "p": p}
        curves = tuple(
            _fit_curve(f"critical_exponent_delta{_label(delta)}_p{_label(p)}_{name}", fit, "E_p^(1/p)")
            for name, fit in sorted(report.fits.items())
        )
        witness_fit = report.fits.get(report.witness) if report.witness else None
        values = report.to_dict()
        values["kappa_provenance"] = provenance
        results.append(SuiteResult(
            suite=SuiteName.CRITICAL_EXPONENT.value,
            space=ctx.graph.name,
            params=params,
            status=report.status,
            constant=report.estimate,
            values=values,
            window=witness_fit.window if witness_fit else None,
            tolerance=report.tolerance,
            curves=curves,
        ))
    return results


def run_weak_be(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    fit = analysis.weak_be_fit(ctx.spec, ctx.graph, delta, ctx.family, ctx.t_grid(delta), seed=ctx.config.seed)
    return [SuiteResult(
        suite=SuiteName.WEAK_BE.value,
        space=ctx.graph.name,
        params={"delta": delta},
        status=fit.status,
        constant=fit.constant,
        values=fit.to_dict(),
        window=fit.fit.window,
        curves=(_fit_curve(f"weak_be_delta{_label(delta)}", fit.fit, "max_edge_increment"),),
    )]


def run_coarea(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    positive = {name: f for name, f in ctx.members.items() if np.min(f) >= 0}
    if not positive:
        raise InvalidGridError("family", "coarea needs a non-negative non-constant function")
    return [
        _from_report(SuiteName.COAREA, ctx, {"delta": delta},
                     inequalities.coarea_check(ctx.spec, ctx.graph, delta, f, kappa=ctx.kappa_value,
                                               t_grid=ctx.t_grid(delta), executor=ctx.executor),
                     subject=name)
        for name, f in positive.items()
    ]


def run_pseudo_poincare(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    return [
        _from_report(SuiteName.PSEUDO_POINCARE, ctx, {"delta": delta},
                     inequalities.pseudo_poincare_check(ctx.spec, ctx.graph, delta, f, ctx.t_grid(delta),
                                                        kappa=ctx.kappa_value),
                     subject=name)
        for name, f in ctx.members.items()
    ]


def run_sobolev(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    results = []
    for p in ctx.config.ps:
        params = {"delta": delta, "p": p}
        results += _guarded(SuiteName.SOBOLEV, ctx, params, lambda: [_from_report(
            SuiteName.SOBOLEV, ctx, params, inequalities.sobolev_check(ctx.graph, delta, p, ctx.family))])
    return results


def run_isoperimetric(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    sets = measure_sets(ctx.graph, ISOPERIMETRIC_FRACTIONS)
    report = inequalities.isoperimetric_check(ctx.graph, delta, sets)
    return [_from_report(SuiteName.ISOPERIMETRIC, ctx, {"delta": delta}, report)]


def run_linfty(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    report = inequalities.linfty_check(ctx.graph, delta, ctx.family)
    return [_from_report(SuiteName.LINFTY, ctx, {"delta": delta}, report)]


def run_lp_smoothing(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    results = []
    for p in ctx.config.ps:
        params = {"delta": delta, "p": p}
        results += _guarded(SuiteName.LP_SMOOTHING, ctx, params, lambda: [
            _from_report(SuiteName.LP_SMOOTHING, ctx, params,
                         inequalities.lp_smoothing_check(ctx.spec, ctx.graph, delta, p, f, ctx.t_grid(delta),
                                                         executor=ctx.executor),
                         subject=name)
            for name, f in ctx.members.items()
        ])
    return results


def run_linf_smoothing(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    return [
        _from_report(SuiteName.LINF_SMOOTHING, ctx, {"delta": delta, "p": p},
                     inequalities.linf_smoothing_check(ctx.spec, ctx.graph, delta, p, f, ctx.t_grid(delta)),
                     subject=name)
        for p in ctx.config.ps
        for name, f in ctx.members.items()
    ]


def run_capacity(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    report = capacity.capacity_properties_check(ctx.spec, ctx.graph, delta, dyadic_sets(ctx.graph, CAPACITY_SETS))
    return [_from_report(SuiteName.CAPACITY, ctx, {"delta": delta}, report)]


def run_capacity_sobolev(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    report = capacity.capacity_sobolev_check(ctx.spec, ctx.graph, delta,
                                             dyadic_sets(ctx.graph, CAPACITY_SETS), ctx.family)
    return [_from_report(SuiteName.CAPACITY_SOBOLEV, ctx, {"delta": delta}, report)]


def run_capacitary_strong_type(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    return [
        _from_report(SuiteName.CAPACITARY_STRONG_TYPE, ctx, {"delta": delta},
                     capacity.capacitary_strong_type_check(ctx.spec, ctx.graph, delta, f), subject=name)
        for name, f in ctx.members.items()
    ]


def run_bv_characterization(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    report = inequalities.bv_characterization_check(ctx.spec, ctx.graph, delta, ctx.family,
                                                    kappa=ctx.kappa_value, t_grid=ctx.t_grid(delta))
    return [_from_report(SuiteName.BV_CHARACTERIZATION, ctx, {"delta": delta}, report)]


def run_kernel_bounds(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    report = inequalities.kernel_bounds_check(ctx.spec, ctx.graph, delta, ctx.t_grid(delta))
    return [_from_report(SuiteName.KERNEL_BOUNDS, ctx, {"delta": delta}, report)]


def run_equivalence(ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    results = []
    for p in ctx.config.ps:
        for alpha in ctx.alphas(p):
            params = {"delta": delta, "p": p, "alpha": alpha}
            results += _guarded(SuiteName.EQUIVALENCE, ctx, params, lambda: [
                _from_report(SuiteName.EQUIVALENCE, ctx, params, report, subject=report.name.split(":", 1)[1])
                for report in inequalities.equivalence_checks(ctx.spec, ctx.graph, delta, p, alpha, ctx.family,
                                                              ctx.t_grid(delta), executor=ctx.executor)
            ])
    return results


SUITE_RUNNERS: dict[SuiteName, Runner] = {
    SuiteName.CRITICAL_EXPONENT: run_critical_exponent,
    SuiteName.WEAK_BE: run_weak_be,
    SuiteName.COAREA: run_coarea,
    SuiteName.PSEUDO_POINCARE: run_pseudo_poincare,
    SuiteName.SOBOLEV: run_sobolev,
    SuiteName.ISOPERIMETRIC: run_isoperimetric,
    SuiteName.LINFTY: run_linfty,
    SuiteName.LP_SMOOTHING: run_lp_smoothing,
    SuiteName.LINF_SMOOTHING: run_linf_smoothing,
    SuiteName.CAPACITY: run_capacity,
    SuiteName.CAPACITY_SOBOLEV: run_capacity_sobolev,
    SuiteName.CAPACITARY_STRONG_TYPE: run_capacitary_strong_type,
    SuiteName.BV_CHARACTERIZATION: run_bv_characterization,
    SuiteName.KERNEL_BOUNDS: run_kernel_bounds,
    SuiteName.EQUIVALENCE: run_equivalence,
}


def run_suite(name: SuiteName, ctx: SuiteContext, delta: float) -> list[SuiteResult]:
    """Run one registered suite; regime errors become inconclusive records."""
    return _guarded(name, ctx, {"delta": delta}, lambda: SUITE_RUNNERS[name](ctx, delta))
