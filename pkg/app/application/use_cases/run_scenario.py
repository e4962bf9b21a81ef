"""
Run Scenario Use Case.

Executes the suites of a scenario at one or two resolutions and writes
report.json, the curve CSVs, a summary table and the manifest.
"""
import platform
from concurrent.futures import Executor
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import IntEnum
from importlib.metadata import PackageNotFoundError, version
from typing import Callable, Optional

from app.domain.entities import CheckStatus, MetricMeasureGraph
from app.domain.exceptions import DomainException
from app.domain.ports import ReportSink
from app.log.logging import logger
from app.schemas.scenario import ScenarioConfig
from app.schemas.space_descriptor import from_descriptor
from app.services.fitting import level_stability
from app.services.spectral import eigendecompose
from app.application.use_cases.suites import SuiteContext, SuiteResult, build_family, run_suite

SUMMARY_HEADER = ("suite", "space", "subject", "delta", "p", "lhs", "rhs", "constant", "status")
VERSIONED_PACKAGES = ("subheat-lab", "numpy", "scipy", "pydantic", "pydantic-settings", "loguru")


class ExitCode(IntEnum):
    PASSED = 0
    INVALID = 1
    FAILED = 2
    INCONCLUSIVE = 3


def exit_code_for(statuses) -> ExitCode:
    """Any failure wins over any inconclusive record."""
    statuses = list(statuses)
    if CheckStatus.FAIL in statuses:
        return ExitCode.FAILED
    if CheckStatus.INCONCLUSIVE in statuses:
        return ExitCode.INCONCLUSIVE
    return ExitCode.PASSED


@dataclass(frozen=True)
class ScenarioOutcome:
    exit_code: ExitCode
    results: list[SuiteResult]
    report_path: str
    manifest_path: str

    @property
    def counts(self) -> dict[str, int]:
        return status_counts(self.results)


def status_counts(results: list[SuiteResult]) -> dict[str, int]:
    return {status.value: sum(r.status == status for r in results) for status in CheckStatus}


def package_versions() -> dict[str, str]:
    versions = {"python": platform.python_version()}
    for package in VERSIONED_PACKAGES:
        try:
            versions[package] = version(package)
        except PackageNotFoundError:
            versions[package] = "unknown"
    return versions


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class RunScenarioUseCase:
    """
    Use case for running a declarative scenario.

    Suite cells run sequentially in config order (suites, then deltas);
    the executor parallelizes the per-t work inside each cell, so report
    order never depends on scheduling.
    """

    def __init__(
        self,
        sink: ReportSink,
        executor: Optional[Executor] = None,
        clock: Callable[[], datetime] = _utc_now,
    ):
        self._sink = sink
        self._executor = executor
        self._clock = clock

    def execute(self, config: ScenarioConfig) -> ScenarioOutcome:
        """
        Run every suite and persist the results.

        Returns:
            ScenarioOutcome with the exit code of the run
        """
        started = self._clock()
        logger.info(
            "Scenario started",
            event_type="SCENARIO_STARTED",
            space=config.space.kind.value,
            resolution=config.space.resolution,
            suites=[suite.value for suite in config.suites],
            config_hash=config.config_hash(),
        )
        results = self._run_level(config, from_descriptor(config.space))
        if config.refinement is not None:
            fine_space = config.space.model_copy(update={"resolution": config.refinement})
            fine = self._run_level(config, from_descriptor(fine_space))
            stability = self._stability(results, fine, config)
            results = results + fine + stability

        report_path = self._sink.write_report([result.to_dict() for result in results])
        for result in results:
            for curve in result.curves:
                self._sink.write_curve_csv(f"{result.space}_{curve.name}", curve.header, curve.rows)
        self._sink.write_table_csv("summary", SUMMARY_HEADER, [self._summary_row(r) for r in results])

        code = exit_code_for(result.status for result in results)
        outcome_counts = status_counts(results)
        manifest_path = self._sink.write_manifest({
            "config": config.model_dump(mode="json"),
            "config_hash": config.config_hash(),
            "versions": package_versions(),
            "started_at": started.isoformat(),
            "finished_at": self._clock().isoformat(),
            "exit_code": int(code),
            "counts": outcome_counts,
        })
        logger.info(
            f"Scenario finished with exit code {int(code)}",
            event_type="SCENARIO_FINISHED",
            exit_code=int(code),
            records=len(results),
            **outcome_counts,
        )
        return ScenarioOutcome(exit_code=code, results=results, report_path=report_path, manifest_path=manifest_path)

    def _run_level(self, config: ScenarioConfig, graph: MetricMeasureGraph) -> list[SuiteResult]:
        spec = eigendecompose(graph)
        ctx = SuiteContext(config=config, graph=graph, spec=spec,
                           family=build_family(config, graph, spec), executor=self._executor)
        results: list[SuiteResult] = []
        for suite in config.suites:
            for delta in config.deltas:
                try:
                    results += run_suite(suite, ctx, delta)
                except DomainException as error:
                    logger.error(
                        f"Suite {suite.value} failed: {error.message}",
                        event_type="SUITE_ERROR",
                        suite=suite.value,
                        space=graph.name,
                        delta=delta,
                        code=error.code,
                    )
                    results.append(SuiteResult(
                        suite=suite.value,
                        space=graph.name,
                        params={"delta": delta},
                        status=CheckStatus.INCONCLUSIVE,
                        constant=None,
                        values={"error": error.code, "message": error.message},
                    ))
        return results

    @staticmethod
    def _stability(coarse: list[SuiteResult], fine: list[SuiteResult], config: ScenarioConfig) -> list[SuiteResult]:
        """Relative change of every constant that both levels resolved."""
        fine_by_key = {result.key: result for result in fine}
        checks = []
        for result in coarse:
            other = fine_by_key.get(result.key)
            if other is None or CheckStatus.INCONCLUSIVE in (result.status, other.status):
                continue
            if result.constant is None or other.constant is None:
                continue
            check = level_stability(result.suite, result.constant, other.constant)
            checks.append(SuiteResult(
                suite="stability",
                space=result.space,
                params={**result.params, "coarse": config.space.resolution, "fine": config.refinement},
                status=CheckStatus.PASS if check.passed else CheckStatus.FAIL,
                constant=check.relative_change,
                values=check.to_dict(),
                tolerance=check.tolerance,
                subject=f"{result.suite}:{result.subject}" if result.subject else result.suite,
            ))
        return checks

    @staticmethod
    def _summary_row(result: SuiteResult) -> tuple:
        values = result.values
        return (
            result.suite,
            result.space,
            result.subject or "",
            result.params.get("delta", ""),
            result.params.get("p", ""),
            values.get("lhs", ""),
            values.get("rhs", ""),
            "" if result.constant is None else result.constant,
            result.status.value,
        )
