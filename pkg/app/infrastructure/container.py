"""
Dependency Injection Container.

Composition root of the laboratory: the report sink and the worker pool
are wired up here and handed to the use cases.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from app.core.config import settings
from app.domain.ports import ReportSink
from app.infrastructure.report_writer import FileReportSink
from app.application.use_cases import RunScenarioUseCase
from app.log.logging import logger


@dataclass
class Container:
    """
    Dependency Injection Container.

    Holds the shared worker pool and creates sinks per output directory.
    The pool is created lazily; workers overrides settings.worker_count.
    """

    workers: Optional[int] = None
    _executor: Optional[ThreadPoolExecutor] = None

    @property
    def executor(self) -> ThreadPoolExecutor:
        """Get the shared thread pool."""
        if self._executor is None:
            workers = self.workers or settings.worker_count
            self._executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="subheat")
            logger.debug("Worker pool started", event_type="EXECUTOR_STARTED", workers=workers)
        return self._executor

    # Factory Methods for creating new instances

    def create_sink(self, output_dir: str | Path) -> ReportSink:
        """Create a report sink writing below output_dir."""
        return FileReportSink(output_dir)

    def create_run_scenario(self, output_dir: str | Path) -> RunScenarioUseCase:
        return RunScenarioUseCase(sink=self.create_sink(output_dir), executor=self.executor)

    def shutdown(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None


# Global container instance (singleton)
_container: Optional[Container] = None


def get_container(workers: Optional[int] = None) -> Container:
    """
    Get the global container instance.

    Args:
        workers: Pool size for a container created by this call

    Returns:
        The singleton Container instance.
    """
    global _container
    if _container is None:
        _container = Container(workers=workers)
    return _container


def reset_container() -> None:
    """Shut down and drop the global container (useful for testing)."""
    global _container
    if _container is not None:
        _container.shutdown()
    _container = None
