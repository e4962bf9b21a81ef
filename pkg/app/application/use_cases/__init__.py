"""
Use Cases - Application services running the laboratory.
"""
from app.application.use_cases.run_scenario import (
    ExitCode,
    RunScenarioUseCase,
    ScenarioOutcome,
    exit_code_for,
)
from app.application.use_cases.suites import (
    SUITE_RUNNERS,
    SuiteContext,
    SuiteResult,
    build_family,
    run_suite,
)

__all__ = [
    "ExitCode",
    "RunScenarioUseCase",
    "ScenarioOutcome",
    "exit_code_for",
    "SUITE_RUNNERS",
    "SuiteContext",
    "SuiteResult",
    "build_family",
    "run_suite",
]
