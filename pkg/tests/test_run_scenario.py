"""
Tests for the scenario use case and the suite registry.

Suite runners are patched where the tests are about orchestration; the
integration class runs real suites into a temporary directory.
"""
import json
from datetime import datetime, timezone

import pytest

from app.application.use_cases import RunScenarioUseCase
from app.application.use_cases.run_scenario import SUMMARY_HEADER, ExitCode, exit_code_for
from app.application.use_cases.suites import SUITE_RUNNERS, SuiteResult
from app.domain.entities import CheckStatus
from app.domain.exceptions import InvalidGridError
from app.domain.ports import ReportSink
from app.infrastructure.report_writer import FileReportSink
from app.schemas import ScenarioConfig, SuiteName

FIXED = datetime(2024, 1, 1, tzinfo=timezone.utc)


@pytest.fixture
def sink(mocker):
    sink = mocker.create_autospec(ReportSink, instance=True)
    sink.write_report.return_value = "out/report.json"
    sink.write_manifest.return_value = "out/manifest.json"
    return sink


def _fake_runner(constants: dict[int, float], status: CheckStatus = CheckStatus.PASS):
    def run(name, ctx, delta):
        return [SuiteResult(
            suite=name.value,
            space=ctx.graph.name,
            params={"delta": delta},
            status=status,
            constant=constants[ctx.graph.resolution],
            values={"lhs": 1.0, "rhs": 2.0},
        )]
    return run


class TestExitCode:
    """Tests for the aggregate exit code."""

    def test_all_pass(self):
        """Test exit 0 when every record passes."""
        assert exit_code_for([CheckStatus.PASS, CheckStatus.PASS]) == ExitCode.PASSED

    def test_failure_wins(self):
        """Test that one failure outranks inconclusive records."""
        statuses = [CheckStatus.INCONCLUSIVE, CheckStatus.FAIL, CheckStatus.PASS]
        assert exit_code_for(statuses) == ExitCode.FAILED

    def test_inconclusive(self):
        """Test exit 3 without failures."""
        assert exit_code_for([CheckStatus.PASS, CheckStatus.INCONCLUSIVE]) == 3

    def test_registry_covers_every_suite(self):
        """Test that each suite name has a runner."""
        assert set(SUITE_RUNNERS) == set(SuiteName)


class TestRunScenarioUseCase:
    """Tests for orchestration against a mocked sink."""

    def test_writes_report_table_and_manifest(self, mocker, sink, scenario_payload):
        """Test the persisted artifacts of a passing run."""
        mocker.patch("app.application.use_cases.run_scenario.run_suite", side_effect=_fake_runner({33: 0.5}))
        config = ScenarioConfig.model_validate(scenario_payload)

        outcome = RunScenarioUseCase(sink=sink, clock=lambda: FIXED).execute(config)

        assert outcome.exit_code == ExitCode.PASSED
        assert outcome.report_path == "out/report.json"
        records = sink.write_report.call_args.args[0]
        assert [r["suite"] for r in records] == ["capacity"]

        name, header, rows = sink.write_table_csv.call_args.args
        assert (name, header) == ("summary", SUMMARY_HEADER)
        assert rows == [("capacity", "interval-absorbing(n=33)", "", 0.25, "", 1.0, 2.0, 0.5, "pass")]

        manifest = sink.write_manifest.call_args.args[0]
        assert manifest["exit_code"] == 0
        assert manifest["config_hash"] == config.config_hash()
        assert manifest["started_at"] == FIXED.isoformat()
        assert manifest["counts"] == {"pass": 1, "fail": 0, "inconclusive": 0}

    def test_cells_run_in_config_order(self, mocker, sink, scenario_payload):
        """Test suites outer, deltas inner."""
        runner = mocker.patch("app.application.use_cases.run_scenario.run_suite",
                              side_effect=_fake_runner({33: 1.0}))
        payload = {**scenario_payload, "suites": ["capacity", "capacity_sobolev"], "deltas": [0.25, 0.4]}

        RunScenarioUseCase(sink=sink).execute(ScenarioConfig.model_validate(payload))

        calls = [(c.args[0].value, c.args[2]) for c in runner.call_args_list]
        assert calls == [("capacity", 0.25), ("capacity", 0.4),
                         ("capacity_sobolev", 0.25), ("capacity_sobolev", 0.4)]

    def test_domain_error_becomes_inconclusive(self, mocker, sink, scenario_payload):
        """Test that a failing cell is recorded and the run goes on."""
        mocker.patch("app.application.use_cases.run_scenario.run_suite",
                     side_effect=InvalidGridError("family", "no usable function"))

        outcome = RunScenarioUseCase(sink=sink).execute(ScenarioConfig.model_validate(scenario_payload))

        assert outcome.exit_code == ExitCode.INCONCLUSIVE
        assert outcome.results[0].status == CheckStatus.INCONCLUSIVE
        assert outcome.results[0].values["error"] == "INVALID_GRID"
        sink.write_manifest.assert_called_once()

    def test_failure_exit_code(self, mocker, sink, scenario_payload):
        """Test exit 2 when a check fails."""
        mocker.patch("app.application.use_cases.run_scenario.run_suite",
                     side_effect=_fake_runner({33: 9.0}, CheckStatus.FAIL))
        outcome = RunScenarioUseCase(sink=sink).execute(ScenarioConfig.model_validate(scenario_payload))
        assert outcome.exit_code == ExitCode.FAILED

    @pytest.mark.parametrize("fine_constant,status", [(1.1, CheckStatus.PASS), (2.0, CheckStatus.FAIL)])
    def test_refinement_adds_stability_records(self, mocker, sink, scenario_payload, fine_constant, status):
        """Test the relative change of constants across two levels."""
        mocker.patch("app.application.use_cases.run_scenario.run_suite",
                     side_effect=_fake_runner({33: 1.0, 65: fine_constant}))
        config = ScenarioConfig.model_validate({**scenario_payload, "refinement": 65})

        outcome = RunScenarioUseCase(sink=sink).execute(config)

        assert [r.suite for r in outcome.results] == ["capacity", "capacity", "stability"]
        stability = outcome.results[-1]
        assert stability.status == status
        assert stability.constant == pytest.approx(fine_constant - 1.0)
        assert stability.params == {"delta": 0.25, "coarse": 33, "fine": 65}
        assert stability.subject == "capacity"


class TestScenarioIntegration:
    """End-to-end runs into a temporary output directory."""

    def test_capacity_scenario(self, tmp_path, scenario_payload):
        """Test a real capacity run on the absorbing interval."""
        config = ScenarioConfig.model_validate({**scenario_payload, "output_dir": str(tmp_path)})

        outcome = RunScenarioUseCase(sink=FileReportSink(tmp_path)).execute(config)

        report = json.loads((tmp_path / "report.json").read_text())
        assert outcome.exit_code == ExitCode.PASSED
        assert report[0]["suite"] == "capacity"
        assert report[0]["status"] == "pass"
        assert (tmp_path / "summary.csv").exists()
        assert json.loads((tmp_path / "manifest.json").read_text())["exit_code"] == 0

    def test_wrong_regime_cell_is_inconclusive(self, tmp_path, scenario_payload):
        """Test that the Sobolev suite on a recurrent delta is recorded, not raised."""
        payload = {**scenario_payload, "deltas": [0.6], "suites": ["sobolev"]}

        outcome = RunScenarioUseCase(sink=FileReportSink(tmp_path)).execute(
            ScenarioConfig.model_validate(payload)
        )

        assert outcome.exit_code == ExitCode.INCONCLUSIVE
        assert outcome.results[0].values["error"] == "WRONG_REGIME"

    @pytest.mark.slow
    def test_report_is_deterministic(self, tmp_path, scenario_payload):
        """Test that two runs write identical report bytes."""
        payload = {**scenario_payload, "suites": ["capacity", "capacitary_strong_type", "isoperimetric"]}
        config = ScenarioConfig.model_validate(payload)

        RunScenarioUseCase(sink=FileReportSink(tmp_path / "a")).execute(config)
        RunScenarioUseCase(sink=FileReportSink(tmp_path / "b")).execute(config)

        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
        assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()

    @pytest.mark.slow
    def test_circle_critical_exponent_run_passes(self, tmp_path):
        """Test that the circle L^1 exponent run at delta 0.8 exits 0."""
        config = ScenarioConfig.model_validate({
            "space": {"kind": "circle", "resolution": 256},
            "deltas": [0.8],
            "ps": [1.0],
            "suites": ["critical_exponent"],
            "output_dir": str(tmp_path),
        })

        outcome = RunScenarioUseCase(sink=FileReportSink(tmp_path)).execute(config)

        report = json.loads((tmp_path / "report.json").read_text())
        assert outcome.exit_code == ExitCode.PASSED
        assert report[0]["suite"] == "critical_exponent"
        assert report[0]["status"] == "pass"
        assert json.loads((tmp_path / "manifest.json").read_text())["exit_code"] == 0
