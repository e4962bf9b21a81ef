"""Tests for the command line entry point."""
import json
import sys
from pathlib import Path

import pytest

from app.core.exceptions import CliError
from app.log.logging import logger
from app.main import build_parser, main


@pytest.fixture(autouse=True)
def restore_log_sink():
    """main() binds the log sink to the captured stderr of one test."""
    yield
    logger.remove()
    logger.add(sys.__stderr__, level="WARNING")


class TestParser:
    """Tests for argument parsing and usage errors."""

    def test_unknown_flag_exits_one(self, capsys):
        """Test that usage errors map to exit code 1."""
        assert main(["subordinator", "--delta", "0.5", "--t", "1", "--s", "1", "--colour"]) == 1
        assert "unrecognized arguments" in capsys.readouterr().err

    def test_unknown_space(self, capsys):
        """Test that an unknown space kind is refused."""
        assert main(["space", "--space", "torus", "--n", "8"]) == 1
        assert "--space" in capsys.readouterr().err

    def test_size_flags_exclusive(self):
        """Test that --n and --level cannot both be given."""
        with pytest.raises(CliError):
            build_parser().parse_args(["space", "--space", "circle", "--n", "8", "--level", "2"])


class TestCommands:
    """Tests for the subcommands."""

    def test_subordinator_density(self, capsys):
        """Test the closed-form density at delta = 1/2 printed with full precision."""
        assert main(["subordinator", "--delta", "0.5", "--t", "1", "--s", "1"]) == 0
        assert capsys.readouterr().out == "0.21969564473386122\n"

    def test_subordinator_moments(self, capsys):
        """Test finite and divergent moments."""
        assert main(["subordinator", "--delta", "0.5", "--t", "1", "--s", "1", "--alpha", "0.25", "0.5"]) == 0
        lines = capsys.readouterr().out.splitlines()

        assert lines[1].startswith("moment[0.25] ")
        assert float(lines[1].split()[1]) > 0.0
        assert lines[2].startswith("moment[0.5] ")
        assert "diverg" in lines[2].lower()

    def test_space_summary(self, capsys):
        """Test the JSON summary of a gasket level."""
        assert main(["space", "--space", "gasket", "--level", "2"]) == 0
        payload = json.loads(capsys.readouterr().out)

        assert payload["node_count"] == 15
        assert payload["descriptor"]["kind"] == "gasket"
        assert payload["total_mass"] == pytest.approx(1.0)

    def test_kernel_export(self, capsys, tmp_path):
        """Test that the kernel command writes a CSV and prints its path."""
        code = main(["kernel", "--space", "circle", "--n", "16", "--delta", "0.5", "--t", "0.1",
                     "--out", str(tmp_path)])
        path = Path(capsys.readouterr().out.strip())

        assert code == 0
        assert path.exists()
        assert path.suffix == ".csv"
        assert path.parent == tmp_path

    def test_kernel_domain_error(self, capsys, tmp_path):
        """Test that a domain error exits 1 with its code on stderr."""
        code = main(["kernel", "--space", "circle", "--n", "16", "--delta", "1.5", "--t", "0.1",
                     "--out", str(tmp_path)])

        assert code == 1
        assert "[PARAMETER_DOMAIN]" in capsys.readouterr().err

    def test_seminorm_outputs(self, capsys, tmp_path):
        """Test the seminorm table and energy curve."""
        code = main(["seminorm", "--space", "circle", "--n", "64", "--delta", "0.5", "--p", "1",
                     "--alpha", "0.5", "--f", "tent", "--out", str(tmp_path)])
        payload = json.loads(capsys.readouterr().out)

        assert code == 0
        assert payload["function_id"] == "tent"
        assert (tmp_path / "seminorms.csv").exists()
        assert len(list((tmp_path / "curves").glob("*.csv"))) == 1


class TestScenarioCommands:
    """Tests for run and suite."""

    def test_run_empty_suites(self, capsys, tmp_path, scenario_payload):
        """Test that an invalid scenario exits 1 with a field diagnostic."""
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps({**scenario_payload, "suites": []}))

        assert main(["run", str(path)]) == 1
        assert "suites: empty" in capsys.readouterr().err

    def test_run_missing_file(self, capsys, tmp_path):
        """Test that an unreadable scenario exits 1."""
        assert main(["run", str(tmp_path / "absent.json")]) == 1
        assert "Invalid scenario" in capsys.readouterr().err

    def test_run_scenario(self, capsys, tmp_path, scenario_payload):
        """Test a capacity scenario with the output directory overridden."""
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(scenario_payload))

        code = main(["run", str(path), "--out", str(tmp_path / "out")])
        payload = json.loads(capsys.readouterr().out)

        assert code == 0
        assert payload["counts"]["pass"] == 1
        assert (tmp_path / "out" / "report.json").exists()

    def test_suite_wrong_regime(self, capsys, tmp_path):
        """Test that a check outside its regime exits 3."""
        code = main(["suite", "linfty", "--space", "circle", "--n", "32", "--delta", "0.3",
                     "--out", str(tmp_path)])

        assert code == 3
        assert json.loads(capsys.readouterr().out)["counts"]["inconclusive"] == 1

    def test_suite_invalid_delta(self, capsys, tmp_path):
        """Test that suite parameters go through scenario validation."""
        code = main(["suite", "capacity", "--space", "interval", "--n", "33", "--boundary", "absorbing",
                     "--delta", "1.0", "--out", str(tmp_path)])

        assert code == 1
        assert "deltas:" in capsys.readouterr().err
