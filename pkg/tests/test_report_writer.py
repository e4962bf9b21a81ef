"""Tests for the file report sink."""
import csv
import json
import struct
from pathlib import Path

import numpy as np
import pytest

from app.infrastructure.report_writer import FileReportSink, dump_json, format_cell
from app.services.spectral import KERNEL_CSV_HEADER, heat_kernel, read_kernel_binary


class TestFormatting:
    """Tests for cell and JSON formatting."""

    @pytest.mark.parametrize("value,expected", [
        (0.1, "0.10000000000000001"),
        (np.float64(0.5), "0.5"),
        (True, "true"),
        (3, "3"),
        ("tent", "tent"),
    ])
    def test_format_cell(self, value, expected):
        """Test that floats keep 17 significant digits."""
        assert format_cell(value) == expected

    def test_float_cells_round_trip(self):
        """Test that the CSV text parses back to the same double."""
        value = 1.0 / 3.0
        assert float(format_cell(value)) == value

    def test_dump_json_sorted(self):
        """Test sorted keys and a trailing newline."""
        text = dump_json({"b": 1, "a": np.float64(0.5)})

        assert text.endswith("\n")
        assert list(json.loads(text)) == ["a", "b"]

    def test_dump_json_nonfinite_as_null(self):
        """Test that infinities become null rather than invalid JSON."""
        assert json.loads(dump_json({"c": float("inf")}))["c"] is None


class TestFileReportSink:
    """Tests for the directory layout of a sink."""

    def test_report_and_manifest(self, tmp_path):
        """Test report.json and manifest.json at the root."""
        sink = FileReportSink(tmp_path / "run")

        report = sink.write_report([{"suite": "capacity", "status": "pass"}])
        manifest = sink.write_manifest({"exit_code": 0})

        assert report == str(tmp_path / "run" / "report.json")
        assert json.loads((tmp_path / "run" / "report.json").read_text())[0]["suite"] == "capacity"
        assert manifest == str(tmp_path / "run" / "manifest.json")

    def test_curve_csv_under_curves(self, tmp_path):
        """Test the curves/ folder and unsafe characters in names."""
        sink = FileReportSink(tmp_path)
        path = sink.write_curve_csv("circle(n=64)_coarea tent", ("t", "value"), [(0.1, 2.0)])

        assert path == str(tmp_path / "curves" / "circle_n=64__coarea_tent.csv")
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows == [["t", "value"], ["0.10000000000000001", "2"]]

    def test_kernel_csv(self, tmp_path, circle_spec):
        """Test the kernel CSV header and row count."""
        path = FileReportSink(tmp_path).write_kernel("heat", heat_kernel(circle_spec, 0.05))

        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        assert tuple(rows[0]) == tuple(KERNEL_CSV_HEADER)
        assert len(rows) == 1 + 64 * 64

    def test_kernel_binary(self, tmp_path, circle_spec):
        """Test that the binary dump reads back."""
        kernel = heat_kernel(circle_spec, 0.05)
        path = FileReportSink(tmp_path).write_kernel("heat", kernel, binary=True)

        n, t, _, entries = read_kernel_binary(Path(path).read_bytes())

        assert path.endswith("heat.bin")
        assert (n, t) == (64, 0.05)
        assert np.array_equal(entries, kernel.entries)

    def test_kernel_binary_header_size(self, tmp_path, circle_spec):
        """Test the 24-byte header followed by column-major float64 entries."""
        kernel = heat_kernel(circle_spec, 0.05)
        data = Path(FileReportSink(tmp_path).write_kernel("heat", kernel, binary=True)).read_bytes()

        assert len(data) == 24 + 8 * 64 * 64
        assert struct.unpack_from("<q", data, 0) == (64,)
        assert np.frombuffer(data, dtype="<f8", offset=24)[1] == kernel.entries[1, 0]
