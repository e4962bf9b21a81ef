"""
File Report Sink Implementation.

Implements the ReportSink interface on a local output directory.
"""
import csv
import json
import re
from pathlib import Path
from typing import Any, Sequence

from app.domain.entities import KernelMatrix, json_safe
from app.domain.ports import ReportSink
from app.log.logging import logger
from app.services.spectral import KERNEL_CSV_HEADER, kernel_binary, kernel_csv_rows

_UNSAFE = re.compile(r"[^A-Za-z0-9._=-]+")


def format_cell(value: Any) -> str:
    """Floats with 17 significant digits, everything else as str."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "dtype") and value.dtype.kind == "f":
        return format(float(value), ".17g")
    return str(value)


def dump_json(payload: Any) -> str:
    return json.dumps(json_safe(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


class FileReportSink(ReportSink):
    """
    Directory-backed implementation of the ReportSink.

    report.json and manifest.json sit at the top of the directory, curves
    under curves/, tables and kernels next to the report.
    """

    def __init__(self, output_dir: str | Path):
        self._root = Path(output_dir)

    @property
    def root(self) -> Path:
        return self._root

    def _path(self, name: str, suffix: str, subdir: str = "") -> Path:
        folder = self._root / subdir if subdir else self._root
        folder.mkdir(parents=True, exist_ok=True)
        return folder / f"{_UNSAFE.sub('_', name)}{suffix}"

    def _write_csv(self, path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_cell(cell) for cell in row])
        logger.debug(f"Wrote {path}", event_type="CSV_WRITTEN", path=str(path), rows=len(rows))
        return str(path)

    def write_report(self, records: Sequence[dict]) -> str:
        path = self._path("report", ".json")
        path.write_text(dump_json(list(records)))
        logger.info(f"Wrote {path}", event_type="REPORT_WRITTEN", path=str(path), records=len(records))
        return str(path)

    def write_manifest(self, manifest: dict) -> str:
        path = self._path("manifest", ".json")
        path.write_text(dump_json(manifest))
        return str(path)

    def write_curve_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
        return self._write_csv(self._path(name, ".csv", "curves"), header, rows)

    def write_table_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
        return self._write_csv(self._path(name, ".csv"), header, rows)

    def write_kernel(self, name: str, kernel: KernelMatrix, binary: bool = False) -> str:
        """
        Write a kernel as CSV (row, col, value, row_integral) or as binary.

        Binary layout, little-endian: a 24-byte header of three 8-byte
        fields (int64 node_count, float64 t, float64 delta) followed by
        node_count^2 float64 entries in column-major order.
        """
        if binary:
            path = self._path(name, ".bin")
            path.write_bytes(kernel_binary(kernel))
            logger.debug(f"Wrote {path}", event_type="KERNEL_WRITTEN", path=str(path), node_count=kernel.node_count)
            return str(path)
        return self._write_csv(self._path(name, ".csv"), KERNEL_CSV_HEADER, kernel_csv_rows(kernel))
