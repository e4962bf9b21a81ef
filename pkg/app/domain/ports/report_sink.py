"""
Report Sink Port Interface.

Define the contract for persisting laboratory output.
Implementations decide where reports, manifests and tables end up.
"""
from abc import ABC, abstractmethod
from typing import Any, Sequence

from app.domain.entities import KernelMatrix


class ReportSink(ABC):
    """
    Interface for report persistence.

    All writes must be deterministic: the same records produce the same
    bytes. Only the manifest may carry wall-clock data.
    """

    @abstractmethod
    def write_report(self, records: Sequence[dict]) -> str:
        """
        Persist the list of check records.

        Args:
            records: JSON-safe dictionaries, already in deterministic order

        Returns:
            Location of the written report
        """
        pass

    @abstractmethod
    def write_manifest(self, manifest: dict) -> str:
        """Persist run metadata (config hash, versions, timestamp)."""
        pass

    @abstractmethod
    def write_curve_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
        """Persist one energy curve or time series as CSV."""
        pass

    @abstractmethod
    def write_table_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
        """Persist a summary table as CSV."""
        pass

    @abstractmethod
    def write_kernel(self, name: str, kernel: KernelMatrix, binary: bool = False) -> str:
        """
        Persist a kernel matrix.

        Args:
            name: File stem
            kernel: Kernel to export
            binary: Column-major binary dump instead of (row, col, value) CSV

        Returns:
            Location of the written file
        """
        pass
