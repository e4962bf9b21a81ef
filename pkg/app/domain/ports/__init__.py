"""
Ports - Interfaces for external adapters.

The only outward-facing concern of the laboratory is report output; the
numerical core never touches the filesystem directly.
"""
from app.domain.ports.report_sink import ReportSink

__all__ = [
    "ReportSink",
]
