"""
Infrastructure Layer - Technical implementations.

This layer contains:
- Report Sink: files in an output directory (JSON reports, CSV tables, kernel dumps)
- Container: composition root wiring the sink and the worker pool
"""
