"""
Application Layer - Use Cases.

Runs scenarios: builds the space at each resolution, dispatches the
suites through the registry and hands the records to a report sink.
"""
