"""
Domain Layer - Core numerical objects and rules.

This layer contains:
- Entities: spaces, spectral decompositions, kernels, energy curves, reports
- Value Objects: geometry parameters, space kinds, resolved windows
- Exceptions: typed errors for violated preconditions and invariants
- Ports: the report sink contract
"""
