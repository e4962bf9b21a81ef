"""
Value Objects - Immutable domain primitives.

Value objects are defined by their attributes rather than identity.
They are immutable and equality is based on all attributes.
"""
from app.domain.value_objects.geometry import GeometryParams, Provenance
from app.domain.value_objects.space_kind import SpaceKind, BoundaryMode
from app.domain.value_objects.divergent_moment import DivergentMoment
from app.domain.value_objects.resolved_window import ResolvedWindow

__all__ = [
    "GeometryParams",
    "Provenance",
    "SpaceKind",
    "BoundaryMode",
    "DivergentMoment",
    "ResolvedWindow",
]
