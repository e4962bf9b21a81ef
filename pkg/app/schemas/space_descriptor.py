"""
Space descriptor schema.

JSON form of a space: which builder, at which resolution, with which
boundary and geometry. Rebuilding from a descriptor reproduces the graph.
"""
from dataclasses import replace
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.domain.entities import MetricMeasureGraph
from app.domain.value_objects import BoundaryMode, GeometryParams, SpaceKind
from app.services.space import build_space, load_adjacency


class SpaceDescriptor(BaseModel):
    """
    Model describing a space.

    resolution is the level for fractal builders and the node count
    otherwise. Adjacency spaces also carry the path of their edge list.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SpaceKind
    resolution: int = Field(gt=0)
    boundary_mode: BoundaryMode = BoundaryMode.NONE
    geometry: Optional[dict] = None
    path: Optional[str] = None

    @model_validator(mode="after")
    def _adjacency_needs_path(self) -> "SpaceDescriptor":
        if self.kind == SpaceKind.ADJACENCY and not self.path:
            raise ValueError("path: required for adjacency spaces")
        if self.boundary_mode != BoundaryMode.NONE and self.kind != SpaceKind.INTERVAL:
            raise ValueError(f"boundary_mode: only the interval accepts '{self.boundary_mode.value}'")
        return self


def space_descriptor(graph: MetricMeasureGraph, path: Optional[str] = None) -> SpaceDescriptor:
    return SpaceDescriptor(
        kind=graph.kind,
        resolution=graph.resolution,
        boundary_mode=graph.boundary_mode,
        geometry=graph.geometry.to_dict(),
        path=path,
    )


def from_descriptor(descriptor: SpaceDescriptor) -> MetricMeasureGraph:
    """Build the graph a descriptor names; a stored geometry replaces the builder's."""
    if descriptor.kind == SpaceKind.ADJACENCY:
        graph = load_adjacency(descriptor.path)
    else:
        graph = build_space(descriptor.kind, descriptor.resolution, descriptor.boundary_mode)
    if descriptor.geometry is not None:
        geometry = GeometryParams.from_dict(descriptor.geometry)
        if geometry != graph.geometry:
            graph = replace(graph, geometry=geometry)
    return graph
