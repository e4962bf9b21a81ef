from app.schemas.space_descriptor import SpaceDescriptor, space_descriptor, from_descriptor
from app.schemas.scenario import (
    FunctionSpec,
    ScenarioConfig,
    SuiteName,
    TimeGridSpec,
    validation_diagnostic,
)

__all__ = [
    "SpaceDescriptor",
    "space_descriptor",
    "from_descriptor",
    "FunctionSpec",
    "ScenarioConfig",
    "SuiteName",
    "TimeGridSpec",
    "validation_diagnostic",
]
