"""
Scenario configuration schema.

One JSON document describes one reproducible experiment: the space, the
parameter lists, the time grid, the test functions and the suites to run.
"""
import hashlib
from enum import Enum
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.core.config import settings
from app.schemas.space_descriptor import SpaceDescriptor
from app.services.families import FunctionKind


class SuiteName(str, Enum):
    CRITICAL_EXPONENT = "critical_exponent"
    WEAK_BE = "weak_be"
    COAREA = "coarea"
    PSEUDO_POINCARE = "pseudo_poincare"
    SOBOLEV = "sobolev"
    ISOPERIMETRIC = "isoperimetric"
    LINFTY = "linfty"
    LP_SMOOTHING = "lp_smoothing"
    LINF_SMOOTHING = "linf_smoothing"
    CAPACITY = "capacity"
    CAPACITY_SOBOLEV = "capacity_sobolev"
    CAPACITARY_STRONG_TYPE = "capacitary_strong_type"
    BV_CHARACTERIZATION = "bv_characterization"
    KERNEL_BOUNDS = "kernel_bounds"
    EQUIVALENCE = "equivalence"


class TimeGridSpec(BaseModel):
    """Log-spaced grid over the resolved window scaled by the multipliers."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    lower_multiplier: float = Field(default=1.0, gt=0)
    upper_multiplier: float = Field(default=1.0, gt=0)
    count: int = Field(default=settings.default_t_grid_count, ge=8)


class FunctionSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: FunctionKind
    name: Optional[str] = None
    center: Optional[int] = Field(default=None, ge=0)
    radius: float = Field(default=0.25, gt=0, lt=1)
    mode: int = Field(default=1, ge=1)
    hurst: Optional[float] = Field(default=None, gt=0, lt=1)
    seed: Optional[int] = None

    @property
    def function_id(self) -> str:
        return self.name or self.kind.value


def _nonempty(values: list) -> list:
    if not values:
        raise ValueError("empty")
    return values


class ScenarioConfig(BaseModel):
    """
    Model for a declarative experiment.

    refinement names a second, finer resolution; when set every suite runs
    at both levels and its constants are compared.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    space: SpaceDescriptor
    refinement: Optional[int] = Field(default=None, gt=0)
    deltas: list[float]
    ps: list[float] = [1.0]
    alphas: Optional[list[float]] = None
    kappa: Optional[float] = Field(default=None, gt=0)
    t_grid: Optional[TimeGridSpec] = None
    family: Literal["canonical"] | list[FunctionSpec] = "canonical"
    suites: list[SuiteName]
    output_dir: str = "out"
    seed: int = settings.default_seed

    @field_validator("deltas", "ps", "suites")
    @classmethod
    def _lists_nonempty(cls, values: list) -> list:
        return _nonempty(values)

    @field_validator("deltas")
    @classmethod
    def _deltas_open_unit(cls, values: list[float]) -> list[float]:
        for delta in values:
            if not 0.0 < delta < 1.0:
                raise ValueError(f"{delta!r} outside (0, 1)")
        return values

    @field_validator("ps")
    @classmethod
    def _ps_at_least_one(cls, values: list[float]) -> list[float]:
        for p in values:
            if p < 1.0:
                raise ValueError(f"{p!r} below 1")
        return values

    @field_validator("alphas")
    @classmethod
    def _alphas_positive(cls, values: Optional[list[float]]) -> Optional[list[float]]:
        if values is None:
            return values
        _nonempty(values)
        for alpha in values:
            if alpha <= 0:
                raise ValueError(f"{alpha!r} not positive")
        return values

    @field_validator("family")
    @classmethod
    def _family_nonempty(cls, value):
        if isinstance(value, list):
            _nonempty(value)
            ids = [spec.function_id for spec in value]
            if len(set(ids)) != len(ids):
                raise ValueError("duplicate function names")
        return value

    @model_validator(mode="after")
    def _refinement_is_finer(self) -> "ScenarioConfig":
        if self.refinement is not None and self.refinement <= self.space.resolution:
            raise ValueError(f"refinement: {self.refinement} is not finer than {self.space.resolution}")
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioConfig":
        return cls.model_validate_json(Path(path).read_text())

    def config_hash(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()


def validation_diagnostic(error: ValidationError) -> str:
    """One 'field: message' line per error, e.g. 'suites: empty'."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        message = item["msg"].removeprefix("Value error, ")
        if not item["loc"] and ": " in message:
            lines.append(message)
        else:
            lines.append(f"{location}: {message}")
    return "\n".join(lines)
