"""
Geometry Parameters Value Object.

Scaling exponents of a metric measure Dirichlet space together with
where each number came from.
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from app.domain.exceptions import InvariantViolationError, ConfigurationError


class Provenance(str, Enum):
    """Origin of a geometry parameter."""
    ANALYTIC = "analytic"      # known in closed form
    ESTIMATED = "estimated"    # fitted from data by this laboratory
    UNSET = "unset"


@dataclass(frozen=True)
class GeometryParams:
    """
    Value Object holding d_H, d_W and the Hölder exponent kappa.

    Invariants:
    - d_W >= 2 whenever d_W is analytic
    - 0 < kappa < d_W whenever kappa is set
    """
    d_H: Optional[float]
    d_W: Optional[float]
    kappa: Optional[float] = None
    d_H_provenance: Provenance = Provenance.ANALYTIC
    d_W_provenance: Provenance = Provenance.ANALYTIC
    kappa_provenance: Provenance = Provenance.UNSET

    def __post_init__(self):
        if self.d_W_provenance == Provenance.ANALYTIC and self.d_W is not None and self.d_W < 2.0:
            raise InvariantViolationError("GeometryParams", "d_W >= 2", f"d_W={self.d_W}")
        if self.kappa is not None:
            upper = self.d_W if self.d_W is not None else float("inf")
            if not (0.0 < self.kappa < upper):
                raise InvariantViolationError("GeometryParams", "0 < kappa < d_W", f"kappa={self.kappa}")
        if self.kappa is None and self.kappa_provenance != Provenance.UNSET:
            raise InvariantViolationError("GeometryParams", "unset kappa has provenance 'unset'")

    @classmethod
    def unset(cls) -> "GeometryParams":
        """Geometry with no known exponents (raw adjacency input)."""
        return cls(
            d_H=None,
            d_W=None,
            kappa=None,
            d_H_provenance=Provenance.UNSET,
            d_W_provenance=Provenance.UNSET,
        )

    def with_kappa(self, kappa: float, provenance: Provenance = Provenance.ESTIMATED) -> "GeometryParams":
        """Return a copy carrying a kappa value."""
        return replace(self, kappa=float(kappa), kappa_provenance=provenance)

    @property
    def has_kappa(self) -> bool:
        return self.kappa is not None

    def require_dimensions(self) -> tuple[float, float]:
        """Return (d_H, d_W) or raise when either is unknown."""
        if self.d_H is None or self.d_W is None:
            raise ConfigurationError("geometry", "d_H and d_W must be set for this operation")
        return self.d_H, self.d_W

    def require_kappa(self, supplied: Optional[float] = None) -> float:
        """Return the supplied kappa, else the stored one, else raise."""
        if supplied is not None:
            return float(supplied)
        if self.kappa is None:
            raise ConfigurationError("kappa", "kappa is unset and was not supplied")
        return self.kappa

    def critical_exponent_l1(self, delta: float, kappa: Optional[float] = None) -> float:
        """alpha_1^# = min{1, (1 - kappa/d_W)/delta}."""
        _, d_W = self.require_dimensions()
        k = self.require_kappa(kappa)
        return min(1.0, (1.0 - k / d_W) / delta)

    def to_dict(self) -> dict:
        return {
            "d_H": self.d_H,
            "d_W": self.d_W,
            "kappa": self.kappa,
            "provenance": {
                "d_H": self.d_H_provenance.value,
                "d_W": self.d_W_provenance.value,
                "kappa": self.kappa_provenance.value,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GeometryParams":
        provenance = data.get("provenance", {})
        return cls(
            d_H=data.get("d_H"),
            d_W=data.get("d_W"),
            kappa=data.get("kappa"),
            d_H_provenance=Provenance(provenance.get("d_H", "analytic")),
            d_W_provenance=Provenance(provenance.get("d_W", "analytic")),
            kappa_provenance=Provenance(provenance.get("kappa", "unset")),
        )
