"""
Divergent Moment Value Object.

Tagged result returned instead of float infinity when a subordinator
moment does not exist.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class DivergentMoment:
    """The moment of order alpha >= delta is +infinity."""
    delta: float
    t: float
    alpha: float

    @property
    def reason(self) -> str:
        return f"alpha={self.alpha} >= delta={self.delta}"

    def to_dict(self) -> dict:
        return {"divergent": True, "delta": self.delta, "t": self.t, "alpha": self.alpha}

    def __str__(self) -> str:
        return f"divergent moment ({self.reason})"
