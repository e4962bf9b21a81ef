"""
Space Kind Value Objects.

Enumerations naming the available space builders and boundary behaviour.
"""
from enum import Enum


class SpaceKind(str, Enum):
    """Known space builders."""
    CIRCLE = "circle"
    INTERVAL = "interval"
    GASKET = "gasket"
    VICSEK = "vicsek"
    ADJACENCY = "adjacency"     # raw loader, no geometry guarantees

    @property
    def uses_level(self) -> bool:
        """Fractal builders are parametrized by level, the others by node count."""
        return self in (SpaceKind.GASKET, SpaceKind.VICSEK)


class BoundaryMode(str, Enum):
    """Boundary behaviour of the interval builder."""
    ABSORBING = "absorbing"
    REFLECTING = "reflecting"
    NONE = "none"
