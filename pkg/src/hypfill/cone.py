"""The infinite hyperbolic cone over a finite metric space.

Points are (base point, positive scale) pairs; the metric is
2 log((d(x, y) + max(s, t)) / sqrt(s t)) in natural logarithms.  Conversions
to other log bases happen at call sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonpositiveScale
from .spaces import FiniteMetricSpace


@dataclass(frozen=True)
class ConePoint:
    point: int
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise NonpositiveScale(f"cone scale must be positive, got {self.scale}")


def cone_distance(space: FiniteMetricSpace, p: ConePoint, q: ConePoint) -> float:
    """rho(p, q) = 2 log((d(x, y) + max(s, t)) / sqrt(s t)).

    Symmetric, zero exactly iff p = q.  On a shared base point this reduces
    to |log s - log t| (vertical scaling), computed in that closed form so
    the identity is exact.
    """
    if not (p.scale > 0 and q.scale > 0):
        raise NonpositiveScale("cone scales must be positive")
    if p.point == q.point:
        return abs(math.log(p.scale) - math.log(q.scale))
    d = space.distance(p.point, q.point)
    s, t = p.scale, q.scale
    return 2.0 * math.log((d + max(s, t)) / math.sqrt(s * t))
