"""Shared domain types for curve tracing, framing, and linking."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class PointClass(Enum):
    REAL_CROSSING = "REAL_CROSSING"
    SOLITARY = "SOLITARY"
    UMBRELLA = "UMBRELLA"
    TRIPLE = "TRIPLE"
    UNSET = "UNSET"


@dataclass
class CurvePoint:
    """Curve sample with an orthonormal frame (pos, tangent, n1, n2)."""

    pos: np.ndarray
    tangent: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    quad: object = None  # NormalQuadForm, filled by the framing pass
    cls: PointClass = PointClass.UNSET


@dataclass
class Special:
    """Marked point between/at samples: Whitney umbrella or triple point."""

    index: int  # sample index the marker is attached to
    kind: PointClass
    position: np.ndarray


@dataclass
class CurveComponent:
    """Closed traced loop; last sample connects to the first (or its antipode)."""

    id: int
    points: list[CurvePoint]
    antipodal_closure: bool
    specials: list[Special] = field(default_factory=list)

    def positions(self):
        return np.stack([p.pos for p in self.points])

    def arc_length(self):
        P = self.positions()
        closing = -P[0] if self.antipodal_closure else P[0]
        Q = np.vstack([P, closing])
        return float(np.sum(np.linalg.norm(np.diff(Q, axis=0), axis=1)))

    def umbrella_count(self):
        return sum(1 for s in self.specials if s.kind is PointClass.UMBRELLA)

    def triple_count(self):
        return sum(1 for s in self.specials if s.kind is PointClass.TRIPLE)


@dataclass
class Rp3Loop:
    """Closed polyline in RP^3 held as unit S^3 representatives.

    ``antipodal`` means the polyline closes at the antipode of its first
    vertex; otherwise it closes on S^3 itself.
    """

    points: np.ndarray
    antipodal: bool

    def rp3_class(self):
        """Class in H_1(RP^3) = Z/2."""
        return 1 if self.antipodal else 0
