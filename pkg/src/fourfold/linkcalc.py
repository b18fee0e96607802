"""Linking numbers in RP^3 via the double cover S^3 and signed crossings.

An RP^3 curve is held as a closed S^3 polyline with an antipodal-closure
flag.  Its full preimage under S^3 -> RP^3 is one double-length loop (flag
set) or two antipodal loops (flag clear), and

    lk_RP3(A, B) = 1/2 * lk_S3(lift A, lift B),

well defined whenever A is zero homologous over Z (true for every fourfold
pushoff, whose total class is four times the base).  lk_S3 itself uses
stereographic projection from a random pole followed by a signed crossing
count over a random planar view; all trials must agree.

Sign convention (fixed, documented): the chart rotation onto the projection
pole has det +1, the planar view is a det +1 rotation of R^3, and a crossing
counts +1 when the under-strand crosses the over-strand from right to left
seen along the over-strand (right-handed convention).  Under this pinning
the standard Hopf pair (cos s, sin s, 0, 0), (0, 0, cos s, sin s) has
linking number +1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .config import TraceConfig
from .errors import Disagreement, NotNullHomologous, ProjectionDegenerate
from .geom import random_rotation, rotation_from_pole
from .model import CurveComponent, Rp3Loop


@dataclass
class SphereLink:
    """Disjoint closed polylines on S^3 (no antipodal identification left)."""

    loops: list

    def point_count(self):
        return sum(len(l) for l in self.loops)


@dataclass
class LinkingResult:
    value: Fraction
    projections_used: int
    agreement: bool


@dataclass
class InvariantReport:
    per_component: list  # (component id, pushoff component count, T value)
    total: int
    total_mod8: int
    diagnostics: dict = field(default_factory=dict)


def _as_rp3_loop(curve):
    if isinstance(curve, Rp3Loop):
        return [curve]
    if isinstance(curve, CurveComponent):
        return [Rp3Loop(points=curve.positions(), antipodal=curve.antipodal_closure)]
    if isinstance(curve, (list, tuple)):
        out = []
        for c in curve:
            out.extend(_as_rp3_loop(c))
        return out
    # PushoffCurve quacks via .loops
    if hasattr(curve, "loops"):
        return list(curve.loops)
    raise TypeError(f"cannot interpret {type(curve).__name__} as an RP^3 curve")


def lift_to_sphere(curve):
    """Full preimage under S^3 -> RP^3 of a curve given by unit representatives.

    A loop with antipodal closure lifts to a single loop of twice the length
    (the path followed by its antipodal copy); a loop already closed on S^3
    lifts to two disjoint antipodal loops.
    """
    loops = []
    for rp in _as_rp3_loop(curve):
        P = np.asarray(rp.points, dtype=float)
        if rp.antipodal:
            loops.append(np.vstack([P, -P]))
        else:
            loops.append(P)
            loops.append(-P)
    return SphereLink(loops=loops)


class _Resample(Exception):
    pass


def _segments(loop):
    a = loop
    b = np.roll(loop, -1, axis=0)
    return a, b


def _crossing_sum(A2, Az, B2, Bz):
    """Sum of right-handed crossing signs between two projected closed loops."""
    a0, a1 = _segments(A2)
    az0, az1 = _segments(Az)
    b0, b1 = _segments(B2)
    bz0, bz1 = _segments(Bz)
    total = 0
    chunk = max(1, int(4e6 / max(len(b0), 1)))
    scale = max(np.abs(A2).max(), np.abs(B2).max(), 1.0)
    tiny = 1e-13 * scale * scale
    for lo in range(0, len(a0), chunk):
        hi = min(lo + chunk, len(a0))
        pa0 = a0[lo:hi, None, :]
        pa1 = a1[lo:hi, None, :]
        da = pa1 - pa0
        db = (b1 - b0)[None, :, :]
        r0 = b0[None, :, :] - pa0
        r1 = b1[None, :, :] - pa0
        d1 = da[..., 0] * r0[..., 1] - da[..., 1] * r0[..., 0]
        d2 = da[..., 0] * r1[..., 1] - da[..., 1] * r1[..., 0]
        s0 = pa0 - b0[None, :, :]
        s1 = pa1 - b0[None, :, :]
        d3 = db[..., 0] * s0[..., 1] - db[..., 1] * s0[..., 0]
        d4 = db[..., 0] * s1[..., 1] - db[..., 1] * s1[..., 0]
        proper = (d1 * d2 < 0) & (d3 * d4 < 0)
        grazing = (
            (np.minimum(np.abs(d1), np.abs(d2)) < tiny)
            | (np.minimum(np.abs(d3), np.abs(d4)) < tiny)
        ) & (d1 * d2 < tiny) & (d3 * d4 < tiny)
        if grazing.any():
            raise _Resample
        if not proper.any():
            continue
        ia, ib = np.nonzero(proper)
        ta = d3[ia, ib] / (d3[ia, ib] - d4[ia, ib])
        tb = d1[ia, ib] / (d1[ia, ib] - d2[ia, ib])
        za = az0[lo + ia] + ta * (az1[lo + ia] - az0[lo + ia])
        zb = bz0[ib] + tb * (bz1[ib] - bz0[ib])
        if (np.abs(za - zb) < 1e-12 * scale).any():
            raise _Resample
        cross_dir = np.sign(
            da[ia, 0, 0] * db[0, ib, 1] - da[ia, 0, 1] * db[0, ib, 0]
        )
        sign = np.where(za > zb, cross_dir, -cross_dir)
        total += int(np.sum(sign))
    return total


def _lk_trial(A: SphereLink, B: SphereLink, rng):
    pts = np.vstack(A.loops + B.loops)
    for _ in range(50):
        pole = rng.standard_normal(4)
        pole /= np.linalg.norm(pole)
        if np.abs(pts @ pole).max() < 0.99:
            break
    else:
        raise ProjectionDegenerate("no stereographic pole clears the link")
    Q = rotation_from_pole(pole)
    R3 = random_rotation(3, rng)

    def project(loop):
        y = loop @ Q.T
        p3 = y[:, :3] / (1.0 - y[:, 3])[:, None]
        p3 = p3 @ R3.T
        return p3[:, :2], p3[:, 2]

    projA = [project(l) for l in A.loops]
    projB = [project(l) for l in B.loops]
    total = 0
    for A2, Az in projA:
        for B2, Bz in projB:
            total += _crossing_sum(A2, Az, B2, Bz)
    if total % 2 != 0:
        raise _Resample  # a grazing pass slipped through; try another view
    return total // 2


def lk_s3(A: SphereLink, B: SphereLink, cfg: TraceConfig, rng):
    """Linking number on S^3, repeated over independent projections.

    Every trial must agree; grazing configurations are resampled internally
    and persistent failure raises ProjectionDegenerate.
    """
    values = []
    for _ in range(cfg.projections):
        for _ in range(50):
            try:
                values.append(_lk_trial(A, B, rng))
                break
            except _Resample:
                continue
        else:
            raise ProjectionDegenerate("could not find a clean projection")
    if len(set(values)) != 1:
        raise Disagreement(f"linking trials disagree: {values}")
    return values[0]


def rp3_class(curve):
    """Total class of a curve (sum of its loops) in H_1(RP^3) = Z/2."""
    return sum(l.rp3_class() for l in _as_rp3_loop(curve)) % 2


def lk_rp3(A, B, cfg: TraceConfig, rng):
    """RP^3 linking number as half the S^3 linking number of full preimages.

    Requires A zero homologous over the integers; a fourfold pushoff always
    is (its class is four times the base component's).  The result then is an
    integer; in general a half-integer can occur and is returned exactly.
    """
    class_a = rp3_class(A)
    if class_a != 0:
        raise NotNullHomologous("first argument carries the nontrivial RP^3 class")
    raw = lk_s3(lift_to_sphere(A), lift_to_sphere(B), cfg, rng)
    value = Fraction(raw, 2)
    if value.denominator != 1:
        # zero-homologous first argument must give an even S^3 count
        raise Disagreement("odd double-cover crossing count for a null-homologous link")
    return LinkingResult(value=value, projections_used=cfg.projections, agreement=True)


def lk_rp3_halfinteger(A, B, cfg: TraceConfig, rng):
    """Linking of possibly non-null-homologous curves; denominator 1 or 2."""
    raw = lk_s3(lift_to_sphere(A), lift_to_sphere(B), cfg, rng)
    return LinkingResult(
        value=Fraction(raw, 2), projections_used=cfg.projections, agreement=True
    )


def component_T(comp: CurveComponent, pushoff, cfg: TraceConfig, rng):
    """T(C) = lk_RP3(P(C), C); pushoff orientation inherited from the base."""
    result = lk_rp3(pushoff, comp, cfg, rng)
    return result.value


def invariant(components, pushoffs, values, diagnostics=None):
    """Assemble the report: per-component T, the total, and the total mod 8."""
    per = []
    total = Fraction(0)
    for comp, pc, val in zip(components, pushoffs, values):
        per.append((comp.id, pc.component_count, val))
        total += val
    if total.denominator != 1:
        raise Disagreement("total invariant is not an integer")
    total = int(total)
    return InvariantReport(
        per_component=per,
        total=total,
        total_mod8=total % 8,
        diagnostics=diagnostics or {},
    )
