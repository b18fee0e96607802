"""Normal quadratic forms along the curve, arc classification, eigenframe
transport, and construction of the fourfold pushoff.

The form at a curve point is the degree-2 truncation of the surface equation
restricted to the plane normal to the curve inside the tangent space of RP^3,
expressed in the orthonormal basis (n1, n2) of the round metric; the stored
matrix is half the restricted Hessian.  Classification uses only det(q) and
the eigenvalue product, both invariant under q -> -q, so odd-degree chart
lifts need no special casing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TraceConfig
from .curvetrace import as_jet, project_to_curve
from .errors import ContinuityLoss, EpsilonTooLarge, NearGamma
from .geom import cross4, project_orthogonal, unit
from .model import CurveComponent, CurvePoint, PointClass, Rp3Loop, Special


@dataclass
class NormalQuadForm:
    """2x2 symmetric coefficient matrix with its eigen-data.

    eigvals are ordered λ1 >= λ2 at construction; downstream transport orders
    axes by continuity instead.
    """

    q: np.ndarray
    eigvals: tuple
    eigvecs: np.ndarray  # columns are unit eigenvectors matching eigvals

    @property
    def det(self):
        return float(np.linalg.det(self.q))

    @property
    def norm(self):
        return float(np.linalg.norm(self.q))

    @property
    def anisotropy(self):
        """||q - (tr q / 2) I|| / ||q||; zero exactly on multiples of I."""
        n = self.norm
        if n == 0.0:
            return 0.0
        b = 0.5 * (self.q[0, 0] - self.q[1, 1])
        c = self.q[0, 1]
        return float(np.sqrt(2.0 * (b * b + c * c)) / n)

    def traceless_angle(self):
        """(atan2 angle, magnitude) of the traceless part (b, c).

        Eigen-axes of q sit at half this angle and half-angle + 90 degrees.
        """
        b = 0.5 * (self.q[0, 0] - self.q[1, 1])
        c = self.q[0, 1]
        return float(np.arctan2(c, b)), float(np.hypot(b, c))


def form_from_matrix(q):
    q = np.asarray(q, dtype=float)
    q = 0.5 * (q + q.T)
    w, V = np.linalg.eigh(q)  # ascending
    return NormalQuadForm(
        q=q, eigvals=(float(w[1]), float(w[0])), eigvecs=V[:, [1, 0]]
    )


def quad_form_at(F, pt: CurvePoint):
    """q[i][j] = 1/2 n_i^T Hess(F) n_j in the point's orthonormal normal basis.

    The jet evaluates a coefficient-rescaled copy of F for numerics; the form
    is reported at the true scale of F (classification would not care, but
    the contract and the eigenvalues should match the input polynomial).
    """
    jet = as_jet(F)
    H = jet.coef_scale * jet.hess(pt.pos)
    N = np.column_stack([pt.n1, pt.n2])
    return form_from_matrix(0.5 * (N.T @ H @ N))


def fill_quads(F, comp: CurveComponent):
    jet = as_jet(F)
    for pt in comp.points:
        if pt.quad is None:
            pt.quad = quad_form_at(jet, pt)
    return comp


def classify(nq: NormalQuadForm, cfg: TraceConfig):
    """Point classification from the sign of det(q).

    det < 0 -> two real sheets (REAL_CROSSING); det > 0 -> two complex
    conjugate sheets (SOLITARY); |det| below tolerance -> UMBRELLA candidate.
    A solitary form that is nearly a multiple of the identity has no usable
    eigen-axes: the invariant is undefined there and NearGamma is raised.
    """
    d = nq.det
    scale = nq.norm**2
    if abs(d) <= cfg.umbrella_tol * scale:
        return PointClass.UMBRELLA
    if d < 0:
        return PointClass.REAL_CROSSING
    if nq.anisotropy < cfg.gamma_tol:
        raise NearGamma("normal form is nearly isotropic on a solitary arc")
    return PointClass.SOLITARY


def _frame_degenerate(nq: NormalQuadForm, norm_floor, cfg):
    _, mag = nq.traceless_angle()
    return mag == 0.0 or nq.norm <= norm_floor or nq.anisotropy < 10.0 * cfg.gamma_tol


def _norm_floor(comp):
    norms = np.array([pt.quad.norm for pt in comp.points])
    positive = norms[norms > 0]
    return 1e-5 * float(np.median(positive)) if len(positive) else 0.0


def anchor_degenerate(comp: CurveComponent, cfg: TraceConfig):
    """True when the first samples cannot anchor the eigenframe transport."""
    floor = _norm_floor(comp)
    return any(_frame_degenerate(comp.points[k].quad, floor, cfg) for k in (0, 1))


def best_anchor_index(comp: CurveComponent, cfg: TraceConfig):
    """Sample index with the cleanest eigen-structure, for re-anchoring."""
    floor = _norm_floor(comp)
    best, best_score = 0, -1.0
    for k, pt in enumerate(comp.points):
        nq = pt.quad
        score = 0.0 if nq.norm <= floor else nq.anisotropy * min(nq.norm / (10 * floor + 1e-300), 1.0)
        if score > best_score:
            best, best_score = k, score
    return best


def _neighbors(i, n):
    return (i - 1) % n, (i + 1) % n


def classify_component(F, comp: CurveComponent, cfg: TraceConfig):
    """Fill classes along the loop and refine umbrella positions by bisection.

    The per-sample gamma test is windowed: an isolated isotropic touch whose
    traceless part reverses transversally (the axis pair extends continuously
    through it) is tolerated, while near-isotropy sustained over consecutive
    samples, or a non-transversal dip, aborts with NearGamma.
    """
    jet = as_jet(F)
    fill_quads(jet, comp)
    n = len(comp.points)
    triple_idx = {s.index for s in comp.specials if s.kind is PointClass.TRIPLE}
    forms = [pt.quad for pt in comp.points]
    dets = np.array([f.det for f in forms])
    scales = np.array([max(f.norm**2, 1e-300) for f in forms])
    for i, pt in enumerate(comp.points):
        if i in triple_idx:
            pt.cls = PointClass.TRIPLE
        elif abs(dets[i]) <= cfg.umbrella_tol * scales[i]:
            pt.cls = PointClass.UMBRELLA
        elif dets[i] < 0:
            pt.cls = PointClass.REAL_CROSSING
        else:
            pt.cls = PointClass.SOLITARY
    aniso = np.array([f.anisotropy for f in forms])
    for i, pt in enumerate(comp.points):
        if pt.cls is not PointClass.SOLITARY or aniso[i] >= cfg.gamma_tol:
            continue
        im, ip = _neighbors(i, n)
        sustained = aniso[im] < cfg.gamma_tol or aniso[ip] < cfg.gamma_tol
        ang_m, mag_m = forms[im].traceless_angle()
        ang_p, mag_p = forms[ip].traceless_angle()
        reversal = mag_m > 0 and mag_p > 0 and np.cos(ang_m - ang_p) < -0.5
        if sustained or not reversal:
            raise NearGamma(
                "parametrization too close to the gamma discriminant",
                point=pt.pos,
            )
    for i in range(n):
        j = (i + 1) % n
        if i in triple_idx or j in triple_idx:
            continue
        if dets[i] == 0.0 or dets[j] == 0.0 or np.sign(dets[i]) == np.sign(dets[j]):
            continue
        pos = _bisect_umbrella(jet, comp, i, j, cfg)
        if pos is not None:
            comp.specials.append(Special(i, PointClass.UMBRELLA, pos))
    comp.specials.sort(key=lambda s: s.index)
    return comp


def _form_at_point(jet, pos, tau, n1_hint):
    n1 = project_orthogonal(n1_hint, pos, tau)
    n2 = unit(cross4(pos, tau, n1))
    H = jet.coef_scale * jet.hess(pos)
    N = np.column_stack([n1, n2])
    return form_from_matrix(0.5 * (N.T @ H @ N))


def _bisect_umbrella(jet, comp, i, j, cfg):
    """Bisect det(q) = 0 between consecutive samples i and j along the curve."""
    a = comp.points[i]
    b = comp.points[j]
    bpos = -b.pos if np.dot(a.pos, b.pos) < 0 else b.pos
    gap = np.linalg.norm(bpos - a.pos)

    def at(s):
        guess = unit((1 - s) * a.pos + s * bpos)
        pos = project_to_curve(jet, guess, a.tangent, cfg, radius=3.0 * cfg.step)
        if pos is None:
            pos = guess
        return pos, _form_at_point(jet, pos, a.tangent, a.n1)

    lo, hi = 0.0, 1.0
    _, flo = at(lo)
    dlo = flo.det
    pos = None
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        pos, fm = at(mid)
        if abs(fm.det) < 1e-12 * max(fm.norm**2, 1e-300) or (hi - lo) * gap < 1e-13:
            return pos
        if np.sign(fm.det) == np.sign(dlo):
            lo = mid
        else:
            hi = mid
    return pos


@dataclass
class EigenField:
    """Continuously labeled eigen-axes along a loop plus its monodromy.

    ``angles[k]`` is the unwrapped angle of the a1 axis in the oriented frame
    (n1, n2) at sample k.  ``quarter_turns`` is the net monodromy in quarter
    turns (0..3) after one loop traversal, including the antipodal section
    flip when the loop closes at the antipode.  The monodromy permutes the
    section labels {+a1, +a2, -a1, -a2} by label -> label + quarter_turns.
    """

    component: CurveComponent
    angles: np.ndarray
    quarter_turns: int
    antipodal: bool

    def axis(self, k, which):
        pt = self.component.points[k]
        a = self.angles[k] + (0.0 if which == 0 else 0.5 * np.pi)
        return np.cos(a) * pt.n1 + np.sin(a) * pt.n2

    def section_vector(self, k, label):
        """Unit section for label in {0,1,2,3} = {+a1, +a2, -a1, -a2}."""
        pt = self.component.points[k]
        a = self.angles[k] + label * 0.5 * np.pi
        return np.cos(a) * pt.n1 + np.sin(a) * pt.n2

    def monodromy_cycles(self):
        k = self.quarter_turns % 4
        if k == 0:
            return [[0], [1], [2], [3]]
        if k == 2:
            return [[0, 2], [1, 3]]
        step = k  # 1 or 3: a single 4-cycle
        return [[(j * step) % 4 for j in range(4)]]

    def component_count(self):
        return len(self.monodromy_cycles())


def transport_eigenframe(F, comp: CurveComponent, cfg: TraceConfig):
    """Continuous eigen-axis field around the loop and its monodromy.

    Axes are labeled to maximize alignment with the previous sample.  Samples
    where the form degenerates (isotropic touch, vanishing form near triple
    points) are bridged by continuity, realizing the umbrella rule (axes kept)
    and the triple-point rule (ignore the other sheets, extend continuously).
    The closing comparison snaps to a quarter-turn grid and includes the
    antipodal section flip; a large snap deviation raises ContinuityLoss.
    """
    jet = as_jet(F)
    fill_quads(jet, comp)
    n = len(comp.points)
    if n < 3:
        raise ContinuityLoss("component too short to transport a frame")
    floor = _norm_floor(comp)
    angles = np.empty(n)
    prev = None
    for k, pt in enumerate(comp.points):
        nq = pt.quad
        if _frame_degenerate(nq, floor, cfg):
            if prev is None:
                raise ContinuityLoss(
                    "frame undefined at the anchor sample; re-anchor the component"
                )
            angles[k] = prev
            continue
        ang2, _ = nq.traceless_angle()
        raw = 0.5 * ang2  # axis of the larger eigenvalue
        if prev is None:
            angles[k] = raw
        else:
            delta = (raw - prev) % (0.5 * np.pi)
            if delta > 0.25 * np.pi:
                delta -= 0.5 * np.pi
            if abs(delta) > np.deg2rad(25.0):
                raise ContinuityLoss(
                    "eigen-axis turned too fast between samples; halve the step"
                )
            angles[k] = prev + delta
        prev = angles[k]
    if prev is None:
        raise ContinuityLoss("form degenerate along the whole component")
    # closing comparison: transport one virtual step onto the closure target
    start = comp.points[0]
    end = comp.points[-1]
    target_pos = -start.pos if comp.antipodal_closure else start.pos
    n1_end = project_orthogonal(end.n1, target_pos, end.tangent)
    n2_end = unit(cross4(target_pos, end.tangent, n1_end))
    nq_end = _form_at_point(jet, target_pos, end.tangent, end.n1)
    if _frame_degenerate(nq_end, floor, cfg):
        angle_end = angles[-1]
    else:
        ang2, _ = nq_end.traceless_angle()
        delta = (0.5 * ang2 - angles[-1]) % (0.5 * np.pi)
        if delta > 0.25 * np.pi:
            delta -= 0.5 * np.pi
        angle_end = angles[-1] + delta
    u_end = np.cos(angle_end) * n1_end + np.sin(angle_end) * n2_end
    theta = float(np.arctan2(np.dot(u_end, start.n2), np.dot(u_end, start.n1))) - angles[0]
    if comp.antipodal_closure:
        theta += np.pi
    quarters = theta / (0.5 * np.pi)
    k_turn = int(np.round(quarters)) % 4
    if abs(quarters - np.round(quarters)) > 0.34:
        raise ContinuityLoss("monodromy does not snap to a quarter turn")
    return EigenField(
        component=comp, angles=angles, quarter_turns=k_turn,
        antipodal=comp.antipodal_closure,
    )


@dataclass
class PushoffCurve:
    """Up to four closed loops at distance epsilon from the base component."""

    loops: list[Rp3Loop]
    base: int
    epsilon: float
    component_count: int = field(default=0)

    def __post_init__(self):
        if not self.component_count:
            self.component_count = len(self.loops)


def build_pushoff(comp: CurveComponent, fld: EigenField, cfg: TraceConfig, epsilon):
    """Concatenate the four eigen-sections into closed loops per the monodromy.

    Each monodromy cycle yields one loop: consecutive passes over the base
    polyline carry the section labels of the cycle, with the S^3 sheet sign
    flipping at each antipodal closure.  Raises EpsilonTooLarge when the
    distance band or a closure check fails.
    """
    n = len(comp.points)
    base_pts = comp.positions()
    loops = []
    for cycle in fld.monodromy_cycles():
        pts_out = np.empty((n * len(cycle), 4))
        sigma = 1.0
        for jpass, label in enumerate(cycle):
            for i in range(n):
                w = base_pts[i] + epsilon * fld.section_vector(i, label)
                pts_out[jpass * n + i] = sigma * (w / np.linalg.norm(w))
            if fld.antipodal:
                sigma = -sigma
        antipodal_loop = fld.antipodal and (len(cycle) % 2 == 1)
        loops.append(Rp3Loop(points=pts_out, antipodal=antipodal_loop))
    pc = PushoffCurve(loops=loops, base=comp.id, epsilon=epsilon)
    _validate_pushoff(pc, comp, cfg)
    return pc


def _validate_pushoff(pc: PushoffCurve, comp: CurveComponent, cfg: TraceConfig):
    eps_geo = np.arctan(pc.epsilon)  # geodesic offset after renormalization
    base = comp.positions()
    n = len(base)
    closing = -base[:1] if comp.antipodal_closure else base[:1]
    gaps = np.linalg.norm(np.diff(np.vstack([base, closing]), axis=0), axis=1)
    closure_tol = max(4.0 * cfg.step, 2.5 * float(gaps.max()))
    for loop in pc.loops:
        passes = len(loop.points) // n
        for j in range(passes):
            seg = loop.points[j * n : (j + 1) * n]
            cos_d = np.abs(np.einsum("ij,ij->i", seg, base))
            d = np.arccos(np.clip(cos_d, -1.0, 1.0))
            if (d < 0.5 * eps_geo).any() or (d > 1.5 * eps_geo + 1e-12).any():
                raise EpsilonTooLarge("pushoff left its distance band")
        first, last = loop.points[0], loop.points[-1]
        target = -first if loop.antipodal else first
        if np.linalg.norm(last - target) > closure_tol:
            raise EpsilonTooLarge("pushoff loop failed to close")


def pushoff_clearance(pc: PushoffCurve, components):
    """Smallest RP^3 distance from the pushoff to any self-intersection point."""
    from .geom import rp_dist_matrix

    best = np.inf
    for loop in pc.loops:
        for comp in components:
            D = rp_dist_matrix(loop.points, comp.positions())
            best = min(best, float(D.min()))
    return best
