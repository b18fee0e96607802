"""Trace the real self-intersection curve {grad F = 0} on the unit sphere S^3.

The curve is cut out by the four partial derivatives of F, an overdetermined
system thanks to the Euler identity, so the corrector works on an adaptively
selected 3-of-4 subsystem plus an affine slice.  All geometry stays on S^3;
identification to RP^3 happens only during component assembly and linking.
"""

from __future__ import annotations

import numpy as np

from .config import TraceConfig
from .errors import SeedRejected, SigmaProximity, StepCollapse
from .geom import (
    complete_frame,
    cross4,
    geodesic_step,
    kronecker_sphere,
    project_orthogonal,
    rp_dist,
    rp_dist_matrix,
    unit,
)
from .model import CurveComponent, CurvePoint, PointClass, Special
from .polycore import PolyJet


def as_jet(F):
    return F if isinstance(F, PolyJet) else PolyJet(F)


# ---------------------------------------------------------------------------
# seeds


def find_seeds(F, cfg: TraceConfig):
    """Deduplicated points with ||grad F|| below tolerance on the singular locus.

    Damped Gauss-Newton on {four partials = 0, <v0, v> = 1} started from a
    low-discrepancy sample of S^3; the affine slice pins the one-dimensional
    cone of solutions to isolated targets.  An empty result is a valid answer
    (smooth surface).
    """
    jet = as_jet(F)
    if jet.poly.degree < 2:
        raise ValueError("find_seeds needs degree >= 2")
    cfg.validate()
    X = kronecker_sphere(cfg.seeds, cfg.rng_seed)
    A = X.copy()
    rn_first = None
    eye = np.eye(4)
    for it in range(25):
        if len(X) == 0:
            break
        G = jet.grads(X)
        H = jet.hesses(X)
        slack = np.einsum("ij,ij->i", A, X) - 1.0
        R = np.concatenate([G, slack[:, None]], axis=1)
        J = np.concatenate([H, A[:, None, :]], axis=1)
        JtJ = np.einsum("mki,mkj->mij", J, J)
        Jtr = np.einsum("mki,mk->mi", J, R)
        damp = 1e-12 + 1e-9 * np.trace(JtJ, axis1=1, axis2=2) / 4.0
        M = JtJ + damp[:, None, None] * eye[None]
        try:
            dx = -np.linalg.solve(M, Jtr[..., None])[..., 0]
        except np.linalg.LinAlgError:
            dx = -np.stack([np.linalg.lstsq(m, v, rcond=None)[0] for m, v in zip(M, Jtr)])
        X = X + dx
        rn = np.linalg.norm(R, axis=1)
        if rn_first is None:
            rn_first = np.maximum(rn, 1e-300)
        good = np.isfinite(rn) & (np.linalg.norm(X, axis=1) < 20.0)
        if it in (8, 14):
            # drop clear divergers to keep the batch cheap
            good &= (rn < 0.3 * rn_first) | (rn < 1e-6)
        if not good.all():
            X, A, rn_first = X[good], A[good], rn_first[good]
    if len(X) == 0:
        return []
    X = X / np.linalg.norm(X, axis=1)[:, None]
    res = np.linalg.norm(jet.grads(X), axis=1)
    X = X[res <= cfg.residual_tol]
    seeds = []
    seen = set()
    for v in X:
        k = int(np.argmax(np.abs(v)))
        rep = -v if v[k] < 0 else v
        key = tuple(np.round(rep / max(cfg.dedupe_tol, 1e-9)).astype(np.int64))
        if key in seen:
            continue
        seen.add(key)
        seeds.append(rep)
    return seeds


# ---------------------------------------------------------------------------
# corrector and tangent machinery


def _best_subsystem(H, tau, x):
    """Rows of the Hessian forming the best-conditioned corrector system.

    By the Euler identity the position x is a near-null direction of every
    Hessian row on the curve, so conditioning is judged with the sphere row
    included.
    """
    best_rows, best_sigma = None, -1.0
    for drop in range(4):
        rows = [i for i in range(4) if i != drop]
        J = np.vstack([H[rows], tau, x])
        sigma = np.linalg.svd(J, compute_uv=False)[-1]
        if sigma > best_sigma:
            best_sigma, best_rows = sigma, rows
    return best_rows


def project_to_curve(jet, guess, tau, cfg, radius):
    """Newton projection onto {selected partials = 0, ||v|| = 1} near ``guess``.

    The slice <v - guess, tau> = 0 keeps the iterate transversal to the curve
    direction; the sphere row pins the radial direction, which the Hessian
    rows cannot see.  The consistent overdetermined system is solved by least
    squares.  Returns the corrected unit point or None.
    """
    p = np.asarray(guess, dtype=float)
    x = p / np.linalg.norm(p)
    subset = None
    gscale = 0.0
    for _ in range(30):
        g = jet.grad(x)
        gnorm = np.linalg.norm(g)
        slack = float(np.dot(x - p, tau))
        if gnorm <= cfg.residual_tol * max(1.0, gscale) and abs(slack) <= 1e-9:
            return x
        H = jet.hess(x)
        if subset is None:
            subset = _best_subsystem(H, tau, x)
            gscale = np.linalg.norm(H)  # local derivative scale of the system
        J = np.vstack([H[subset], tau, x])
        r = np.append(g[subset], [slack, 0.0])
        dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        if not np.isfinite(dx).all():
            return None
        x = x + dx
        n = np.linalg.norm(x)
        if n == 0 or not np.isfinite(n):
            return None
        x = x / n
        if np.linalg.norm(x - p) > radius:
            return None
    g = jet.grad(x)
    if np.linalg.norm(g) <= cfg.residual_tol * max(1.0, gscale):
        return x
    return None


def tangent_at(jet, x, prev_tau=None):
    """Unit curve direction at x: kernel of [Hess F; x], sign-matched to prev.

    Returns (tangent, degenerate); degenerate means the second-smallest
    singular value also collapsed (umbrella or triple point under the point).
    """
    H = jet.hess(x)
    A = np.vstack([H, x])
    s = np.linalg.svd(A, compute_uv=False)
    scale = max(s[0], 1e-300)
    degenerate = s[2] < 1e-6 * scale
    if degenerate and prev_tau is not None:
        return prev_tau, True
    _, _, Vt = np.linalg.svd(A)
    tau = Vt[-1]
    tau = tau - np.dot(tau, x) * x
    n = np.linalg.norm(tau)
    if n < 1e-12:
        if prev_tau is not None:
            return prev_tau, True
        raise SeedRejected("no tangent direction at point")
    tau = tau / n
    if prev_tau is not None and np.dot(tau, prev_tau) < 0:
        tau = -tau
    return tau, degenerate


def rank_profile(jet, x):
    """Singular values of [Hess F; x] for curve-point preconditions."""
    return np.linalg.svd(np.vstack([jet.hess(x), x]), compute_uv=False)


def is_curve_point(jet, x):
    s = rank_profile(jet, x)
    scale = max(s[0], 1e-300)
    return s[3] < 1e-5 * scale and s[2] > 1e-4 * scale


def _polish_seed(jet, seed, cfg):
    x = unit(np.asarray(seed, dtype=float))
    for _ in range(10):
        g = jet.grad(x)
        if np.linalg.norm(g) <= 0.01 * cfg.residual_tol:
            break
        J = np.vstack([jet.hess(x), x])
        r = np.append(g, 0.0)
        dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        x = unit(x + dx)
    if np.linalg.norm(jet.grad(x)) > cfg.residual_tol:
        raise SeedRejected("seed does not satisfy the residual tolerance")
    return x


# ---------------------------------------------------------------------------
# tracing


def _attempt_step(jet, prev, h, cfg, radius_mult, min_progress, min_turn):
    p = geodesic_step(prev.pos, prev.tangent, h)
    cand = project_to_curve(jet, p, prev.tangent, cfg, radius=radius_mult * h)
    if cand is None:
        return None
    if np.linalg.norm(cand - prev.pos) < min_progress * h:
        return None
    tau, degenerate = tangent_at(jet, cand, prev.tangent)
    if np.dot(tau, prev.tangent) < min_turn:
        return None
    return cand, tau, degenerate


def trace_component(F, seed, cfg: TraceConfig):
    """Predictor-corrector trace of one closed loop through ``seed``.

    Closure is detected at the start point or its antipode after at least 10
    steps.  Isolated rank collapses (umbrellas, triple points) are stepped
    over by a short leapfrog; persistent collapse raises SigmaProximity and
    exhausted step halving raises StepCollapse.
    """
    jet = as_jet(F)
    if not is_curve_point(jet, unit(np.asarray(seed, dtype=float))):
        raise SeedRejected("Jacobian rank at seed is not that of a curve point")
    x0 = _polish_seed(jet, seed, cfg)
    if not is_curve_point(jet, x0):
        raise SeedRejected("Jacobian rank at seed is not that of a curve point")
    tau0, _ = tangent_at(jet, x0)
    n1, n2 = complete_frame(x0, tau0)
    pts = [CurvePoint(x0, tau0, n1, n2)]
    antipodal = False
    max_steps = max(int(40.0 / cfg.step), 200)
    leap_failures = 0
    degenerate_run = 0
    healthy_seen = False
    while True:
        if len(pts) > max_steps:
            raise StepCollapse("component failed to close within the step budget")
        prev = pts[-1]
        result = None
        h = cfg.step
        # a fresh seed either steps at near-full length or is not on a curve;
        # only committed traces earn the deep halving cascade
        h_floor = cfg.step / 16.0 if len(pts) == 1 else cfg.min_step
        while h >= h_floor:
            result = _attempt_step(jet, prev, h, cfg, 2.5, 0.2, 0.5)
            if result is not None:
                break
            h *= 0.5
        if result is None:
            for mult in (2.0, 3.0, 4.0, 6.0, 10.0):
                result = _attempt_step(jet, prev, mult * cfg.step, cfg, 1.6, 0.4, 0.3)
                if result is not None:
                    break
            if result is None:
                if len(pts) < 12:
                    # never got anywhere: a seed problem, not a curve problem
                    raise SeedRejected(
                        "corrector cannot sustain a trace from this seed "
                        "(isolated or spurious singular point?)"
                    )
                s = rank_profile(jet, prev.pos)
                if s[2] < 1e-4 * max(s[0], 1e-300):
                    raise SigmaProximity(
                        "Jacobian rank collapse not explained by an isolated special point"
                    )
                raise StepCollapse("corrector failed below min_step and leapfrog failed")
            leap_failures += 1
            if leap_failures > 12:
                raise SigmaProximity("persistent rank collapse along the curve")
        x_new, tau_new, degenerate = result
        if degenerate:
            # rank collapse is legitimate only at isolated special points
            degenerate_run += 1
            if degenerate_run > 6:
                if healthy_seen:
                    raise SigmaProximity(
                        "rank-degenerate over an extended arc (tangential sheets?)"
                    )
                raise SeedRejected("seed lies in a rank-degenerate valley, not on a curve")
        else:
            degenerate_run = 0
            healthy_seen = True
        n1_new = project_orthogonal(prev.n1, x_new, tau_new)
        n2_new = unit(cross4(x_new, tau_new, n1_new))
        pts.append(CurvePoint(x_new, tau_new, n1_new, n2_new))
        if len(pts) >= 10:
            d_same = np.linalg.norm(x_new - x0)
            d_anti = np.linalg.norm(x_new + x0)
            if d_same <= 1.6 * cfg.step:
                if d_same < 0.5 * cfg.step:
                    pts.pop()
                antipodal = False
                break
            if d_anti <= 1.6 * cfg.step:
                if d_anti < 0.5 * cfg.step:
                    pts.pop()
                antipodal = True
                break
    return CurveComponent(id=-1, points=pts, antipodal_closure=antipodal)


# ---------------------------------------------------------------------------
# assembly and crossing detection


def _points_to_polyline(P, comp):
    """Min distance from each row of P to the closed polyline of comp (RP fold)."""
    Q = comp.positions()
    closing = -Q[:1] if comp.antipodal_closure else Q[:1]
    Q = np.vstack([Q, closing])
    A, B = Q[:-1], Q[1:]
    AB = B - A
    denom = np.maximum(np.einsum("ij,ij->i", AB, AB), 1e-300)
    best = np.full(len(P), np.inf)
    for sign in (1.0, -1.0):
        AP = sign * P[:, None, :] - A[None, :, :]
        tpar = np.clip(np.einsum("nmj,mj->nm", AP, AB) / denom[None, :], 0.0, 1.0)
        D = AP - tpar[:, :, None] * AB[None, :, :]
        best = np.minimum(best, np.linalg.norm(D, axis=2).min(axis=1))
    return best


def component_distance(c1, c2):
    """Symmetric Hausdorff-style distance between two closed traces in RP^3."""
    d12 = _points_to_polyline(c1.positions(), c2).max()
    d21 = _points_to_polyline(c2.positions(), c1).max()
    return max(d12, d21)


def assemble_components(traces, cfg: TraceConfig):
    """Drop repeated traces of the same loop and renumber ids 0..k-1.

    Two traces are the same component when their polyline Hausdorff distance
    (with antipodal identification) is below the dedupe threshold; the
    threshold absorbs the chord sagitta of the sampling.
    """
    threshold = max(cfg.dedupe_tol, cfg.step**2)
    kept = []
    for tr in traces:
        if all(component_distance(tr, k) > threshold for k in kept):
            kept.append(tr)
    out = []
    for i, tr in enumerate(kept):
        out.append(
            CurveComponent(
                id=i,
                points=tr.points,
                antipodal_closure=tr.antipodal_closure,
                specials=list(tr.specials),
            )
        )
    return out


def _cyclic_gap(a, b, n):
    d = abs(a - b)
    return min(d, n - d)


def _refine_crossing(jet, ca, ia, cb, ib, cfg):
    """Locally minimize the RP distance between two curve neighborhoods."""

    def curve_point(comp, idx, s):
        base = comp.points[idx]
        guess = geodesic_step(base.pos, base.tangent, s)
        return project_to_curve(jet, guess, base.tangent, cfg, radius=3.0 * cfg.step)

    def dist(sa, sb):
        pa = curve_point(ca, ia, sa)
        pb = curve_point(cb, ib, sb)
        if pa is None or pb is None:
            return None, None, None
        return rp_dist(pa, pb), pa, pb

    lo = -1.6 * cfg.step
    hi = 1.6 * cfg.step
    sa, sb = 0.0, 0.0
    golden = 0.5 * (3.0 - np.sqrt(5.0))

    def line_min(fix_other, which):
        a, b = lo, hi
        x1 = a + golden * (b - a)
        x2 = b - golden * (b - a)
        f = {}

        def ev(s):
            if s not in f:
                val = dist(s, fix_other)[0] if which == 0 else dist(fix_other, s)[0]
                f[s] = np.inf if val is None else val
            return f[s]

        for _ in range(18):
            if ev(x1) < ev(x2):
                b, x2 = x2, x1
                x1 = a + golden * (b - a)
            else:
                a, x1 = x1, x2
                x2 = b - golden * (b - a)
        return 0.5 * (a + b)

    for _ in range(3):
        sa = line_min(sb, 0)
        sb = line_min(sa, 1)
    d, pa, pb = dist(sa, sb)
    if d is None:
        return None
    ta, _ = tangent_at(jet, pa)
    tb, _ = tangent_at(jet, pb)
    transversal = abs(float(np.dot(ta, tb))) < 0.985
    mid = unit(pa + pb) if np.dot(pa, pb) >= 0 else unit(pa - pb)
    return mid, d, transversal


def detect_crossings(F, components, cfg: TraceConfig):
    """Mark TRIPLE points where distinct curve branches meet transversally.

    Returns the list of distinct triple-point positions; incident components
    receive Special markers at their nearest sample.  Tangential contact
    (close approach without transversality) raises SigmaProximity.
    """
    jet = as_jet(F)
    gate = max(2.5 * cfg.step, 100.0 * cfg.crossing_tol)
    clusters = []  # [position, {(comp_index, sample_index), ...}]
    for i in range(len(components)):
        Pi = components[i].positions()
        for j in range(i, len(components)):
            Pj = components[j].positions()
            D = rp_dist_matrix(Pi, Pj)
            if i == j:
                n = len(Pi)
                ii, jj = np.indices(D.shape)
                D[np.minimum(np.abs(ii - jj), n - np.abs(ii - jj)) <= 8] = np.inf
            else:
                near_frac = (D.min(axis=1) < gate).mean()
                if near_frac > 0.5:
                    raise SigmaProximity(
                        "two components run together over an extended arc"
                    )
            cand = np.argwhere(D < gate)
            if len(cand) == 0:
                continue
            order = np.argsort(D[cand[:, 0], cand[:, 1]])
            taken = []
            for k in order:
                a, b = map(int, cand[k])
                if any(
                    _cyclic_gap(a, pa, len(Pi)) <= 6 and _cyclic_gap(b, pb, len(Pj)) <= 6
                    for pa, pb in taken
                ):
                    continue
                taken.append((a, b))
                refined = _refine_crossing(jet, components[i], a, components[j], b, cfg)
                if refined is None:
                    continue
                pos, d, transversal = refined
                if d >= cfg.crossing_tol:
                    if d < 5.0 * cfg.crossing_tol and not transversal:
                        raise SigmaProximity("tangential curve contact")
                    continue
                if not transversal:
                    raise SigmaProximity("tangential curve contact at a crossing")
                for cluster in clusters:
                    if rp_dist(cluster[0], pos) < 30.0 * cfg.crossing_tol:
                        cluster[1].add((i, a))
                        cluster[1].add((j, b))
                        break
                else:
                    clusters.append([pos, {(i, a), (j, b)}])
    for pos, members in clusters:
        by_comp = {}
        for ci, idx in members:
            by_comp.setdefault(ci, set()).add(idx)
        for ci, idxs in by_comp.items():
            comp = components[ci]
            # collapse indices within a small window to one marker each
            chosen = []
            for idx in sorted(idxs):
                if all(_cyclic_gap(idx, c, len(comp.points)) > 6 for c in chosen):
                    chosen.append(idx)
            for idx in chosen:
                best = min(
                    range(max(0, idx - 2), min(len(comp.points), idx + 3)),
                    key=lambda k: rp_dist(comp.points[k].pos, pos),
                )
                comp.specials.append(Special(best, PointClass.TRIPLE, pos))
    return [pos for pos, _ in clusters]
