"""Geometry helpers on the unit sphere S^3 in R^4 and its quotient RP^3."""

from __future__ import annotations

import numpy as np


def unit(v):
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def rp_dist(p, q):
    """Chordal distance between projective points given by unit representatives."""
    return min(np.linalg.norm(p - q), np.linalg.norm(p + q))


def rp_dist_matrix(P, Q):
    """Pairwise projective chordal distances between two point arrays."""
    d_minus = np.linalg.norm(P[:, None, :] - Q[None, :, :], axis=-1)
    d_plus = np.linalg.norm(P[:, None, :] + Q[None, :, :], axis=-1)
    return np.minimum(d_minus, d_plus)


def fold_antipodal(v):
    """Canonical sign representative: largest-magnitude coordinate positive."""
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def cross4(a, b, c):
    """Vector w with <w, u> = det[a, b, c, u]; completes (a, b, c) positively."""
    w = np.empty(4)
    rows = np.stack([a, b, c])
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        w[i] = np.linalg.det(np.vstack([rows, e]))
    return w


def geodesic_step(v, tau, h):
    return np.cos(h) * v + np.sin(h) * tau


def project_orthogonal(u, *basis):
    """Component of u orthogonal to the given unit vectors, normalized."""
    w = np.array(u, dtype=float)
    for b in basis:
        w = w - np.dot(w, b) * b
    return unit(w)


def complete_frame(pos, tangent, n1_hint=None):
    """Orthonormal (n1, n2) spanning the normal plane, det[pos,tan,n1,n2] > 0."""
    if n1_hint is None:
        # pick the coordinate axis least aligned with span(pos, tangent)
        scores = [abs(pos[i]) + abs(tangent[i]) for i in range(4)]
        e = np.zeros(4)
        e[int(np.argmin(scores))] = 1.0
        n1_hint = e
    n1 = project_orthogonal(n1_hint, pos, tangent)
    n2 = unit(cross4(pos, tangent, n1))
    return n1, n2


def rotation_from_pole(pole):
    """Rotation Q in SO(4) whose last row is the given unit vector."""
    q, _ = np.linalg.qr(np.column_stack([pole, np.eye(4)[:, :3]]))
    # first QR column is +-pole; reorder so pole is the last row of Q
    cols = [q[:, 1], q[:, 2], q[:, 3], q[:, 0] * np.sign(np.dot(q[:, 0], pole))]
    Q = np.stack(cols)
    if np.linalg.det(Q) < 0:
        Q[0] = -Q[0]
    return Q


def random_rotation(dim, rng):
    """Haar-ish random element of SO(dim)."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def stereographic(points, pole):
    """Project S^3 points (away from pole) to R^3 using a det(+1) chart."""
    Q = rotation_from_pole(pole)
    y = points @ Q.T
    return y[:, :3] / (1.0 - y[:, 3])[:, None]


def kronecker_sphere(n, seed=0):
    """Deterministic low-discrepancy sample of S^3 (Kronecker + Box-Muller)."""
    alphas = np.array([0.5545497, 0.3080886, 0.8191725, 0.1294918])
    k = np.arange(1, n + 1)[:, None]
    u = np.mod(k * alphas[None, :] + (seed * 0.6180339887) % 1.0, 1.0)
    u = np.clip(u, 1e-12, 1 - 1e-12)
    r1 = np.sqrt(-2.0 * np.log(u[:, 0]))
    r2 = np.sqrt(-2.0 * np.log(u[:, 2]))
    g = np.column_stack([
        r1 * np.cos(2 * np.pi * u[:, 1]),
        r1 * np.sin(2 * np.pi * u[:, 1]),
        r2 * np.cos(2 * np.pi * u[:, 3]),
        r2 * np.sin(2 * np.pi * u[:, 3]),
    ])
    return g / np.linalg.norm(g, axis=1)[:, None]
