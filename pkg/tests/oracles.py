"""Independent test oracles: Gauss-integral linking and chart embeddings."""

from __future__ import annotations

import numpy as np


def gauss_link_r3(A, B, sub=6):
    """Gauss linking integral of two closed polygonal loops in R^3.

    Midpoint quadrature with per-segment subdivision; accurate to well below
    0.5 for loops separated by more than a few segment lengths, which is all
    the tests need.  Independent of the crossing-counting implementation.
    """
    def densify(P):
        pts = []
        n = len(P)
        for i in range(n):
            a, b = P[i], P[(i + 1) % n]
            for k in range(sub):
                pts.append(a + (b - a) * (k / sub))
        return np.asarray(pts)

    A = densify(np.asarray(A, dtype=float))
    B = densify(np.asarray(B, dtype=float))
    dA = np.roll(A, -1, axis=0) - A
    dB = np.roll(B, -1, axis=0) - B
    mA = A + 0.5 * dA
    mB = B + 0.5 * dB
    R = mA[:, None, :] - mB[None, :, :]
    nR = np.linalg.norm(R, axis=2)
    cr = np.cross(dA[:, None, :], dB[None, :, :])
    return float(np.einsum("ijk,ijk->ij", cr, R / nR[:, :, None] ** 3).sum() / (4 * np.pi))


def to_sphere(P):
    """Inverse stereographic embedding of R^3 loops into S^3 (pole (0,0,0,1))."""
    P = np.asarray(P, dtype=float)
    n2 = (P**2).sum(axis=1)
    return np.column_stack([2 * P, n2 - 1]) / (n2 + 1)[:, None]


def circle3(center, radius, axis, n=80):
    """Round circle in R^3 with the given center, radius, and normal axis."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    u = np.cross(axis, [1.0, 0.0, 0.0])
    if np.linalg.norm(u) < 1e-8:
        u = np.cross(axis, [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    s = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return (
        np.asarray(center, dtype=float)[None, :]
        + radius * np.cos(s)[:, None] * u[None, :]
        + radius * np.sin(s)[:, None] * v[None, :]
    )
