"""Local-model families for frame-transport behavior, plus the surface corpus.

The local models are evaluated in affine coordinates directly since they test
the 2x2 frame logic, not the projective pipeline.  The corpus ships as text
files in the polynomial grammar with a small metadata header.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import NearGamma
from .model import PointClass
from .polycore import HomoPoly, parse_poly


@dataclass
class GammaFamilyFrames:
    """Eigen-axis field of q(z) = [[z, eps], [eps, 1]] along a z-window."""

    eps: float
    z: np.ndarray
    angles: np.ndarray  # unwrapped axis angle of the larger eigenvalue
    net_rotation: float


def gamma_family_frames(eps, samples=2001, halfwidth=None):
    """Axis rotation of the crossing model q(z) = [[z, eps], [eps, 1]].

    The traceless part is ((z-1)/2, eps), so the axis angle is
    atan2(eps, (z-1)/2) / 2; for eps of either sign the axes rotate by a net
    quarter turn through z = 1, in opposite senses, and the two rotations
    differ by a half turn.  The window is wide enough that the end axes align
    with the coordinate axes to the requested asymptotic accuracy.
    """
    if eps == 0:
        raise NearGamma("eps = 0 sits exactly on the gamma discriminant")
    if halfwidth is None:
        halfwidth = 1e8 * abs(eps)
    b_lo, b_hi = -0.5 * halfwidth, 0.5 * halfwidth
    # uniform in the traceless angle, so unwrapping is trivial and exact
    # the angle path stays in one atan2 branch: (0, pi) for eps > 0 and
    # (-pi, 0) for eps < 0, passing through +-pi/2 at z = 1
    phi_start = np.arctan2(eps, b_lo)
    phi_end = np.arctan2(eps, b_hi)
    phi = np.linspace(phi_start, phi_end, samples)
    b = np.where(np.abs(np.tan(phi)) > 1e-300, eps / np.tan(phi), 0.0)
    b[0], b[-1] = b_lo, b_hi
    z = 1.0 + 2.0 * b
    angles = 0.5 * phi
    return GammaFamilyFrames(
        eps=eps, z=z, angles=angles, net_rotation=float(angles[-1] - angles[0])
    )


@dataclass
class UmbrellaFrames:
    z: np.ndarray
    classes: list
    axis_angles: np.ndarray


def umbrella_frames(samples=201):
    """Classification along the Whitney umbrella model y^2 - z x^2 = 0.

    Along the z-axis the normal form in coordinates (x, y) is
    q(z) = [[-z, 0], [0, 1]]: solitary for z < 0, a real crossing for z > 0,
    the umbrella at z = 0; the eigen-axes stay the coordinate axes throughout
    (eigenvectors are kept, one eigenvalue changes sign).
    """
    z = np.linspace(-1.0, 1.0, samples)
    classes = []
    for zi in z:
        det = -zi  # det of diag(-z, 1)
        if det > 1e-12:
            classes.append(PointClass.SOLITARY)
        elif det < -1e-12:
            classes.append(PointClass.REAL_CROSSING)
        else:
            classes.append(PointClass.UMBRELLA)
    return UmbrellaFrames(z=z, classes=classes, axis_angles=np.zeros(samples))


def triple_model_form(s):
    """Normal form along one line of the three-plane model x*y*z = 0.

    Following the z-axis of the model, the other two sheets give
    q(s) proportional to the off-diagonal pattern; the form vanishes at the
    triple point itself and the eigen-axes extend by continuity.
    """
    return np.array([[0.0, 0.5 * s], [0.5 * s, 0.0]])


def h_model(x, y):
    """Hyperbolic tangency model surface z = x^2 - y^2 (height function)."""
    return x * x - y * y


def e_model(x, y, eps):
    """Elliptic tangency model x^2 + y^2 = eps (section of the E family)."""
    return x * x + y * y - eps


@dataclass
class CorpusEntry:
    name: str
    poly: HomoPoly
    expected_invariant: int | None
    optional: bool
    source: str


def _parse_header(text):
    meta = {}
    for line in text.splitlines():
        line = line.strip()
        if not line.startswith("#"):
            continue
        body = line.lstrip("#").strip()
        if ":" in body:
            key, val = body.split(":", 1)
            meta[key.strip()] = val.strip()
    return meta


def corpus():
    """The named example surfaces shipped with the package.

    Entries marked optional are the heavy pre-derived implicit equations of
    the rotated figure-eight surfaces; everything parses and is homogeneous.
    """
    entries = []
    root = resources.files("fourfold").joinpath("data")
    for item in sorted(root.iterdir(), key=lambda p: p.name):
        if not item.name.endswith(".poly"):
            continue
        text = item.read_text()
        meta = _parse_header(text)
        expected = meta.get("expected_invariant")
        entries.append(
            CorpusEntry(
                name=meta.get("name", item.name[:-5]),
                poly=parse_poly(text),
                expected_invariant=None if expected in (None, "", "?") else int(expected),
                optional=meta.get("optional", "false").lower() == "true",
                source=item.name,
            )
        )
    return entries


def corpus_entry(name):
    for entry in corpus():
        if entry.name == name:
            return entry
    raise KeyError(f"no corpus entry named {name!r}")
