"""Exception taxonomy for the pipeline.

Every failure mode that maps to a CLI exit code has its own class so the
driver can translate without string matching.
"""

from __future__ import annotations


class FourfoldError(Exception):
    """Base class for all package errors."""


class ParseError(FourfoldError):
    """Malformed polynomial text."""


class NotHomogeneous(ParseError):
    """Monomials of mixed total degree."""

    def __init__(self, message, offenders=None):
        super().__init__(message)
        self.offenders = list(offenders or [])


class SingularMatrix(FourfoldError):
    """Linear change of coordinates is not invertible."""


class SeedRejected(FourfoldError):
    """Seed is not a regular curve point (isolated or deeper singularity)."""


class SigmaProximity(FourfoldError):
    """Surface too close to the topological-instability discriminant."""


class StepCollapse(FourfoldError):
    """Corrector failed to converge after step halving below the minimum."""


class NearGamma(FourfoldError):
    """Normal form nearly isotropic on a solitary arc; invariant undefined."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else list(map(float, point))


class ContinuityLoss(FourfoldError):
    """Eigenframe transport lost track between samples; step too coarse."""


class EpsilonTooLarge(FourfoldError):
    """Pushoff violates its distance band or disjointness invariant."""


class ProjectionDegenerate(FourfoldError):
    """No usable stereographic pole / planar direction after many resamples."""


class Disagreement(FourfoldError):
    """Linking trials returned different values; geometry under-resolved."""


class NotNullHomologous(FourfoldError):
    """First linking argument carries the nontrivial RP^3 class."""
