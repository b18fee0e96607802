"""Fourfold pushoff invariant of real algebraic surfaces in RP^3."""

from .config import TraceConfig
from .errors import (
    ContinuityLoss,
    Disagreement,
    EpsilonTooLarge,
    FourfoldError,
    NearGamma,
    NotHomogeneous,
    NotNullHomologous,
    ParseError,
    ProjectionDegenerate,
    SeedRejected,
    SigmaProximity,
    SingularMatrix,
    StepCollapse,
)
from .model import CurveComponent, CurvePoint, PointClass, Rp3Loop
from .pipeline import PipelineResult, run_surface
from .polycore import (
    HomoPoly,
    PolyJet,
    act_linear,
    evaluate,
    gradient,
    hessian_at,
    parse_poly,
    poly_to_string,
)

__all__ = [
    "TraceConfig",
    "HomoPoly",
    "PolyJet",
    "parse_poly",
    "poly_to_string",
    "evaluate",
    "gradient",
    "hessian_at",
    "act_linear",
    "PointClass",
    "CurvePoint",
    "CurveComponent",
    "Rp3Loop",
    "run_surface",
    "PipelineResult",
    "FourfoldError",
    "ParseError",
    "NotHomogeneous",
    "SingularMatrix",
    "SeedRejected",
    "SigmaProximity",
    "StepCollapse",
    "NearGamma",
    "ContinuityLoss",
    "EpsilonTooLarge",
    "ProjectionDegenerate",
    "Disagreement",
    "NotNullHomologous",
]
