"""Pipeline configuration, echoed verbatim into every report."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import ParseError


@dataclass(frozen=True)
class TraceConfig:
    step: float = 0.01
    min_step: float = 1e-6
    residual_tol: float = 1e-10
    dedupe_tol: float = 1e-6
    crossing_tol: float = 1e-5
    umbrella_tol: float = 1e-6
    gamma_tol: float = 1e-4
    epsilon: float = 0.0  # 0 = choose automatically per surface
    projections: int = 5
    seeds: int = 10000
    rng_seed: int = 0

    def validate(self):
        positive = (
            "step",
            "min_step",
            "residual_tol",
            "dedupe_tol",
            "crossing_tol",
            "umbrella_tol",
            "gamma_tol",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ParseError(f"config field {name} must be positive")
        if self.epsilon < 0:
            raise ParseError("epsilon must be >= 0 (0 = auto)")
        if self.projections < 3:
            raise ParseError("projections must be >= 3")
        if self.seeds < 1:
            raise ParseError("seeds must be >= 1")
        return self

    def as_dict(self):
        return asdict(self)
