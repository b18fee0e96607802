"""Command-line driver: compute the fourfold pushoff invariant of a surface.

Exit codes: 0 success, 2 near-gamma abort, 3 sigma proximity, 4 parse or
validation error, 5 numerical failure after retries.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import TraceConfig
from .errors import (
    ContinuityLoss,
    Disagreement,
    EpsilonTooLarge,
    NearGamma,
    ParseError,
    ProjectionDegenerate,
    SigmaProximity,
    StepCollapse,
)
from .pipeline import export_curves, report_json, run_surface


def _argument_parser():
    p = argparse.ArgumentParser(
        prog="compute",
        description="Trace the self-intersection curve of a real algebraic "
        "surface in RP^3, build its fourfold pushoff, and evaluate the "
        "self-linking invariant.",
    )
    p.add_argument("input", help="polynomial file or inline expression in x,y,z,t")
    p.add_argument("--epsilon", type=float, default=0.0, help="pushoff offset (0 = auto)")
    p.add_argument("--step", type=float, default=0.01, help="tracing arc-length step")
    p.add_argument("--seeds", type=int, default=10000, help="seed sample count on S^3")
    p.add_argument("--projections", type=int, default=5, help="independent linking projections")
    p.add_argument("--rng-seed", type=int, default=0, help="seed for all random draws")
    p.add_argument("--json", metavar="PATH", help="also write the JSON report here")
    p.add_argument("--export-curves", metavar="DIR", help="write curve polylines here")
    p.add_argument("--tol-residual", type=float, default=1e-10, help="corrector residual tolerance")
    p.add_argument("--tol-gamma", type=float, default=1e-4, help="gamma anisotropy tolerance")
    return p


def _read_input(arg):
    if os.path.exists(arg):
        with open(arg) as fh:
            return fh.read()
    return arg


def main(argv=None):
    args = _argument_parser().parse_args(argv)
    cfg = TraceConfig(
        step=args.step,
        residual_tol=args.tol_residual,
        gamma_tol=args.tol_gamma,
        epsilon=args.epsilon,
        projections=args.projections,
        seeds=args.seeds,
        rng_seed=args.rng_seed,
    )
    try:
        result = run_surface(_read_input(args.input), cfg)
    except NearGamma as exc:
        print(f"near-gamma abort: {exc}; point={exc.point}", file=sys.stderr)
        return 2
    except SigmaProximity as exc:
        print(f"sigma proximity: {exc}", file=sys.stderr)
        return 3
    except ParseError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 4
    except (StepCollapse, Disagreement, ProjectionDegenerate, EpsilonTooLarge,
            ContinuityLoss) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 5
    text = report_json(result.report)
    sys.stdout.write(text)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text)
    if args.export_curves:
        export_curves(result, args.export_curves)
    print(
        f"invariant = {result.report['invariant']} "
        f"(mod 8: {result.report['invariant_mod8']}), "
        f"{len(result.components)} component(s)",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
