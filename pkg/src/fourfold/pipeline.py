"""End-to-end driver: parse -> trace -> classify -> pushoff -> link -> report.

Deterministic given the configuration: seed finding uses a fixed
low-discrepancy sequence and all random draws (projection poles, planar
views) come from one generator seeded by rng_seed, consumed in a fixed
order.  The JSON report contains only reproducible quantities, so two runs
with identical input and rng_seed produce byte-identical documents.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json

import numpy as np

from .config import TraceConfig
from .curvetrace import (
    assemble_components,
    detect_crossings,
    find_seeds,
    trace_component,
    _points_to_polyline,
)
from .errors import ContinuityLoss, Disagreement, EpsilonTooLarge, SeedRejected
from .geom import rp_dist_matrix
from .linkcalc import component_T, invariant
from .polycore import HomoPoly, PolyJet, parse_poly, poly_to_string
from .quadframe import (
    anchor_degenerate,
    best_anchor_index,
    build_pushoff,
    classify_component,
    fill_quads,
    pushoff_clearance,
    transport_eigenframe,
)

MAX_COMPONENTS = 24


@dataclasses.dataclass
class PipelineResult:
    poly: HomoPoly
    components: list
    fields: list
    pushoffs: list
    values: list
    triples: list
    report: dict

    @property
    def total(self):
        return self.report["invariant"]


def _trace_all(jet, cfg, warnings, counters):
    if jet.poly.degree < 2:
        # a hyperplane is an embedding: empty singular locus
        counters["seeds_accepted"] = 0
        counters["seeds_rejected"] = 0
        counters["components_traced"] = 0
        return []
    seeds = find_seeds(jet, cfg)
    counters["seeds_accepted"] = len(seeds)
    traces = []
    rejected = 0
    for seed in seeds:
        if len(traces) >= MAX_COMPONENTS:
            warnings.append("component cap reached; remaining seeds ignored")
            break
        near_existing = False
        for comp in traces:
            if _points_to_polyline(seed[None, :], comp)[0] < 2.5 * cfg.step:
                near_existing = True
                break
        if near_existing:
            continue
        try:
            traces.append(trace_component(jet, seed, cfg))
        except SeedRejected as exc:
            rejected += 1
            if rejected <= 4:
                warnings.append(f"seed rejected: {exc}")
    counters["seeds_rejected"] = rejected
    counters["components_traced"] = len(traces)
    return assemble_components(traces, cfg)


def _auto_epsilon(components, triples, cfg):
    if cfg.epsilon > 0:
        return cfg.epsilon
    window = 4.0 * cfg.step
    cand = [0.05]

    def away_from_triples(P):
        if not triples:
            return np.ones(len(P), dtype=bool)
        keep = np.ones(len(P), dtype=bool)
        for pos in triples:
            keep &= rp_dist_matrix(P, pos[None, :])[:, 0] > window
        return keep

    for i in range(len(components)):
        Pi = components[i].positions()
        keep_i = away_from_triples(Pi)
        for j in range(i, len(components)):
            Pj = components[j].positions()
            keep_j = away_from_triples(Pj)
            D = rp_dist_matrix(Pi, Pj)
            if i == j:
                n = len(Pi)
                ii, jj = np.indices(D.shape)
                band = np.minimum(np.abs(ii - jj), n - np.abs(ii - jj)) <= 10
                D[band] = np.inf
            D[~keep_i, :] = np.inf
            D[:, ~keep_j] = np.inf
            m = float(D.min())
            if np.isfinite(m):
                cand.append(m)
    return 0.25 * min(cand)


def run_surface(F, cfg: TraceConfig | None = None, _retry=0):
    """Run the full pipeline on a polynomial or source text."""
    if isinstance(F, str):
        F = parse_poly(F)
    cfg = (cfg or TraceConfig()).validate()
    jet = PolyJet(F)
    rng = np.random.default_rng(cfg.rng_seed)
    warnings: list[str] = []
    counters: dict[str, int] = {}
    try:
        components = _trace_all(jet, cfg, warnings, counters)
        for comp in components:
            fill_quads(jet, comp)
            if anchor_degenerate(comp, cfg):
                k0 = best_anchor_index(comp, cfg)
                fresh = trace_component(jet, comp.points[k0].pos, cfg)
                fresh.id = comp.id
                fill_quads(jet, fresh)
                components[comp.id] = fresh
                warnings.append(
                    f"component {comp.id} re-anchored away from a frame-degenerate start"
                )
        triples = detect_crossings(jet, components, cfg)
        for comp in components:
            classify_component(jet, comp, cfg)
        fields = [transport_eigenframe(jet, comp, cfg) for comp in components]
    except (ContinuityLoss, Disagreement) as exc:
        if _retry >= 2:
            raise
        warnings.append(f"retrying with halved step after: {exc}")
        finer = dataclasses.replace(cfg, step=0.5 * cfg.step)
        return run_surface(F, finer, _retry=_retry + 1)

    epsilon = _auto_epsilon(components, triples, cfg)
    pushoffs = []
    for comp, fld in zip(components, fields):
        eps = epsilon
        for attempt in range(7):
            try:
                pc = build_pushoff(comp, fld, cfg, eps)
                if pushoff_clearance(pc, components) <= 0.25 * eps:
                    raise EpsilonTooLarge("pushoff too close to the self-intersection")
                break
            except EpsilonTooLarge:
                if attempt == 6:
                    raise
                eps *= 0.5
        pushoffs.append(pc)

    values = []
    for comp, pc in zip(components, pushoffs):
        try:
            values.append(component_T(comp, pc, cfg, rng))
        except Disagreement as exc:
            if _retry >= 2:
                raise
            warnings.append(f"retrying with halved step after: {exc}")
            finer = dataclasses.replace(cfg, step=0.5 * cfg.step)
            return run_surface(F, finer, _retry=_retry + 1)

    counters["components"] = len(components)
    counters["triple_points"] = len(triples)
    counters["lk_projections_per_call"] = cfg.projections
    rep = invariant(components, pushoffs, values)
    report = _build_report(F, cfg, components, pushoffs, values, triples, rep,
                           warnings, counters, epsilon)
    return PipelineResult(
        poly=F,
        components=components,
        fields=fields,
        pushoffs=pushoffs,
        values=values,
        triples=triples,
        report=report,
    )


def _class_runs(comp):
    runs = []
    for pt in comp.points:
        name = pt.cls.value
        if runs and runs[-1][0] == name:
            runs[-1][1] += 1
        else:
            runs.append([name, 1])
    return runs


def _build_report(F, cfg, components, pushoffs, values, triples, rep, warnings,
                  counters, epsilon):
    canon = poly_to_string(F)
    comp_entries = []
    for comp, pc, val in zip(components, pushoffs, values):
        comp_entries.append(
            {
                "id": comp.id,
                "length": round(comp.arc_length(), 9),
                "points": len(comp.points),
                "antipodal_closure": comp.antipodal_closure,
                "class_runs": _class_runs(comp),
                "umbrellas": comp.umbrella_count(),
                "triple_points": comp.triple_count(),
                "pushoff_components": pc.component_count,
                "epsilon": pc.epsilon,
                "T": int(val),
            }
        )
    return {
        "input_hash": hashlib.sha256(canon.encode()).hexdigest(),
        "input": canon,
        "degree": F.degree,
        "config": cfg.as_dict(),
        "components": comp_entries,
        "invariant": rep.total,
        "invariant_mod8": rep.total_mod8,
        "triple_points_total": len(triples),
        "epsilon_used": epsilon,
        "warnings": warnings,
        "timings": counters,
    }


def report_json(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def export_curves(result: PipelineResult, directory):
    """Write polyline files (4-tuples per vertex) plus an index file."""
    import os

    os.makedirs(directory, exist_ok=True)
    from .linkcalc import lift_to_sphere

    index = []

    def dump(name, pts, role, extra=""):
        path = os.path.join(directory, name)
        with open(path, "w") as fh:
            for p in pts:
                fh.write(" ".join(f"{c:.17g}" for c in p) + "\n")
        index.append(f"{name}\t{role}\t{len(pts)}\t{extra}".rstrip())

    for comp in result.components:
        dump(
            f"base_{comp.id}.txt",
            comp.positions(),
            "base",
            f"antipodal={comp.antipodal_closure}",
        )
        for m, loop in enumerate(lift_to_sphere(comp).loops):
            dump(f"lift_base_{comp.id}_{m}.txt", loop, "lift_base")
    for pc in result.pushoffs:
        for l, loop in enumerate(pc.loops):
            dump(
                f"pushoff_{pc.base}_{l}.txt",
                loop.points,
                "pushoff",
                f"antipodal={loop.antipodal}",
            )
            for m, lift in enumerate(lift_to_sphere(loop).loops):
                dump(f"lift_pushoff_{pc.base}_{l}_{m}.txt", lift, "lift_pushoff")
    with open(os.path.join(directory, "index.txt"), "w") as fh:
        fh.write("\n".join(index) + "\n")
