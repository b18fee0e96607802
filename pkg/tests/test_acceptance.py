"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines as they complete.  Criteria 1-6 run the full pipeline at its default
configuration and enforce the stated wall-clock budgets; criterion 7 is the
property suite; criterion 8 exercises the gamma-crossing fixture; criterion 9
covers the optional pre-derived stretch surfaces.
"""

import dataclasses
import time
from fractions import Fraction

import numpy as np
import pytest

from fourfold import TraceConfig, run_surface
from fourfold.fixtures import corpus, corpus_entry, gamma_family_frames
from fourfold.geom import random_rotation
from fourfold.model import PointClass
from fourfold.polycore import act_linear, evaluate, gradient, rescale

DEFAULT = TraceConfig()
CORE_NAMES = ("roman", "smooth_quadric", "ex4", "ex5", "ex6", "ex7_plus", "ex7_minus")

_results = {}


def _run(name, cfg=DEFAULT):
    key = (name, cfg)
    if key not in _results:
        t0 = time.perf_counter()
        res = run_surface(corpus_entry(name).poly, cfg)
        _results[key] = (res, time.perf_counter() - t0)
    return _results[key]


def _criterion(num, ok, detail):
    print(f"CRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_1_roman_surface():
    res, dt = _run("roman")
    umb = sum(c.umbrella_count() for c in res.components)
    detail = (
        f"invariant={res.total} umbrellas={umb} components={len(res.components)} "
        f"triples={len(res.triples)} time={dt:.1f}s"
    )
    _criterion(
        1,
        res.total == 0
        and umb == 6
        and len(res.components) == 3
        and len(res.triples) == 1
        and dt < 60.0,
        detail,
    )


def test_criterion_2_ex4_two_pushoff_components():
    res, dt = _run("ex4")
    counts = [pc.component_count for pc in res.pushoffs]
    detail = f"invariant={res.total} pushoff_components={counts} time={dt:.1f}s"
    _criterion(2, res.total == 0 and counts == [2] and dt < 30.0, detail)


def test_criterion_3_ex5_solitary_line():
    res, dt = _run("ex5")
    all_solitary = (
        len(res.components) == 1
        and all(p.cls is PointClass.SOLITARY for p in res.components[0].points)
    )
    detail = (
        f"invariant={res.total} components={len(res.components)} "
        f"all_solitary={all_solitary} time={dt:.1f}s"
    )
    _criterion(3, res.total == 0 and all_solitary and dt < 30.0, detail)


def test_criterion_4_ex6_mixed_arcs():
    res, dt = _run("ex6")
    classes = {p.cls for c in res.components for p in c.points}
    umb = sum(c.umbrella_count() for c in res.components)
    mixed = PointClass.SOLITARY in classes and PointClass.REAL_CROSSING in classes
    detail = f"invariant={res.total} mixed_arcs={mixed} umbrellas={umb} time={dt:.1f}s"
    _criterion(4, res.total == 0 and mixed and umb >= 2 and dt < 60.0, detail)


def test_criterion_5_ex7_unit_invariant():
    res_p, dt_p = _run("ex7_plus")
    res_m, dt_m = _run("ex7_minus")
    umb_ok = all(
        c.umbrella_count() == 2 for r in (res_p, res_m) for c in r.components
    )
    detail = (
        f"T(plus)={res_p.total} T(minus)={res_m.total} two_umbrellas={umb_ok} "
        f"time={dt_p + dt_m:.1f}s"
        " [see decisions ledger: both sign variants lie exactly on the gamma "
        "discriminant, where the eigenvector pushoff is unlinked; the paper's "
        "+-1 are the off-wall limit values]"
    )
    _criterion(
        5,
        abs(res_p.total) == 1
        and abs(res_m.total) == 1
        and res_p.total == -res_m.total
        and umb_ok
        and dt_p < 30.0
        and dt_m < 30.0,
        detail,
    )


def test_criterion_6_smooth_quadric():
    res, dt = _run("smooth_quadric")
    detail = f"invariant={res.total} components={len(res.components)} time={dt:.1f}s"
    _criterion(6, res.total == 0 and len(res.components) == 0 and dt < 5.0, detail)


PROP_CFG = TraceConfig(seeds=1500)


def test_criterion_7a_linking_agreement_over_projections():
    ok = True
    details = []
    for name in CORE_NAMES:
        res, _ = _run(name)
        proj = res.report["timings"]["lk_projections_per_call"]
        ok &= proj >= 5
        details.append(f"{name}:{proj}")
    _criterion("7a", ok, "projections per lk call " + " ".join(details))


def test_criterion_7b_euler_identity_exact():
    rng = np.random.default_rng(123)
    ok = True
    for entry in corpus():
        P = entry.poly
        G = gradient(P)
        for _ in range(100):
            p = tuple(
                Fraction(int(a), int(b))
                for a, b in zip(rng.integers(-9, 10, 4), rng.integers(1, 9, 4))
            )
            if sum(c * evaluate(g, p) for c, g in zip(p, G)) != P.degree * evaluate(P, p):
                ok = False
    _criterion("7b", ok, "x.Fx + y.Fy + z.Fz + t.Ft = d.F exactly, 100 points/entry")


def test_criterion_7c_invariance_under_rotations_and_scaling():
    rng = np.random.default_rng(2024)
    ok = True
    details = []
    for name in CORE_NAMES:
        base = run_surface(corpus_entry(name).poly, PROP_CFG)
        vals = {base.total}
        scaled = run_surface(rescale(corpus_entry(name).poly, 3), PROP_CFG)
        vals.add(scaled.total)
        for _ in range(10):
            R = random_rotation(4, rng)
            vals.add(run_surface(act_linear(corpus_entry(name).poly, R), PROP_CFG).total)
        ok &= len(vals) == 1
        details.append(f"{name}:{sorted(vals)}")
    _criterion("7c", ok, "T under 10 random SO(4) changes and 3F: " + " ".join(details))


def test_criterion_7d_step_halving_stability():
    ok = True
    details = []
    fine = dataclasses.replace(PROP_CFG, step=PROP_CFG.step / 2)
    for name in CORE_NAMES:
        a = run_surface(corpus_entry(name).poly, PROP_CFG)
        b = run_surface(corpus_entry(name).poly, fine)
        sig = lambda r: (
            len(r.components),
            sum(c.umbrella_count() for c in r.components),
            len(r.triples),
            sorted(pc.component_count for pc in r.pushoffs),
            r.total,
        )
        same = sig(a) == sig(b)
        ok &= same
        details.append(f"{name}:{'=' if same else '!='}")
    _criterion("7d", ok, "counts stable under step halving: " + " ".join(details))


def test_criterion_7e_pushoff_counts_in_1_2_4():
    ok = True
    counts = []
    for name in CORE_NAMES:
        res, _ = _run(name)
        for pc in res.pushoffs:
            counts.append(pc.component_count)
            ok &= pc.component_count in (1, 2, 4)
    _criterion("7e", ok, f"all pushoff component counts in {{1,2,4}}: {counts}")


def test_criterion_8_gamma_fixture_half_turn():
    t0 = time.perf_counter()
    plus = gamma_family_frames(0.1)
    minus = gamma_family_frames(-0.1)
    diff = abs(plus.net_rotation - minus.net_rotation)
    dt = time.perf_counter() - t0
    detail = f"|net(+0.1) - net(-0.1)| = {diff:.9f} (pi={np.pi:.9f}) time={dt:.2f}s"
    _criterion(8, abs(diff - np.pi) <= 1e-6 and dt < 1.0, detail)


def test_criterion_9_stretch_examples():
    # optional, not gating in spirit; both pre-derived surfaces are shipped
    cfg = TraceConfig(seeds=3000)
    t0 = time.perf_counter()
    torus = run_surface(corpus_entry("ex2_torus").poly, cfg)
    twisted = run_surface(corpus_entry("ex3_twisted").poly, cfg)
    dt = time.perf_counter() - t0
    counts = [pc.component_count for pc in torus.pushoffs]
    detail = (
        f"torus T={torus.total} pushoffs={counts} twisted |T|={abs(twisted.total)} "
        f"time={dt:.0f}s"
    )
    _criterion(
        9,
        torus.total == 0 and counts == [4] and abs(twisted.total) == 4 and dt < 1800.0,
        detail,
    )
