import numpy as np
import pytest

from fourfold import NearGamma, TraceConfig
from fourfold.curvetrace import find_seeds, trace_component
from fourfold.fixtures import corpus_entry
from fourfold.model import CurveComponent, CurvePoint, PointClass
from fourfold.polycore import PolyJet
from fourfold.quadframe import (
    EigenField,
    build_pushoff,
    classify,
    classify_component,
    fill_quads,
    form_from_matrix,
    quad_form_at,
    transport_eigenframe,
)

CFG = TraceConfig(seeds=2500)
E = np.eye(4)


def point_with_frame(pos, tangent, n1, n2):
    return CurvePoint(np.asarray(pos, float), np.asarray(tangent, float),
                      np.asarray(n1, float), np.asarray(n2, float))


def test_quad_form_ex5_at_pole():
    jet = PolyJet(corpus_entry("ex5").poly)
    pt = point_with_frame(E[2], E[3], E[0], E[1])  # (0,0,1,0), normals e_x, e_y
    nq = quad_form_at(jet, pt)
    assert np.allclose(nq.q, [[1.0, 0.0], [0.0, 2.0]], atol=1e-12)
    assert classify(nq, CFG) is PointClass.SOLITARY


def test_quad_form_ex4_at_pole():
    jet = PolyJet(corpus_entry("ex4").poly)
    pt = point_with_frame(E[2], E[3], E[0], E[1])
    nq = quad_form_at(jet, pt)
    assert np.allclose(nq.q, [[-1.0, 0.0], [0.0, 1.0]], atol=1e-12)
    assert classify(nq, CFG) is PointClass.REAL_CROSSING


def test_quad_form_ex7_along_line():
    jet = PolyJet(corpus_entry("ex7_plus").poly)  # (t^2+z^2)y - 2tzx
    for y0 in (0.0, 0.5, 3.0):
        s = np.hypot(1.0, y0)
        pos = np.array([1.0, y0, 0.0, 0.0]) / s
        tangent = np.array([-y0, 1.0, 0.0, 0.0]) / s
        pt = point_with_frame(pos, tangent, E[2], E[3])
        nq = quad_form_at(jet, pt)
        expect = np.array([[y0, -1.0], [-1.0, y0]]) / s  # degree-3 scaling
        assert np.allclose(nq.q, expect, atol=1e-12)
        # eigenvalues (y0 -+ 1)/s, eigenvectors the fixed diagonals
        assert np.allclose(sorted(nq.eigvals), sorted([(y0 - 1) / s, (y0 + 1) / s]))
        for col in nq.eigvecs.T:
            assert min(abs(col @ [1, 1]) / np.sqrt(2), abs(col @ [1, -1]) / np.sqrt(2)) < 1e-9


def test_eigen_data_invariants():
    rng = np.random.default_rng(0)
    for _ in range(50):
        q = rng.standard_normal((2, 2))
        nq = form_from_matrix(q + q.T)
        for lam, v in zip(nq.eigvals, nq.eigvecs.T):
            assert np.linalg.norm(nq.q @ v - lam * v) < 1e-9
        assert abs(np.dot(nq.eigvecs[:, 0], nq.eigvecs[:, 1])) < 1e-12
        assert nq.eigvals[0] >= nq.eigvals[1]


def test_classify_rules():
    assert classify(form_from_matrix([[1, 0], [0, 2]]), CFG) is PointClass.SOLITARY
    assert classify(form_from_matrix([[0, -1], [-1, 0]]), CFG) is PointClass.REAL_CROSSING
    assert classify(form_from_matrix([[1, 0], [0, 1e-9]]), CFG) is PointClass.UMBRELLA
    with pytest.raises(NearGamma):
        classify(form_from_matrix([[1, 0], [0, 1]]), CFG)
    with pytest.raises(NearGamma):
        classify(form_from_matrix([[-2, 1e-6], [1e-6, -2]]), CFG)


def _traced(name):
    from fourfold import SeedRejected

    jet = PolyJet(corpus_entry(name).poly)
    for seed in find_seeds(jet, CFG):
        try:
            comp = trace_component(jet, seed, CFG)
        except SeedRejected:
            continue
        comp.id = 0
        return jet, comp
    raise AssertionError(f"no traceable seed for {name}")


def test_ex6_classification_runs_and_umbrellas():
    jet, comp = _traced("ex6")
    classify_component(jet, comp, CFG)
    assert comp.umbrella_count() == 2
    classes = {pt.cls for pt in comp.points}
    assert PointClass.SOLITARY in classes and PointClass.REAL_CROSSING in classes
    # det sign changes exactly at the umbrella markers
    dets = np.array([pt.quad.det for pt in comp.points])
    flips = int(np.sum(np.sign(dets) != np.sign(np.roll(dets, -1))))
    assert flips == 2
    # umbrella markers sit where det vanishes
    for sp in comp.specials:
        if sp.kind is PointClass.UMBRELLA:
            from fourfold.quadframe import _form_at_point

            base = comp.points[sp.index]
            nq = _form_at_point(jet, sp.position, base.tangent, base.n1)
            assert abs(nq.det) < 1e-10 * max(nq.norm**2, 1e-300)


def test_umbrella_count_is_even_on_every_corpus_loop():
    for name in ("ex4", "ex5", "ex6", "ex7_plus", "ex7_minus"):
        jet, comp = _traced(name)
        classify_component(jet, comp, CFG)
        assert comp.umbrella_count() % 2 == 0


def test_ex5_transport_constant_axes_central_flip():
    jet, comp = _traced("ex5")
    classify_component(jet, comp, CFG)
    fld = transport_eigenframe(jet, comp, CFG)
    assert fld.quarter_turns == 2  # antipodal closure, constant axes
    assert fld.component_count() == 2
    # axes are the coordinate axes e_x, e_y all along the line
    for k in range(0, len(comp.points), 25):
        a1 = fld.axis(k, 0)
        assert max(abs(a1 @ E[0]), abs(a1 @ E[1])) > 1.0 - 1e-9
    # continuity between consecutive samples
    for k in range(len(comp.points) - 1):
        assert abs(fld.axis(k, 0) @ fld.axis(k + 1, 0)) > 0.9


def test_ex7_transport_constant_diagonal_axes():
    jet, comp = _traced("ex7_plus")
    classify_component(jet, comp, CFG)
    fld = transport_eigenframe(jet, comp, CFG)
    assert fld.quarter_turns == 2
    diag1 = (E[2] + E[3]) / np.sqrt(2)
    diag2 = (E[2] - E[3]) / np.sqrt(2)
    for k in range(0, len(comp.points), 20):
        a1 = fld.axis(k, 0)
        assert max(abs(a1 @ diag1), abs(a1 @ diag2)) > 1.0 - 1e-9


def _synthetic_circle_component(n=60, antipodal=False):
    """Round circle in the (e1, e2) plane with constant normal frame (e3, e4)."""
    span = np.pi if antipodal else 2 * np.pi
    pts = []
    for k in range(n):
        th = span * k / n
        pos = np.array([np.cos(th), np.sin(th), 0.0, 0.0])
        tau = np.array([-np.sin(th), np.cos(th), 0.0, 0.0])
        pts.append(point_with_frame(pos, tau, E[2], E[3]))
    return CurveComponent(id=0, points=pts, antipodal_closure=antipodal)


def _field(comp, quarter_turns):
    return EigenField(
        component=comp,
        angles=np.zeros(len(comp.points)),
        quarter_turns=quarter_turns,
        antipodal=comp.antipodal_closure,
    )


def test_pushoff_component_counts_match_monodromy_cycles():
    comp = _synthetic_circle_component()
    for turns, expected in ((0, 4), (2, 2), (1, 1), (3, 1)):
        pc = build_pushoff(comp, _field(comp, turns), CFG, 0.02)
        assert pc.component_count == expected
        assert pc.component_count in (1, 2, 4)
        for loop in pc.loops:
            # distance band: every pushoff vertex about epsilon from the base
            d = np.arccos(np.clip(np.abs(loop.points @ comp.positions().T).max(axis=1), -1, 1))
            assert (d <= 1.5 * np.arctan(0.02) + 1e-12).all()


def test_pushoff_antipodal_singleton_cycles_close_at_antipode():
    comp = _synthetic_circle_component(antipodal=True)
    pc = build_pushoff(comp, _field(comp, 0), CFG, 0.02)
    assert pc.component_count == 4
    assert all(loop.antipodal for loop in pc.loops)
    pc2 = build_pushoff(comp, _field(comp, 2), CFG, 0.02)
    assert pc2.component_count == 2
    assert not any(loop.antipodal for loop in pc2.loops)


def test_near_gamma_aborts_on_isotropic_solitary_line():
    poly = "x^4 + y^4 + x^2*z^2 + x^2*t^2 + y^2*z^2 + y^2*t^2"
    jet = PolyJet(__import__("fourfold").parse_poly(poly))
    comp = trace_component(jet, find_seeds(jet, CFG)[0], CFG)
    comp.id = 0
    with pytest.raises(NearGamma) as err:
        classify_component(jet, comp, CFG)
    assert err.value.point is not None
