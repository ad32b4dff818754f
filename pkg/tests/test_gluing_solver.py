import json

import numpy as np
import pytest

from gluing import gluing_solver as gs
from gluing.core_maps import GluingForm, blaschke_form, cubic_family, scaling_class_distance

from conftest import DATA, PCF_FORM


@pytest.fixture(scope="module")
def pcf_problem():
    return gs.problem_from_json(json.loads((DATA / "pcf.json").read_text()))


def test_parabolic_circle_symmetric_pair():
    sols = gs.solve_parabolic_circle(2.0)
    assert len(sols) == 2
    assert sols[0].theta == pytest.approx(-sols[1].theta, abs=1e-12)
    for s in sols:
        assert abs(s.multiplier - 1) < 1e-12 and abs(abs(s.point) - 1) < 1e-12


def test_parabolic_circle_rejects_small_c():
    with pytest.raises(ValueError):
        gs.solve_parabolic_circle(0.5)


def test_problem_json_round_trip(ab_problem):
    again = gs.problem_from_json(gs.problem_to_json(ab_problem))
    assert again == ab_problem


def test_problem_shape(ab_problem):
    assert ab_problem.degrees == (2, 3, 3)
    assert ab_problem.form_shape == (3, 1, 1)
    kinds = [type(c).__name__ for c in ab_problem.constraints]
    assert kinds == ["ParabolicFixed", "CriticalOnCurve"]


def test_escaping_side_is_not_admissible():
    with pytest.raises(ValueError, match="not admissible"):
        gs.gluing_problem(cubic_family(3), cubic_family(3))


def test_pcf_solve_and_verify(pcf_problem):
    res = gs.solve_gluing(pcf_problem)
    assert res.residual < 1e-10
    assert scaling_class_distance(res.form, PCF_FORM) < 1e-10
    rep = gs.verify_candidate(res.form, pcf_problem, curve_iterations=200, check_rays=False)
    assert rep.passed, rep.checks


def test_solve_from_seed(pcf_problem):
    seed = GluingForm(1, 3, (-1.9j,), (-0.13j,))
    res = gs.solve_gluing(pcf_problem, seed=seed)
    assert scaling_class_distance(res.form, PCF_FORM) < 1e-10


def test_verify_rejects_wrong_map(self_problem):
    rep = gs.verify_candidate(PCF_FORM, self_problem, curve_iterations=100, check_rays=False)
    assert not rep.passed and not rep.get("parabolic").passed
    ok = gs.verify_candidate(blaschke_form(3, 0), self_problem, curve_iterations=200, check_rays=False)
    assert ok.passed


def test_blaschke_curve_is_unit_circle():
    c = gs.trace_gluing_curve(blaschke_form(3, 0), iterations=100)
    assert np.abs(np.abs(c.samples) - 1).max() < 1e-2
    assert gs.winding_number(c.samples) == 1
    assert gs.curve_invariance(blaschke_form(3, 0), c) < 1e-2


def test_winding_and_hausdorff():
    t = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    circle = np.exp(1j * t)
    assert gs.winding_number(circle) == 1
    assert gs.winding_number(circle, 2.0) == 0
    assert gs.hausdorff(circle, 1.1 * circle) == pytest.approx(0.1)


def test_compactness_report():
    rep = gs.compactness_report([blaschke_form(3, 0), PCF_FORM])
    assert rep.r_min == pytest.approx(0.125) and rep.R_max == pytest.approx(3)
    assert rep.healthy(0.1, 10, 0.1)
    with pytest.raises(ValueError):
        gs.compactness_report([])


def test_symmetry_residual():
    assert gs.symmetry_residual(blaschke_form(3, 0), 1.0) < 1e-12
    assert gs.symmetry_residual(PCF_FORM, 1.0) > 1e-3
