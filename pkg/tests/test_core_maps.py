import cmath

import numpy as np
import pytest

from gluing.core_maps import (GluingForm, Kind, MarkedPoly, Poly, blaschke_form, classify_multiplier,
                              critical_points, cubic_family, eval_map, gamma_one_representatives,
                              map_from_json, map_to_json, normalize_gamma, periodic_points,
                              power_map, scale_conjugate, scaling_class_distance)


def test_gluing_form_degrees_and_eval():
    G = GluingForm(1, 3, (2 + 1j,), (0.1j,))
    assert G.degrees == (2, 3, 3)
    z = np.array([0.3 + 0.2j, -1.5j])
    expect = z ** 3 * (z - (2 + 1j)) / (z - 0.1j)
    assert np.allclose(eval_map(G, z), expect, rtol=1e-14)


def test_blaschke_symmetric_about_unit_circle():
    B = blaschke_form(3, 0)
    z = np.array([0.4 + 0.3j, 2 - 1j, -0.7j])
    assert np.allclose(eval_map(B, 1 / np.conj(z)), 1 / np.conj(eval_map(B, z)), rtol=1e-12)


def test_cubic_family_critical_points():
    f = cubic_family(1 + 1j)
    crit = sorted(critical_points(f), key=lambda c: abs(c[0]))
    assert abs(crit[0][0]) < 1e-12
    assert abs(crit[1][0] - (-(1 + 1j))) < 1e-12


def test_power_map_fixed_points():
    pts = periodic_points(power_map(2), 1)
    locs = sorted((p.location for p in pts), key=abs)
    assert abs(locs[0]) < 1e-14 and abs(locs[1] - 1) < 1e-14
    assert pts[0].kind in (Kind.SUPER_ATTRACTING, Kind.REPELLING)


def test_triple_fixed_point_of_blaschke():
    one = min(periodic_points(blaschke_form(3, 0), 1), key=lambda q: abs(q.location - 1))
    assert one.multiplicity == 3
    assert one.kind == Kind.PARABOLIC


def test_period_two_points_of_z2():
    pts = [p for p in periodic_points(power_map(2), 2) if p.period == 2]
    locs = [p.location for p in pts]
    w = cmath.exp(2j * cmath.pi / 3)
    assert len(pts) == 2
    assert min(abs(z - w) for z in locs) < 1e-12


@pytest.mark.parametrize("lam,kind", [(0, Kind.SUPER_ATTRACTING), (0.5, Kind.ATTRACTING),
                                      (2, Kind.REPELLING), (-1, Kind.PARABOLIC),
                                      (cmath.exp(2j * cmath.pi * 0.5 ** 0.5), Kind.IRRATIONAL)])
def test_classify(lam, kind):
    assert classify_multiplier(lam) == kind


def test_scaling_class_distance_invariance():
    G = GluingForm(1, 3, (1.1 + 1.1j,), (-0.12 + 0.08j,))
    H = scale_conjugate(G, 0.7 - 0.4j)
    assert scaling_class_distance(G, H) < 1e-12
    assert scaling_class_distance(G, normalize_gamma(H)) < 1e-12
    assert all(abs(R.gamma - 1) < 1e-12 for R in gamma_one_representatives(H))
    # the two gamma-one representatives of a cubic gluing are (a, b) and (-a, -b)
    neg = GluingForm(1, 3, (-(1.1 + 1.1j),), (0.12 - 0.08j,))
    assert scaling_class_distance(G, neg) < 1e-12


@pytest.mark.parametrize("f", [power_map(3), cubic_family(4j / 3), Poly((1, 0, 1)),
                               GluingForm(1, 3, (2j,), (0.1,))])
def test_map_json_round_trip(f):
    g = map_from_json(map_to_json(f))
    z = np.array([0.3 + 0.1j, 1.7 - 0.2j])
    assert np.allclose(eval_map(f, z), eval_map(g, z))
    assert type(g) is type(f)


def test_map_json_rejects_garbage():
    with pytest.raises(ValueError):
        map_from_json({"nope": 1})


def test_periodic_points_budget():
    with pytest.raises(ValueError):
        periodic_points(MarkedPoly(Poly((0, 0, 1)), 2), 9)
