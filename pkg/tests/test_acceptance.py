"""Acceptance criteria, one test each. The terminal summary prints one
PASS/FAIL line per criterion. Run directly with `python tests/test_acceptance.py`."""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from gluing import angle_dynamics as ad
from gluing import closing_lemma as cl
from gluing import gluing_solver as gs
from gluing import puzzle_engine as pe
from gluing import render as rd
from gluing.core_maps import (GluingForm, MarkedPoly, blaschke_form, cubic_family, eval_map,
                              periodic_points, power_map, scaling_class_distance)
from gluing.potential_rays import BasinTag, boettcher, green, landing_point, local_model, trace_rays

from conftest import GOLDEN, PCF_FORM, PUBLISHED_AB


def test_criterion_01_theta0(record_property):
    t = time.perf_counter()
    sols = gs.solve_parabolic_circle(2.0)
    dt = time.perf_counter() - t
    best = min(abs(abs(s.theta) - 0.04892344) for s in sols)
    record_property("theta_err", f"{best:.2e}")
    record_property("seconds", f"{dt:.2f}")
    assert best < 1e-5
    assert dt < 5


def test_criterion_02_self_gluing(self_problem, record_property):
    t = time.perf_counter()
    res = gs.solve_gluing(self_problem)
    target = blaschke_form(3, 0)
    err = scaling_class_distance(res.form, target)
    fps = periodic_points(target, 1)
    at_one = min(fps, key=lambda q: abs(q.location - 1))
    solved_parabolic = min(abs(q.multiplier - 1) for q in periodic_points(res.form, 1))
    dt = time.perf_counter() - t
    record_property("param_err", f"{err:.1e}")
    record_property("mult_err_at_1", f"{abs(at_one.multiplier - 1):.1e}")
    record_property("seconds", f"{dt:.1f}")
    assert err < 1e-6
    assert abs(at_one.location - 1) < 1e-10
    assert abs(at_one.multiplier - 1) < 1e-10
    assert solved_parabolic < 1e-10
    assert dt < 30


@pytest.fixture(scope="module")
def published_report(ab_problem):
    return gs.verify_candidate(PUBLISHED_AB, ab_problem, mult_tol=2e-3, curve_iterations=500,
                               curve_tol=1e-2)


def test_criterion_03_published_ab(ab_problem, published_report, record_property):
    rep = published_report
    curve = rep.get("gluing-curve")
    mult = rep.get("parabolic")
    res = gs.solve_gluing(ab_problem)
    recovery = scaling_class_distance(res.form, PUBLISHED_AB)
    record_property("multiplier_err", f"{mult.detail['multiplier_error']:.2e}")
    record_property("hausdorff", f"{curve.detail.get('hausdorff_residual', float('nan')):.1e}")
    record_property("failed_checks", ",".join(c.name for c in rep.checks if not c.passed) or "none")
    record_property("recovery_err", f"{recovery:.2e}")
    assert curve.passed and curve.detail["iterations"] <= 500
    assert rep.passed
    assert recovery < 5e-4


REFERENCE_RELATIONS = {
    "P2,1": "P1,2", "P2,6": "P1,2", "P2,3": "P1,2",
    "P2,4": "P1,1", "P2,5": "P1,1", "P2,2": "P1,1",
}
# Relabelling of our depth-2 pieces into the reference numbering; depth-1
# labels agree. Derived from the arc and decoration ordering (see README).
RELABEL = {1: 2, 2: 1, 3: 4, 4: 3, 5: 5, 6: 6}


def test_criterion_04_toy_model(record_property):
    a = pe.toy_model(2)
    b = pe.toy_model(2)
    counts = a.counts()
    ours = {f"P2,{RELABEL[p.id[1]]}": p.image_id for p in a.pieces[2]}
    ours = {k: f"P{v[0]},{v[1]}" for k, v in ours.items()}
    golden = (GOLDEN / "toy_depth2.json").read_text()
    record_property("counts", counts)
    assert counts == [1, 2, 6]
    assert ours == REFERENCE_RELATIONS
    assert a.to_json() == b.to_json() == golden


def _brute_force(graph, start, max_len=12):
    """All simple return chains of minimal length <= max_len."""
    best = None
    for k in range(1, max_len + 1):
        found = []
        def walk(chain):
            if len(chain) == k:
                if start in graph.successors(chain[-1]):
                    found.append(list(chain))
                return
            for s in graph.successors(chain[-1]):
                if s not in chain:
                    walk(chain + [s])
        walk([start])
        if found:
            best = (k, sorted(found))
            break
    return best


def _synthetic_graphs():
    out = {
        "full_shift": cl.TransitionGraph.from_edges(
            [("A", "A"), ("A", "B"), ("B", "A"), ("B", "B")], {"c": "A"}),
        "long_cycle": cl.TransitionGraph.from_edges(
            [(f"n{i}", f"n{(i + 1) % 9}") for i in range(9)] + [("n0", "n4"), ("n4", "n2"), ("n6", "n3")],
            {"c": "n0", "c2": "n5"}),
    }
    rng = np.random.default_rng(7)
    for r in range(4):
        nodes = [f"v{i}" for i in range(9)]
        edges = {(a, b) for a in nodes for b in nodes if rng.random() < 0.22}
        edges |= {(nodes[i], nodes[(i + 1) % 9]) for i in range(9)}
        out[f"random_{r}"] = cl.TransitionGraph.from_edges(sorted(edges), {"c": "v0", "c2": "v3"})
    return out


def test_criterion_05_closing_lemma(record_property):
    graphs = {"toy": cl.transition_graph(pe.toy_model(2), 2)}
    graphs.update(_synthetic_graphs())
    checked = 0
    for name, g in graphs.items():
        cands = {}
        for c in sorted(g.critical):
            chain, k = cl.find_candidate(g, c)
            oracle = _brute_force(g, g.critical[c])
            assert oracle is not None, name
            assert k == oracle[0] == len(chain), (name, c)
            assert chain in oracle[1] and chain == oracle[1][0], (name, c)
            assert len(set(chain)) == len(chain)
            cands[c] = chain
            checked += 1
        closed = cl.close_orbit(g, cands)
        assert cl.verify_hyperbolic(closed).passed, name
        assert cl.verify_hyperbolic(cl.close_orbit(g)).passed, name
    record_property("graphs", len(graphs))
    record_property("critical_points", checked)
    assert len(graphs) >= 4


ANALYTIC_MAPS = {
    "z^2": power_map(2),
    "f_beta": cubic_family(4j / 3),
    "blaschke3": blaschke_form(3, 0),
    "published_ab": PUBLISHED_AB,
    "pcf": PCF_FORM,
}


def test_criterion_06_analytic_invariants(record_property):
    rng = np.random.default_rng(1)
    worst_g = worst_b = 0.0
    for name, f in ANALYTIC_MAPS.items():
        basins = [BasinTag.INFINITY] + ([BasinTag.ORIGIN] if isinstance(f, (MarkedPoly, GluingForm)) else [])
        for b in basins:
            d = local_model(f, b).d
            z = rng.uniform(-3, 3, 20000) + 1j * rng.uniform(-3, 3, 20000)
            g = green(f, b, z)
            z = z[(g > 1e-3) & (g < 5)][:100]
            assert len(z) == 100, (name, b)
            fz = eval_map(f, z)
            worst_g = max(worst_g, float(np.abs(green(f, b, fz) - d * green(f, b, z)).max()))
            for x, w in zip(z, fz):
                pw = boettcher(f, b, complex(w))
                worst_b = max(worst_b, abs(pw - boettcher(f, b, complex(x)) ** d) / abs(pw))
    worst_ray = 0.0
    for f, d in ((power_map(2), 2), (cubic_family(4j / 3), 3)):
        angles = sorted({ad.angle(Fraction(n, q)) for q in range(1, 64) if math.gcd(q, d) == 1
                         for n in range(q)})
        rays = trace_rays(f, BasinTag.INFINITY, angles)
        land = {a: landing_point(rays[a], f, rays).location for a in angles}
        worst_ray = max(worst_ray, max(abs(complex(eval_map(f, land[a])) - land[ad.mul_d(a, d)])
                                       for a in angles))
    record_property("green", f"{worst_g:.1e}")
    record_property("boettcher", f"{worst_b:.1e}")
    record_property("ray_equivariance", f"{worst_ray:.1e}")
    assert worst_g < 1e-9 and worst_b < 1e-9
    assert worst_ray < 1e-8


def test_criterion_07_exact_pairing(record_property):
    t = time.perf_counter()
    q = np.concatenate([np.full(k, k) for k in range(1, 1001)])
    n = np.concatenate([np.arange(k) for k in range(1, 1001)])
    keep = np.gcd(n, q) == 1
    n, q = n[keep], q[keep]
    for d0 in (2, 3):
        for k in range(1, d0):
            p = ad.GluingPairing(d0, k)
            pn, pq = ad.pair_batch(*ad.pair_batch(n, q, p), p)
            assert np.array_equal(pn, n) and np.array_equal(pq, q)
            ln, lq = ad.pair_batch(*ad.mul_d_batch(n, q, d0), p)
            rn, rq = ad.mul_d_batch(*ad.pair_batch(n, q, p), d0)
            assert np.array_equal(ln, rn) and np.array_equal(lq, rq)
    dt = time.perf_counter() - t
    # the scalar path agrees with the batch path on a sample
    p = ad.GluingPairing(2, 1)
    for k, den in zip(n[::997], q[::997]):
        a = ad.RationalAngle(int(k), int(den))
        assert ad.pair(ad.pair(a, p), p) == a
        assert ad.pair(ad.mul_d(a, 2), p) == ad.mul_d(ad.pair(a, p), 2)
    record_property("angles", len(n))
    record_property("seconds", f"{dt:.2f}")
    assert dt < 1


def test_criterion_08_compactness(self_solution, record_property):
    forms = [blaschke_form(3, 0), PUBLISHED_AB, PCF_FORM, self_solution.form]
    rep = gs.compactness_report(forms)
    record_property("r_min", f"{rep.r_min:.3f}")
    record_property("delta_min", f"{rep.delta_min:.3f}")
    assert rep.r_min > 0.1 and rep.delta_min > 0.1


def test_criterion_09_shrinking_probe(record_property):
    diam = gs.puzzle_shrinking_probe(blaschke_form(3, 0), range(9))
    record_property("diameters", " ".join(f"{x:.3f}" for x in diam))
    assert all(b <= a + 1e-12 for a, b in zip(diam, diam[1:]))
    assert diam[8] <= 0.5 * diam[0]


GOLDEN_MAPS = {"power2": power_map(2), "blaschke3": blaschke_form(3, 0), "ab": PUBLISHED_AB}


def test_criterion_10_golden_images(record_property):
    for name, f in GOLDEN_MAPS.items():
        data = rd.to_ppm(rd.render(f, rd.View()))
        assert data[:15] == b"P6\n512 512\n255\n"
        assert data == (GOLDEN / f"{name}.ppm").read_bytes(), name
    record_property("images", len(GOLDEN_MAPS))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
