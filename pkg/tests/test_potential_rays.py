import cmath
import math

import numpy as np
import pytest

from gluing import angle_dynamics as ad
from gluing.core_maps import blaschke_form, cubic_family, power_map
from gluing.potential_rays import (BasinTag, LevelTooDeep, NotInBasin, boettcher, equipotential,
                                   green, landing_point, nearest_preimage, preimages, ray_point,
                                   to_csv, trace_ray, trace_rays)


def test_green_of_z2_is_log_modulus():
    z = np.array([1.5, 2j, -3 + 1j, 0.5])
    expect = np.maximum(np.log(np.abs(z)), 0)
    assert np.allclose(green(power_map(2), BasinTag.INFINITY, z), expect, atol=1e-13)
    assert np.allclose(green(power_map(2), BasinTag.ORIGIN, 0.5), math.log(2), atol=1e-13)


def test_boettcher_of_z2_is_identity():
    for z in (1.5 + 0.5j, -2j, 3.0):
        assert abs(boettcher(power_map(2), BasinTag.INFINITY, z) - z) < 1e-12


def test_boettcher_outside_basin():
    with pytest.raises(NotInBasin):
        boettcher(cubic_family(4j / 3), BasinTag.INFINITY, 0.0)


@pytest.mark.parametrize("t", ["1/3", "2/7", "1/5"])
def test_z2_rays_land_on_circle(t):
    ray = trace_ray(power_map(2), BasinTag.INFINITY, t)
    assert ray.landed
    assert abs(ray.landing_point - cmath.exp(2j * math.pi * float(ad.angle(t)))) < 1e-8
    assert np.all(np.diff(ray.log_potentials) <= 0)


def test_landing_point_classification():
    rays = trace_rays(power_map(2), BasinTag.INFINITY, ["1/3"])
    info = landing_point(rays[ad.angle("1/3")], power_map(2), rays)
    assert info.period == 2 and abs(abs(info.multiplier) - 4) < 1e-8


def test_parabolic_landing_of_fixed_ray():
    from gluing.gluing_solver import analyze_side

    info = analyze_side(cubic_family(4j / 3))["fixed_point"]
    assert abs(info.multiplier - 1) < 1e-8


def test_equipotential_of_z2():
    eq = equipotential(power_map(2), BasinTag.INFINITY, 0.5, 64)
    assert np.allclose(np.abs(eq.samples), math.exp(0.5), rtol=1e-12)


def test_equipotential_too_deep():
    f = cubic_family(3)  # free critical point escapes
    with pytest.raises(LevelTooDeep):
        equipotential(f, BasinTag.INFINITY, 1e-12, 16)


def test_ray_point_has_requested_potential():
    f = blaschke_form(3, 0)
    z = ray_point(f, BasinTag.INFINITY, lambda k: (0.25 * 3 ** k) % 1.0, 0.01)
    assert abs(green(f, BasinTag.INFINITY, z) - 0.01) < 1e-9


def test_nearest_preimage_agrees_with_eigenvalues():
    rng = np.random.default_rng(0)
    for f in (blaschke_form(3, 0), power_map(3)):
        w = rng.normal(size=500) + 1j * rng.normal(size=500)
        ref = 2 * (rng.normal(size=500) + 1j * rng.normal(size=500))
        R = preimages(f, w)
        expect = R[np.arange(500), np.argmin(np.abs(R - ref[:, None]), axis=1)]
        assert np.allclose(nearest_preimage(f, w, ref), expect, atol=1e-12)


def test_csv_is_deterministic():
    rays = trace_rays(power_map(2), BasinTag.INFINITY, ["1/3"])
    a = to_csv(rays.values())
    b = to_csv(trace_rays(power_map(2), BasinTag.INFINITY, ["1/3"]).values())
    assert a == b and a.startswith("basin,angle_num,angle_den,sample_index,re,im\n")
