from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gluing import angle_dynamics as ad

fractions = st.builds(Fraction, st.integers(-5000, 5000), st.integers(1, 5000))


@given(fractions, st.sampled_from([(2, 1), (3, 1), (3, 2), (4, 2)]))
def test_pair_involution_and_equivariance(x, dk):
    d0, k = dk
    p = ad.GluingPairing(d0, k)
    a = ad.angle(x)
    assert ad.pair(ad.pair(a, p), p) == a
    assert ad.pair(ad.mul_d(a, d0), p) == ad.mul_d(ad.pair(a, p), d0)


@given(fractions)
def test_angle_normalised(x):
    a = ad.angle(x)
    assert 0 <= a.fraction < 1 and a.fraction == x % 1


@given(fractions, st.integers(2, 5))
def test_preimages_map_back(x, d):
    pre = ad.preimages(x, d)
    assert len(set(pre)) == d
    assert all(ad.mul_d(t, d) == ad.angle(x) for t in pre)


def test_batch_matches_scalar():
    num = np.array([1, 3, 5, 7, 0, 11])
    den = np.array([3, 8, 12, 15, 1, 1000])
    p = ad.GluingPairing(2, 1)
    pn, pq = ad.pair_batch(num, den, p)
    mn, mq = ad.mul_d_batch(num, den, 2)
    for i in range(len(num)):
        a = ad.RationalAngle(int(num[i]), int(den[i]))
        assert ad.pair(a, p) == ad.RationalAngle(int(pn[i]), int(pq[i]))
        assert ad.mul_d(a, 2) == ad.RationalAngle(int(mn[i]), int(mq[i]))


def test_orbit_periods():
    o = ad.orbit("1/7", 2)
    assert o.periodic and o.period == 3
    o = ad.orbit("1/4", 2)
    assert o.preperiod == 2 and o.period == 1


def test_recode_keeps_digits():
    # binary 0.0101... read in base 3
    assert ad.recode("1/3", 2, 3) == ad.angle("1/8")
    assert ad.recode("1/2", 2, 3) == ad.angle("1/3")
    assert ad.recode("0", 2, 3) == ad.angle(0)
    # period is preserved by recoding digits
    assert ad.orbit(ad.recode("1/7", 2, 3), 3).period == 3


def test_cyclic_between():
    assert ad.cyclic_between("1/4", "1/3", "1/2")
    assert ad.cyclic_between("3/4", "0", "1/4")
    assert not ad.cyclic_between("1/4", "3/4", "1/2")


def test_pairing_validation():
    with pytest.raises(ValueError):
        ad.GluingPairing(2, 2)
    with pytest.raises(ValueError):
        ad.mul_d("1/3", 1)
