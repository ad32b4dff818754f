"""Exact rational angles (in full turns) under multiplication by d, and the
orientation-reversing identification of the two circle coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

import numpy as np


@total_ordering
@dataclass(frozen=True)
class RationalAngle:
    num: int
    den: int

    def __post_init__(self):
        if self.den < 1:
            raise ValueError("denominator must be >= 1")
        n = self.num % self.den
        g = math.gcd(n, self.den)
        object.__setattr__(self, "num", n // g)
        object.__setattr__(self, "den", self.den // g)

    @classmethod
    def of(cls, x) -> "RationalAngle":
        if isinstance(x, RationalAngle):
            return x
        if isinstance(x, str):
            x = Fraction(x)
        fr = Fraction(x)
        return cls(fr.numerator, fr.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __float__(self) -> float:
        return self.num / self.den

    def __lt__(self, other: "RationalAngle") -> bool:
        return self.num * other.den < other.num * self.den

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"

    def __repr__(self) -> str:
        return f"RationalAngle({self.num}/{self.den})"


def angle(x) -> RationalAngle:
    """Build an angle from 'n/d', a Fraction, an int or a RationalAngle."""
    return RationalAngle.of(x)


def mul_d(theta, d: int) -> RationalAngle:
    if d < 2:
        raise ValueError("d must be >= 2")
    t = angle(theta)
    return RationalAngle((d * t.num) % t.den, t.den)


def preimages(theta, d: int) -> list[RationalAngle]:
    t = angle(theta).fraction
    return sorted(angle((t + j) / d) for j in range(d))


@dataclass(frozen=True)
class Orbit:
    preperiod: int
    period: int
    orbit: tuple

    @property
    def periodic(self) -> bool:
        return self.preperiod == 0


def orbit(theta, d: int) -> Orbit:
    """Exact eventual period and preperiod; `orbit` lists every distinct angle."""
    seen: dict[RationalAngle, int] = {}
    seq = []
    t = angle(theta)
    while t not in seen:
        seen[t] = len(seq)
        seq.append(t)
        t = mul_d(t, d)
    start = seen[t]
    return Orbit(start, len(seq) - start, tuple(seq))


@dataclass(frozen=True)
class GluingPairing:
    d0: int
    k: int = 1

    def __post_init__(self):
        if self.d0 < 2 or not 1 <= self.k <= self.d0 - 1:
            raise ValueError("need d0 >= 2 and 1 <= k <= d0 - 1")


def pair(theta_g, p: GluingPairing) -> RationalAngle:
    """(k/(d0-1) - theta) mod 1."""
    t = angle(theta_g)
    return RationalAngle(p.k * t.den - t.num * (p.d0 - 1), t.den * (p.d0 - 1))


def _reduce(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    num = num % den
    g = np.gcd(num, den)
    return num // g, den // g


def mul_d_batch(num, den, d: int) -> tuple[np.ndarray, np.ndarray]:
    """mul_d on integer arrays of numerators and denominators."""
    return _reduce(d * np.asarray(num, np.int64), np.asarray(den, np.int64))


def pair_batch(num, den, p: GluingPairing) -> tuple[np.ndarray, np.ndarray]:
    """pair on integer arrays of numerators and denominators."""
    num, den = np.asarray(num, np.int64), np.asarray(den, np.int64)
    return _reduce(p.k * den - num * (p.d0 - 1), den * (p.d0 - 1))


def characteristic_angle_orbit(theta, d0: int = 2) -> Orbit:
    """Doubling orbit of a characteristic angle of the cubic family."""
    return orbit(theta, d0)


def cyclic_between(a, x, b) -> bool:
    """True when x lies strictly inside the counterclockwise arc from a to b.
    An arc from a to itself is the full circle minus a."""
    a, x, b = (angle(v).fraction for v in (a, x, b))
    if x == a or x == b:
        return False
    if a == b:
        return True
    return (x - a) % 1 < (b - a) % 1


def reverses_orientation(f, a, b, c) -> bool:
    """True when f maps a positively ordered triple to a negatively ordered one."""
    pos = cyclic_between(a, b, c)
    return pos != cyclic_between(f(a), f(b), f(c))


def digits(theta, base: int, n: int) -> list[int]:
    """First n base-`base` digits of theta in [0, 1)."""
    t = angle(theta).fraction
    out = []
    for _ in range(n):
        t *= base
        dgt = int(t)
        out.append(dgt)
        t -= dgt
    return out


def recode(theta, from_base: int, to_base: int) -> RationalAngle:
    """Reinterpret the base-`from_base` expansion of theta as a base-`to_base`
    expansion with the same digits. Exact for rational angles."""
    if to_base < from_base:
        raise ValueError("target base must not be smaller")
    o = orbit(theta, from_base)
    pre = o.orbit[: o.preperiod]
    cyc = o.orbit[o.preperiod:]
    dig = lambda t: int(t.fraction * from_base)
    pre_d = [dig(t) for t in pre]
    cyc_d = [dig(t) for t in cyc]
    val = Fraction(0)
    for i, dgt in enumerate(pre_d):
        val += Fraction(dgt, to_base ** (i + 1))
    p = len(cyc_d)
    block = sum(Fraction(dgt, to_base ** (i + 1)) for i, dgt in enumerate(cyc_d))
    val += block / to_base ** len(pre_d) * Fraction(to_base ** p, to_base ** p - 1)
    return angle(val)


def recode_float(t: float, from_base: int, to_base: int, n: int = 60) -> float:
    """Float version of `recode` for irrational angles, truncated at n digits."""
    t = t % 1.0
    val = 0.0
    scale = 1.0
    for _ in range(n):
        t *= from_base
        dgt = int(t)
        t -= dgt
        scale /= to_base
        val += dgt * scale
    return val


def boundary_external_angle(t, d0: int, d: int) -> RationalAngle:
    """External angle (base d) of the point with internal angle t on the
    boundary of the marked basin, for a degree-d polynomial whose free
    critical points stay off that boundary: the base-d0 digits are kept."""
    return recode(t, d0, d)


def gamma_to_origin_angle(t, d0: int, d2: int, k: int = 1) -> RationalAngle:
    """Angle at the origin of the glued map for the curve point with
    internal angle t (in the f coordinate)."""
    tau = pair(t, GluingPairing(d0, k))
    return angle(-boundary_external_angle(tau, d0, d2).fraction)


def gamma_to_infinity_angle(t, d0: int, d1: int) -> RationalAngle:
    """Angle at infinity of the glued map for the curve point with internal
    angle t (in the f coordinate)."""
    return boundary_external_angle(t, d0, d1)


def gamma_to_origin_angle_float(t: float, d0: int, d2: int, k: int = 1) -> float:
    tau = (k / (d0 - 1) - t) % 1.0
    return (-recode_float(tau, d0, d2)) % 1.0


def to_str(theta) -> str:
    return str(angle(theta))
