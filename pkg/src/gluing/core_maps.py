"""Polynomial and rational-map arithmetic: evaluation, derivatives, critical
points, periodic points and multiplier classification."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from numpy.polynomial import polynomial as P

INFINITY = complex(math.inf, math.inf)

EPS_MULT = 1e-6
Q_MAX = 24


def is_infinity(z) -> bool:
    return cmath.isinf(complex(z))


def _cx(z) -> complex:
    return complex(z)


@dataclass(frozen=True)
class Poly:
    """Polynomial with coefficients stored from degree 0 upward."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(complex(x) for x in self.coeffs)
        if len(c) < 2:
            raise ValueError("polynomial degree must be >= 1")
        if c[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def low(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def __call__(self, z):
        return eval_map(self, z)


@dataclass(frozen=True)
class MarkedPoly:
    """Polynomial with a super-attracting fixed point of local degree d0 at 0."""

    poly: Poly
    d0: int

    def __post_init__(self):
        c = self.poly.coeffs
        if self.d0 < 2 or self.d0 > self.poly.degree:
            raise ValueError("need 2 <= d0 <= degree")
        if any(c[j] != 0 for j in range(self.d0)) or c[self.d0] == 0:
            raise ValueError("origin is not a super-attracting fixed point of degree d0")

    @property
    def degree(self) -> int:
        return self.poly.degree

    def __call__(self, z):
        return eval_map(self.poly, z)


@dataclass(frozen=True)
class GluingForm:
    """gamma * z^m * prod(z - zeros) / prod(z - poles)."""

    gamma: complex
    m: int
    zeros: tuple = ()
    poles: tuple = ()

    def __post_init__(self):
        g = complex(self.gamma)
        zs = tuple(complex(x) for x in self.zeros)
        ps = tuple(complex(x) for x in self.poles)
        if g == 0:
            raise ValueError("gamma must be nonzero")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if any(x == 0 for x in zs + ps):
            raise ValueError("zeros and poles must be nonzero")
        if any(a == b for a in zs for b in ps):
            raise ValueError("a zero coincides with a pole")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "poles", ps)

    @property
    def k(self) -> int:
        return len(self.zeros)

    @property
    def l(self) -> int:
        return len(self.poles)

    @property
    def degrees(self) -> tuple[int, int, int]:
        """(d0, d1, d2) read off from m = d2, k = d1 - d0, l = d2 - d0."""
        d2 = self.m
        d0 = self.m - self.l
        return d0, self.k + d0, d2

    @property
    def degree(self) -> int:
        return max(self.m + self.k, self.l)

    def numerator(self) -> np.ndarray:
        """Coefficients, degree 0 upward, including gamma."""
        c = np.zeros(self.m + 1, dtype=complex)
        c[-1] = self.gamma
        return P.polymul(c, P.polyfromroots(self.zeros) if self.zeros else [1.0])

    def denominator(self) -> np.ndarray:
        return P.polyfromroots(self.poles).astype(complex) if self.poles else np.ones(1, complex)

    def __call__(self, z):
        return eval_map(self, z)


Map = Union[Poly, MarkedPoly, GluingForm]


@dataclass(frozen=True)
class RationalFunction:
    """num/den with coefficient arrays from degree 0 upward."""

    num: np.ndarray
    den: np.ndarray

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return P.polyval(z, self.num) / P.polyval(z, self.den)

    def derivative(self) -> "RationalFunction":
        n = P.polysub(P.polymul(P.polyder(self.num), self.den), P.polymul(self.num, P.polyder(self.den)))
        return RationalFunction(np.atleast_1d(n), P.polymul(self.den, self.den))


def as_rational(f: Map) -> RationalFunction:
    if isinstance(f, MarkedPoly):
        f = f.poly
    if isinstance(f, Poly):
        return RationalFunction(f.low, np.ones(1, complex))
    return RationalFunction(f.numerator(), f.denominator())


def unwrap(f: Map):
    return f.poly if isinstance(f, MarkedPoly) else f


def eval_map(f: Map, z):
    """Evaluate a map; poles and the point at infinity map to INFINITY."""
    f = unwrap(f)
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty_like(z)
    inf = np.isinf(z)
    zf = np.where(inf, 0, z)
    if isinstance(f, Poly):
        out = np.polyval(f.low[::-1], zf)
        out[inf] = INFINITY
    else:
        num = f.gamma * zf ** f.m
        for a in f.zeros:
            num = num * (zf - a)
        den = np.ones_like(zf)
        for b in f.poles:
            den = den * (zf - b)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = num / den
        out[den == 0] = INFINITY
        if f.m + f.k > f.l:
            out[inf] = INFINITY
        elif f.m + f.k == f.l:
            out[inf] = f.gamma
        else:
            out[inf] = 0
    return complex(out[0]) if scalar else out


def derivative(f: Map):
    """Poly -> Poly (or the zero polynomial as a RationalFunction); GluingForm -> RationalFunction."""
    f = unwrap(f)
    if isinstance(f, Poly):
        d = P.polyder(f.low)
        if len(d) >= 2 and d[-1] != 0:
            return Poly(tuple(d))
        return RationalFunction(np.atleast_1d(d), np.ones(1, complex))
    return as_rational(f).derivative()


def log_derivative(f: Map, z):
    """f'(z)/f(z)."""
    f = unwrap(f)
    z = np.asarray(z, dtype=complex)
    if isinstance(f, GluingForm):
        s = f.m / z
        for a in f.zeros:
            s = s + 1 / (z - a)
        for b in f.poles:
            s = s - 1 / (z - b)
        return s
    return np.polyval(P.polyder(f.low)[::-1], z) / np.polyval(f.low[::-1], z)


def deriv_values(f: Map, z, order: int = 1):
    """Values of the first `order` derivatives at z, as a list."""
    r = as_rational(f)
    out = []
    for _ in range(order):
        r = r.derivative()
        out.append(r(z))
    return out


# Root extraction.

def _polish(coeffs_low: np.ndarray, z: complex, mult: int, steps: int = 30) -> complex:
    c = coeffs_low
    for _ in range(max(mult - 1, 0)):
        c = P.polyder(c)
    dc = P.polyder(c)
    for _ in range(steps):
        fz = P.polyval(z, c)
        dfz = P.polyval(z, dc) if len(dc) else 0
        if dfz == 0:
            break
        step = fz / dfz
        z = z - step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return complex(z)


def roots_with_multiplicity(coeffs_low, cluster_tol: float = 1e-4) -> list[tuple[complex, int]]:
    """Roots of a polynomial with multiplicities; clustered eigenvalues are
    replaced by their centroid and polished on the matching derivative."""
    c = np.trim_zeros(np.asarray(coeffs_low, dtype=complex), "b")
    if len(c) < 2:
        return []
    raw = np.roots(c[::-1])
    raw = raw[np.argsort(np.abs(raw))]
    used = np.zeros(len(raw), bool)
    out = []
    for i, r in enumerate(raw):
        if used[i]:
            continue
        tol = cluster_tol * max(1.0, abs(r))
        members = [j for j in range(len(raw)) if not used[j] and abs(raw[j] - r) < tol]
        for j in members:
            used[j] = True
        mult = len(members)
        centre = complex(np.mean(raw[members]))
        if abs(centre) < 1e-300:
            out.append((0j, mult))
            continue
        out.append((_polish(c, centre, mult), mult))
    return out


def critical_points(f: Map, include_infinity: bool = False) -> list[tuple[complex, int]]:
    """Finite critical points as (point, local degree)."""
    g = unwrap(f)
    if isinstance(g, Poly):
        num = P.polyder(g.low)
    else:
        r = as_rational(g).derivative()
        num = r.num
    out = [(z, m + 1) for z, m in roots_with_multiplicity(num)]
    if isinstance(g, GluingForm):
        out = [(z, d) for z, d in out if not any(abs(z - b) < 1e-12 for b in g.poles)]
    if include_infinity:
        d_inf = abs(_degree_at_infinity(g))
        if d_inf >= 2:
            out.append((INFINITY, d_inf))
    return out


def _degree_at_infinity(g) -> int:
    if isinstance(g, Poly):
        return g.degree
    return g.m + g.k - g.l


# Periodic points and multipliers.

class Kind(str, Enum):
    ATTRACTING = "attracting"
    SUPER_ATTRACTING = "super-attracting"
    REPELLING = "repelling"
    PARABOLIC = "parabolic"
    IRRATIONAL = "indifferent-irrational"


def classify_multiplier(lam, eps: float = EPS_MULT, q_max: int = Q_MAX) -> Kind:
    lam = complex(lam)
    r = abs(lam)
    if r < eps:
        return Kind.SUPER_ATTRACTING
    if r < 1 - eps:
        return Kind.ATTRACTING
    if r > 1 + eps:
        return Kind.REPELLING
    for q in range(1, q_max + 1):
        if abs(lam ** q - 1) < eps:
            return Kind.PARABOLIC
    return Kind.IRRATIONAL


@dataclass(frozen=True)
class FixedPointInfo:
    location: complex
    period: int
    multiplier: complex
    kind: Kind
    multiplicity: int = 1
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "location": [self.location.real, self.location.imag],
            "period": self.period,
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "kind": self.kind.value,
            "multiplicity": self.multiplicity,
            "converged": self.converged,
        }


def _homogeneous(f) -> tuple[np.ndarray, np.ndarray, int]:
    r = as_rational(f)
    d = max(len(r.num), len(r.den)) - 1
    return r.num, r.den, d


def iterate_rational(f: Map, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Numerator and denominator of f^p (degree 0 upward)."""
    num, den, d = _homogeneous(f)
    Pn, Qn = num.copy(), den.copy()
    for _ in range(p - 1):
        newP = np.zeros(1, complex)
        newQ = np.zeros(1, complex)
        Ppow = [np.ones(1, complex)]
        Qpow = [np.ones(1, complex)]
        for _ in range(d):
            Ppow.append(P.polymul(Ppow[-1], Pn))
            Qpow.append(P.polymul(Qpow[-1], Qn))
        for i in range(d + 1):
            term = P.polymul(Ppow[i], Qpow[d - i])
            if i < len(num) and num[i] != 0:
                newP = P.polyadd(newP, num[i] * term)
            if i < len(den) and den[i] != 0:
                newQ = P.polyadd(newQ, den[i] * term)
        Pn, Qn = newP, newQ
    return Pn, Qn


def orbit_multiplier(f: Map, z: complex, p: int) -> complex:
    d1 = as_rational(f).derivative()
    lam = 1 + 0j
    w = complex(z)
    for _ in range(p):
        lam *= complex(d1(w))
        w = eval_map(f, w)
    return lam


def _minimal_period(f: Map, z: complex, p: int, tol: float) -> int:
    w = complex(z)
    for j in range(1, p + 1):
        w = eval_map(f, w)
        if p % j == 0 and abs(w - z) < tol * max(1.0, abs(z)):
            return j
    return p


def periodic_points(f: Map, period: int, eps: float = EPS_MULT, q_max: int = Q_MAX,
                    max_degree: int = 64) -> list[FixedPointInfo]:
    """All finite solutions of f^p(z) = z, with multiplicity, minimal period,
    multiplier of f^p and classification. Roots that fail to polish are
    returned with converged=False."""
    if period < 1:
        raise ValueError("period must be >= 1")
    deg = as_rational(f)
    d = max(len(deg.num), len(deg.den)) - 1
    if d ** period > max_degree:
        raise ValueError(f"degree^period = {d ** period} exceeds budget {max_degree}")
    Pn, Qn = iterate_rational(f, period)
    eq = P.polysub(Pn, P.polymul([0, 1], Qn))
    out = []
    for z, mult in roots_with_multiplicity(eq):
        resid = abs(P.polyval(z, eq)) / max(1.0, np.abs(eq).max())
        lam = orbit_multiplier(f, z, period)
        out.append(FixedPointInfo(
            location=z,
            period=_minimal_period(f, z, period, 1e-8),
            multiplier=lam,
            kind=classify_multiplier(lam, eps, q_max),
            multiplicity=mult,
            converged=bool(resid < 1e-8),
        ))
    return out


def infinity_is_fixed(f: Map) -> bool:
    return _degree_at_infinity(unwrap(f)) >= 1


# Constructors and normalisation.

def power_map(d: int) -> MarkedPoly:
    c = [0j] * d + [1 + 0j]
    return MarkedPoly(Poly(tuple(c)), d)


def cubic_family(alpha) -> MarkedPoly:
    """z^3 + (3/2) alpha z^2, critical points 0 and -alpha."""
    alpha = complex(alpha)
    return MarkedPoly(Poly((0, 0, 1.5 * alpha, 1)), 2)


def blaschke_form(c: float, theta: float = 0.0) -> GluingForm:
    """e^{2 pi i theta} z^3 (z - c) / (1 - c z)."""
    rot = cmath.exp(2j * math.pi * theta)
    return GluingForm(-rot / c, 3, (c,), (1 / c,))


def scale_conjugate(g: GluingForm, lam: complex) -> GluingForm:
    """lam^{-1} G(lam z)."""
    lam = complex(lam)
    d1 = g.m + g.k - g.l
    return GluingForm(g.gamma * lam ** (d1 - 1), g.m,
                      tuple(a / lam for a in g.zeros), tuple(b / lam for b in g.poles))


def gamma_one_representatives(g: GluingForm) -> list[GluingForm]:
    """All scaling conjugates with gamma = 1 (one per (d1-1)-th root)."""
    d1 = g.m + g.k - g.l
    if d1 - 1 == 0:
        return [g]
    n = d1 - 1
    base = (1 / g.gamma) ** (1 / n)
    return [scale_conjugate(g, base * cmath.exp(2j * math.pi * j / n)) for j in range(n)]


def normalize_gamma(g: GluingForm, reference: GluingForm | None = None) -> GluingForm:
    """gamma = 1 representative; nearest to `reference` when given, else the
    one whose first zero (or pole) has the largest real part."""
    reps = gamma_one_representatives(g)
    if reference is not None:
        return min(reps, key=lambda r: scaling_distance_params(r, reference))
    key = lambda r: (r.zeros or r.poles or (0,))[0].real
    return max(reps, key=key)


def scaling_distance_params(g1: GluingForm, g2: GluingForm) -> float:
    if (g1.m, g1.k, g1.l) != (g2.m, g2.k, g2.l):
        return math.inf
    a = np.array(g1.zeros + g1.poles + (g1.gamma,))
    b = np.array(g2.zeros + g2.poles + (g2.gamma,))
    return float(np.abs(a - b).max())


def scaling_class_distance(g1: GluingForm, g2: GluingForm) -> float:
    """Parameter distance between gamma = 1 representatives, minimised over
    the root-of-unity ambiguity."""
    r1 = gamma_one_representatives(g1)
    r2 = gamma_one_representatives(g2)
    return min(scaling_distance_params(a, b) for a in r1 for b in r2)


# JSON.

def _pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _unpair(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


def map_to_json(f: Map) -> dict:
    if isinstance(f, MarkedPoly):
        return {"coeffs": [_pair(c) for c in f.poly.coeffs], "d0": f.d0}
    if isinstance(f, Poly):
        return {"coeffs": [_pair(c) for c in f.coeffs]}
    return {"gamma": _pair(f.gamma), "m": f.m,
            "zeros": [_pair(a) for a in f.zeros], "poles": [_pair(b) for b in f.poles]}


def map_from_json(obj: dict) -> Map:
    """Accepts the map and polynomial schemas plus the shorthands
    {"power": d} and {"cubic_alpha": [re, im]}."""
    if "power" in obj:
        return power_map(int(obj["power"]))
    if "cubic_alpha" in obj:
        return cubic_family(_unpair(obj["cubic_alpha"]))
    if "gamma" in obj:
        return GluingForm(_unpair(obj["gamma"]), int(obj["m"]),
                          tuple(_unpair(a) for a in obj.get("zeros", [])),
                          tuple(_unpair(b) for b in obj.get("poles", [])))
    if "coeffs" in obj:
        poly = Poly(tuple(_unpair(c) for c in obj["coeffs"]))
        if "d0" in obj:
            return MarkedPoly(poly, int(obj["d0"]))
        return poly
    raise ValueError("unrecognised map JSON")


def as_marked(f: Map) -> MarkedPoly:
    """Wrap a Poly as MarkedPoly by reading the local degree at 0."""
    if isinstance(f, MarkedPoly):
        return f
    if isinstance(f, Poly):
        d0 = next(j for j, c in enumerate(f.coeffs) if c != 0)
        return MarkedPoly(f, d0)
    raise TypeError("not a polynomial")
