"""Green's functions, Böttcher coordinates, equipotentials and ray tracing
at the super-attracting points 0 and infinity."""

from __future__ import annotations

import csv
import io
import math
from functools import lru_cache
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

import numpy as np
from numpy.polynomial import polynomial as P

from .angle_dynamics import RationalAngle, angle, mul_d, orbit
from .core_maps import (FixedPointInfo, GluingForm, Kind, MarkedPoly, Poly, as_rational,
                        classify_multiplier, critical_points, eval_map,
                        periodic_points, unwrap)

EPS_LAND = 1e-10
EPS_LAND_PARABOLIC = 1e-6
MAX_LEVELS = 2000
SUBSTEPS = 8
EPS_POT = 1e-9


class NotInBasin(ValueError):
    pass


class LevelTooDeep(ValueError):
    pass


class InconsistentLanding(ValueError):
    pass


class BasinTag(str, Enum):
    INFINITY = "infinity"
    ORIGIN = "origin"


def _tag(basin) -> BasinTag:
    return BasinTag(basin)


@dataclass(frozen=True)
class LocalModel:
    """A super-attracting fixed point where f = a z^d * ratio(z), ratio -> 1."""

    f: object
    basin: BasinTag
    d: int
    a: complex
    _ratio: Callable = field(repr=False)
    good_radius: float

    @property
    def c(self) -> complex:
        """Böttcher derivative: c^(d-1) = a, principal branch."""
        return self.a ** (1.0 / (self.d - 1))

    def ratio(self, z):
        return self._ratio(np.asarray(z, dtype=complex))

    def in_good_region(self, z) -> np.ndarray:
        z = np.abs(np.asarray(z))
        return z > self.good_radius if self.basin == BasinTag.INFINITY else z < self.good_radius


def local_model(f, basin) -> LocalModel:
    basin = _tag(basin)
    g = unwrap(f)
    if isinstance(g, Poly):
        c = g.low
        if basin == BasinTag.INFINITY:
            d = g.degree
            a = c[-1]
            rev = c[::-1] / a  # coefficients of w^0.. in w = 1/z

            def ratio(z):
                with np.errstate(divide="ignore", invalid="ignore"):
                    w = 1 / z
                return P.polyval(w, rev)

            bound = max([abs(rev[i]) ** (1 / i) for i in range(1, len(rev)) if rev[i] != 0] or [1.0])
            good = 1e4 * max(1.0, bound)
        else:
            if not isinstance(f, MarkedPoly):
                raise ValueError("origin basin needs a MarkedPoly")
            d = f.d0
            a = c[d]
            tail = c[d:] / a

            def ratio(z):
                return P.polyval(z, tail)

            bound = max([abs(tail[i]) ** (1 / i) for i in range(1, len(tail)) if tail[i] != 0] or [1.0])
            good = 1e-4 / max(1.0, bound)
    else:
        zs = np.array(g.zeros, dtype=complex)
        ps = np.array(g.poles, dtype=complex)
        if basin == BasinTag.INFINITY:
            d = g.m + g.k - g.l
            a = g.gamma

            def ratio(z):
                with np.errstate(divide="ignore", invalid="ignore"):
                    w = 1 / z
                r = np.ones_like(w)
                for x in zs:
                    r = r * (1 - x * w)
                for x in ps:
                    r = r / (1 - x * w)
                return r

            mods = np.abs(np.concatenate([zs, ps])) if len(zs) + len(ps) else np.ones(1)
            good = 1e4 * max(1.0, float(mods.max()))
        else:
            d = g.m
            a = g.gamma * np.prod(-zs) / np.prod(-ps) if len(ps) else g.gamma * np.prod(-zs)

            def ratio(z):
                r = np.ones_like(z)
                for x in zs:
                    r = r * (1 - z / x)
                for x in ps:
                    r = r / (1 - z / x)
                return r

            mods = np.abs(np.concatenate([zs, ps])) if len(zs) + len(ps) else np.ones(1)
            good = 1e-4 * min(1.0, float(mods.min()))
    if d < 2:
        raise ValueError("not a super-attracting point")
    return LocalModel(f, basin, int(d), complex(a), ratio, float(good))


def _log_boettcher_series(lm: LocalModel, z: np.ndarray, budget: int):
    """log(phi(z)) by the product formula with principal branches, plus a
    mask of points whose orbit reached the point within budget."""
    z = np.array(z, dtype=complex)
    s = np.log(lm.c * z)
    w = z.copy()
    done = np.zeros(z.shape, bool)
    ok = np.zeros(z.shape, bool)
    scale = 1.0
    far = 1e60 if lm.basin == BasinTag.INFINITY else 1e-60
    for _ in range(budget):
        scale /= lm.d
        live = ~done
        if not live.any():
            break
        r = lm.ratio(w[live])
        s[live] = s[live] + np.log(r) * scale
        w[live] = lm.a * w[live] ** lm.d * r
        aw = np.abs(w)
        hit = (aw > far) if lm.basin == BasinTag.INFINITY else (aw < far)
        hit |= ~np.isfinite(w)
        newly = live & hit
        ok |= newly
        done |= newly
        small = np.zeros(z.shape, bool)
        small[live] = np.abs(r - 1) < 1e-18
        ok |= small
        done |= small
    return s, ok


def green(f, basin, z, budget: int = 2000):
    """Potential log|phi| at infinity or -log|phi| at the origin; 0 for points
    whose orbit does not reach the super-attracting point within budget."""
    lm = local_model(f, basin)
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros(z.shape)
    w = z.copy()
    n = np.zeros(z.shape, int)
    reached = lm.in_good_region(w)
    idx = np.nonzero(~reached)[0]
    wl = w[idx]
    for step in range(1, budget + 1):
        if idx.size == 0:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            wl = eval_map(lm.f, wl)
        bad = ~np.isfinite(wl)
        if lm.basin == BasinTag.INFINITY:
            wl[bad] = 1e300
            lost = np.zeros(wl.shape, bool)
        else:
            lost = bad | (np.abs(wl) > 1e8)
        hit = lm.in_good_region(wl) & ~lost
        if hit.any():
            w[idx[hit]] = wl[hit]
            n[idx[hit]] = step
            reached[idx[hit]] = True
        keep = ~(hit | lost)
        idx, wl = idx[keep], wl[keep]
    if reached.any():
        s, _ = _log_boettcher_series(lm, np.where(w[reached] == 0, 1e-300, w[reached]), 200)
        pot = s.real / float(lm.d) ** n[reached]
        out[reached] = pot if lm.basin == BasinTag.INFINITY else -pot
    out = np.maximum(out, 0.0)
    return float(out[0]) if scalar else out


def green_infinity(f, z, budget: int = 2000):
    return green(f, BasinTag.INFINITY, z, budget)


def green_origin(f, z, budget: int = 2000):
    return green(f, BasinTag.ORIGIN, z, budget)


def boettcher(f, basin, z, budget: int = 2000):
    """phi(z) with phi(f(z)) = phi(z)^d and phi(z) = c z + O(z^2) at the
    point; points far from it are pushed forward and pulled back through
    the root branch closest to the direct product estimate."""
    lm = local_model(f, basin)
    z0 = complex(z)
    orbit_pts = [z0]
    w = z0
    for _ in range(budget):
        if lm.in_good_region(w):
            break
        w = complex(eval_map(lm.f, w))
        if not np.isfinite(w):
            raise NotInBasin("not-in-basin")
        orbit_pts.append(w)
    else:
        raise NotInBasin("not-in-basin")
    s, ok = _log_boettcher_series(lm, np.array([w]), 400)
    if not ok[0]:
        raise NotInBasin("not-in-basin")
    phi = complex(np.exp(s[0]))
    for zz in reversed(orbit_pts[:-1]):
        est, _ = _log_boettcher_series(lm, np.array([zz]), 400)
        guess = complex(np.exp(est[0]))
        roots = [phi ** (1 / lm.d) * np.exp(2j * np.pi * j / lm.d) for j in range(lm.d)]
        phi = min(roots, key=lambda r: abs(r - guess))
    return phi


def boettcher_origin(f: MarkedPoly, z, budget: int = 2000):
    return boettcher(f, BasinTag.ORIGIN, z, budget)


def _boettcher_inverse(lm: LocalModel, u: np.ndarray, iters: int = 80) -> np.ndarray:
    """Solve phi(z) = u in the good region by the contraction z <- z u / phi(z)."""
    u = np.asarray(u, dtype=complex)
    z = u / lm.c
    for _ in range(iters):
        s, _ = _log_boettcher_series(lm, z, 200)
        step = np.exp(np.log(u) - s)
        z = z * step
        if np.all(np.abs(step - 1) < 1e-15):
            break
    return z


def preimages(f, w) -> np.ndarray:
    """All solutions z of f(z) = w for each w, shape (len(w), degree)."""
    r = as_rational(f)
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    n = max(len(r.num), len(r.den)) - 1
    num = np.zeros(n + 1, complex)
    num[: len(r.num)] = r.num
    den = np.zeros(n + 1, complex)
    den[: len(r.den)] = r.den
    c = num[None, :] - w[:, None] * den[None, :]
    lead = c[:, -1]
    M = np.zeros((len(w), n, n), dtype=complex)
    M[:, 0, :] = -(c[:, :-1][:, ::-1]) / lead[:, None]
    if n > 1:
        idx = np.arange(n - 1)
        M[:, idx + 1, idx] = 1
    return np.linalg.eigvals(M)


def _taylor(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Taylor coefficients at z of the polynomials with ascending
    coefficient rows c; column k holds P^(k)(z) / k!."""
    n = c.shape[1] - 1
    b = c[:, ::-1].copy()
    out = np.empty_like(c)
    for k in range(n + 1):
        for i in range(1, n + 1 - k):
            b[:, i] += z * b[:, i - 1]
        out[:, k] = b[:, n - k]
    return out


def nearest_preimage(f, w, ref, newton_iters: int = 12, with_gap: bool = False):
    """Solution of f(z) = w nearest to ref, for each pair (w, ref).

    Newton from ref is accepted when the Smale gamma bound certifies that
    the root it reaches is the unique root within 0.2 / gamma of ref;
    every other entry falls back to the full preimage set. With `with_gap`
    also return, per entry, the ratio of the nearest to the second-nearest
    distance (an upper bound of 0.3 for certified entries)."""
    r = as_rational(f)
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    ref = np.atleast_1d(np.asarray(ref, dtype=complex))
    n = max(len(r.num), len(r.den)) - 1
    num = np.zeros(n + 1, complex)
    num[: len(r.num)] = r.num
    den = np.zeros(n + 1, complex)
    den[: len(r.den)] = r.den
    c = num[None, :] - w[:, None] * den[None, :]
    z = ref.copy()
    with np.errstate(all="ignore"):
        for _ in range(newton_iters):
            t = _taylor(c, z)
            dz = t[:, 0] / t[:, 1]
            z = z - dz
            if np.all(np.abs(dz) <= 1e-15 * (1 + np.abs(z))):
                break
        t = _taylor(c, z)
        scale = np.abs(t[:, 1])
        gamma = np.zeros(len(z))
        for k in range(2, n + 1):
            gamma = np.maximum(gamma, (np.abs(t[:, k]) / scale) ** (1.0 / (k - 1)))
        small = np.abs(t[:, 0]) <= 1e-12 * np.maximum(1.0, np.abs(c).max(axis=1) * (1 + np.abs(z)) ** n)
        ok = small & np.isfinite(z) & (np.abs(z - ref) * gamma < 0.05)
    bad = ~ok
    gap = np.full(len(z), 0.3)
    if bad.any():
        R = preimages(f, w[bad])
        dist = np.abs(R - ref[bad, None])
        order = np.argsort(dist, axis=1)
        rows = np.arange(len(order))
        z[bad] = R[rows, order[:, 0]]
        if n > 1:
            gap[bad] = dist[rows, order[:, 0]] / dist[rows, order[:, 1]]
    return (z, gap) if with_gap else z


@dataclass
class Ray:
    basin: BasinTag
    angle: RationalAngle
    samples: np.ndarray
    log_potentials: np.ndarray
    landed: bool
    landing_point: complex | None = None
    diagnostic: str = ""

    def to_rows(self) -> list[list]:
        return [[self.basin.value, self.angle.num, self.angle.den, i, z.real, z.imag]
                for i, z in enumerate(self.samples)]


@dataclass
class Equipotential:
    basin: BasinTag
    level: float
    samples: np.ndarray

    def to_rows(self) -> list[list]:
        return [[self.basin.value, "", "", i, z.real, z.imag] for i, z in enumerate(self.samples)]


CSV_HEADER = ["basin", "angle_num", "angle_den", "sample_index", "re", "im"]


def to_csv(items: Iterable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for it in items:
        w.writerows(it.to_rows())
    return buf.getvalue()


def forward_closure(angles: Iterable, d: int) -> list[RationalAngle]:
    out: dict[RationalAngle, None] = {}
    for a in angles:
        for t in orbit(a, d).orbit:
            out[t] = None
    return sorted(out)


def _base_potential(lm: LocalModel) -> float:
    r = lm.good_radius
    return math.log(abs(lm.c) * r) if lm.basin == BasinTag.INFINITY else -math.log(abs(lm.c) * r)


def _modulus(lm: LocalModel, pot: float) -> float:
    return math.exp(pot) if lm.basin == BasinTag.INFINITY else math.exp(-pot)


def _pull_back_set(lm: LocalModel, angles: list[RationalAngle], top: float, levels: int,
                   substeps: int = SUBSTEPS, eps_land: float = EPS_LAND,
                   stop_when_landed: bool = True, keep_samples: bool = True):
    """Pull a forward-invariant angle set down from potential `top` through
    `levels` levels; returns per-angle sample lists and potentials."""
    index = {a: i for i, a in enumerate(angles)}
    img = np.array([index[mul_d(a, lm.d)] for a in angles])
    phases = np.exp(2j * np.pi * np.array([float(a) for a in angles]))
    sub_pots = [top / lm.d ** (i / substeps) for i in range(substeps)]
    cur = [_boettcher_inverse(lm, _modulus(lm, p) * phases) for p in sub_pots]
    samples = [[cur[i].copy() for i in range(substeps)]] if keep_samples else []
    pots = [[math.log(p) for p in sub_pots]]
    steps = np.full(len(angles), np.inf)
    level_done = 0
    active = np.ones(len(angles), bool)
    last_level = np.zeros(len(angles), int)
    for k in range(1, levels + 1):
        idx = np.nonzero(active)[0]
        new = [c.copy() for c in cur]
        for i in range(substeps):
            ref = new[i - 1][idx] if i > 0 else cur[substeps - 1][idx]
            new[i][idx] = nearest_preimage(lm.f, cur[i][img[idx]], ref)
        steps[idx] = np.abs(new[0][idx] - cur[0][idx])
        cur = new
        level_done = k
        if keep_samples:
            samples.append([c.copy() for c in cur])
        pots.append([math.log(p) - k * math.log(lm.d) for p in sub_pots])
        if stop_when_landed:
            now = active & (steps < eps_land)
            last_level[now] = k
            active &= ~now
            if not active.any():
                break
    last_level[active] = level_done
    return samples, pots, cur, steps, last_level


def _assemble(samples, pots, idx, upto):
    """Samples of one angle and the logs of their potentials."""
    pts = np.array([lvl[i][idx] for lvl in samples[: upto + 1] for i in range(len(lvl))])
    pp = np.array([p for lvl in pots for p in lvl])
    return pts, pp[: len(pts)]


def trace_rays(f, basin, angles: Iterable, target_potential: float = 0.0,
               max_levels: int = MAX_LEVELS, eps_land: float = EPS_LAND,
               substeps: int = SUBSTEPS) -> dict[RationalAngle, Ray]:
    """Trace every ray in the forward closure of `angles` together."""
    lm = local_model(f, basin)
    base = forward_closure([angle(a) for a in angles], lm.d)
    top = _base_potential(lm)
    levels = max_levels
    if target_potential > 0:
        levels = max(0, math.ceil(math.log(top / target_potential, lm.d)))
    samples, pots, cur, steps, last = _pull_back_set(
        lm, base, top, levels, substeps, eps_land, stop_when_landed=target_potential <= 0)
    out = {}
    for i, a in enumerate(base):
        pts, pp = _assemble(samples, pots, i, last[i])
        if target_potential > 0:
            keep = pp >= math.log(target_potential) - 1e-12
            pts, pp = pts[keep], pp[keep]
            out[a] = Ray(lm.basin, a, pts, pp, False, None, "stopped at target potential")
            continue
        landed = bool(steps[i] < eps_land)
        diag = "" if landed else f"no landing within {last[i]} levels (last step {steps[i]:.2e})"
        out[a] = Ray(lm.basin, a, pts, pp, landed, complex(pts[-1]) if landed else None, diag)
    if target_potential <= 0:
        _accept_parabolic(f, lm, out)
    return out


def _accept_parabolic(f, lm: LocalModel, rays: dict):
    for a, ray in rays.items():
        if ray.landed:
            continue
        o = orbit(a, lm.d)
        if not o.periodic:
            continue
        last_step = abs(ray.samples[-1] - ray.samples[-1 - SUBSTEPS])
        if last_step > EPS_LAND_PARABOLIC:
            continue
        try:
            guess = [rays[t].samples[-1] for t in o.orbit] if all(t in rays for t in o.orbit) else None
            info = _polish_periodic(f, complex(ray.samples[-1]), o.period, guess)
        except InconsistentLanding:
            continue
        if info.kind == Kind.PARABOLIC and abs(info.location - ray.samples[-1]) < 1e-2:
            ray.landed = True
            ray.landing_point = complex(ray.samples[-1])
            ray.diagnostic = "parabolic landing accepted with relaxed tolerance"


def trace_ray(f, basin, theta, target_potential: float = 0.0, **kw) -> Ray:
    a = angle(theta)
    return trace_rays(f, basin, [a], target_potential, **kw)[a]


def _cycle_newton(f, zs: np.ndarray, steps: int = 60) -> np.ndarray:
    """Newton on the cycle system f(z_i) = z_{i+1}, all points at once."""
    d1 = as_rational(f).derivative()
    z = np.array(zs, dtype=complex)
    p = len(z)
    shift = np.roll(np.eye(p), 1, axis=1)
    for _ in range(steps):
        F = eval_map(f, z) - np.roll(z, -1)
        J = np.diag(d1(z)) - shift
        step = np.linalg.lstsq(J, F, rcond=None)[0]
        z = z - step
        if np.max(np.abs(step)) < 1e-15 * max(1.0, float(np.max(np.abs(z)))):
            break
    return z


@lru_cache(maxsize=64)
def _periodic_cached(f, p: int) -> tuple:
    return tuple(periodic_points(f, p))


def _polish_periodic(f, z0: complex, p: int, cycle_guess=None) -> FixedPointInfo:
    d = max(len(as_rational(f).num), len(as_rational(f).den)) - 1
    if d ** p <= 64:
        pts = _periodic_cached(f, p)
        best = min(pts, key=lambda q: abs(q.location - z0))
        if best.multiplicity > 1 and abs(best.location - z0) < 1e-2 * max(1.0, abs(z0)):
            if best.kind in (Kind.ATTRACTING, Kind.SUPER_ATTRACTING):
                raise InconsistentLanding("inconsistent-landing")
            return best
    guess = np.array(cycle_guess if cycle_guess is not None else [z0], dtype=complex)
    if len(guess) != p:
        w = [complex(z0)]
        for _ in range(p - 1):
            w.append(complex(eval_map(f, w[-1])))
        guess = np.array(w)
    cyc = _cycle_newton(f, guess)
    lam = complex(np.prod(as_rational(f).derivative()(cyc)))
    info = FixedPointInfo(complex(cyc[0]), p, lam, classify_multiplier(lam))
    if info.kind in (Kind.ATTRACTING, Kind.SUPER_ATTRACTING):
        raise InconsistentLanding("inconsistent-landing")
    return info


def landing_point(ray: Ray, f, rays: dict | None = None) -> FixedPointInfo:
    """Classified landing point of a periodic ray. `rays` may carry the
    traced rays of the angle's orbit; they are traced here otherwise."""
    lm = local_model(f, ray.basin)
    o = orbit(ray.angle, lm.d)
    if not o.periodic:
        raise ValueError("landing_point needs a periodic angle")
    z0 = ray.landing_point if ray.landing_point is not None else complex(ray.samples[-1])
    guess = None
    if o.period > 1:
        if rays is None or any(t not in rays for t in o.orbit):
            rays = trace_rays(f, ray.basin, [ray.angle])
        guess = [rays[t].samples[-1] for t in o.orbit]
        guess[0] = z0
    return _polish_periodic(f, z0, o.period, guess)


def critical_potential(f, basin) -> float:
    """Largest potential of a critical point (other than the centre) in the basin."""
    lm = local_model(f, basin)
    pts = [z for z, _ in critical_points(f) if np.isfinite(z) and abs(z) > 0]
    if lm.basin == BasinTag.ORIGIN:
        pts = [z for z in pts]
    if not pts:
        return 0.0
    return float(np.max(green(f, basin, np.array(pts))))


def equipotential(f, basin, level: float, n_samples: int = 256) -> Equipotential:
    lm = local_model(f, basin)
    crit = critical_potential(f, basin)
    if level <= crit:
        raise LevelTooDeep("level-too-deep")
    top = _base_potential(lm)
    K = max(0, math.ceil(math.log(top / level, lm.d))) if level < top else 0
    grid = [angle(f"{j}/{n_samples}") for j in range(n_samples)]
    base = forward_closure(grid, lm.d)
    samples, pots, cur, _, _ = _pull_back_set(lm, base, level * lm.d ** K, K,
                                              stop_when_landed=False, keep_samples=False)
    index = {a: i for i, a in enumerate(base)}
    pts = np.array([cur[0][index[a]] for a in grid])
    return Equipotential(lm.basin, level, pts)


def ray_point(f, basin, angle_at: Callable[[int], float], potential: float,
              substeps: int = SUBSTEPS) -> complex:
    """Point of potential `potential` on the ray whose angle after j steps is
    angle_at(j) (floats, so irrational angles are allowed)."""
    lm = local_model(f, basin)
    top = _base_potential(lm)
    n = max(0, math.ceil(math.log(top / potential, lm.d)))
    base_pot = potential * lm.d ** n
    ang = np.exp(2j * np.pi * np.array([angle_at(j) % 1.0 for j in range(n + 1)]))
    cur = [_boettcher_inverse(lm, _modulus(lm, base_pot / lm.d ** (i / substeps)) * ang)
           for i in range(substeps)]
    for _ in range(n):
        new = []
        for i in range(substeps):
            ref = new[i - 1] if i > 0 else cur[substeps - 1][:-1]
            new.append(nearest_preimage(lm.f, cur[i][1:], ref))
        cur = new
    return complex(cur[0][0])


def postcritical_conflicts(f, points: Iterable[complex], budget: int = 500,
                           tol: float = 1e-6) -> list[complex]:
    """Points lying within tol of a forward critical orbit sample."""
    orbit_pts = []
    for c, _ in critical_points(f):
        if not np.isfinite(c) or abs(c) == 0:
            continue
        w = c
        for _ in range(budget):
            w = complex(eval_map(f, w))
            if not np.isfinite(w) or abs(w) > 1e8 or abs(w) < 1e-12:
                break
            orbit_pts.append(w)
    if not orbit_pts:
        return []
    arr = np.array(orbit_pts)
    return [p for p in points if np.min(np.abs(arr - p)) < tol]
