"""Find and verify the rational map in normal form that realises a gluing."""

from __future__ import annotations

import math
from functools import lru_cache
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np
from scipy.optimize import brentq, least_squares, minimize_scalar
from scipy.spatial.distance import directed_hausdorff

from . import angle_dynamics as ad
from .core_maps import (GluingForm, Kind, MarkedPoly, _unpair, as_marked, critical_points,
                        cubic_family, deriv_values, eval_map, log_derivative, map_from_json,
                        map_to_json, normalize_gamma, periodic_points, scaling_class_distance)
from .potential_rays import (BasinTag, equipotential, green, landing_point, local_model, nearest_preimage, preimages,
                             ray_point, trace_rays, forward_closure, boettcher, NotInBasin, _boettcher_inverse, _modulus, _base_potential)

CURVE_POTENTIAL = 1e-8
SOLVE_TOL = 1e-8
# Critical points this close to a basin boundary (in potential) are treated
# as lying on it, since parameters given to a few digits never hit it exactly.
BOUNDARY_TOL = 1e-6
GUARD_TOL = 0.05


class SolverFailed(RuntimeError):
    def __init__(self, message: str, best: GluingForm | None = None, residual: float = math.inf):
        super().__init__(message)
        self.best = best
        self.residual = residual


class NoParabolicFound(RuntimeError):
    pass


class CurveThroughCriticalPoint(RuntimeError):
    pass


# Parabolic points on the unit circle for the rotated Blaschke family.

@dataclass(frozen=True)
class CircleSolution:
    theta: float
    point: complex
    multiplier: complex


def solve_parabolic_circle(c: float, grid: int = 720) -> list[CircleSolution]:
    """Rotations theta making e^{2 pi i theta} z^3 (z-c)/(1-cz) have a fixed
    point of multiplier 1 on the unit circle. The fixed-point condition fixes
    theta once t is known, so the system reduces to mult(e^{it}) = 1."""
    if not c > 1:
        raise ValueError("need real c > 1")

    def mult(t: float) -> float:
        z = np.exp(1j * t)
        return float((3 + z / (z - c) + c * z / (1 - c * z)).real) - 1.0

    ts = np.linspace(0, 2 * np.pi, grid + 1)
    vals = np.array([mult(t) for t in ts])
    out = []
    for i in range(grid):
        if vals[i] == 0 or vals[i] * vals[i + 1] < 0:
            t = brentq(mult, ts[i], ts[i + 1], xtol=1e-15) if vals[i] != 0 else ts[i]
            z = np.exp(1j * t)
            B = z ** 3 * (z - c) / (1 - c * z)
            theta = (t - np.angle(B)) / (2 * np.pi)
            theta = (theta + 0.5) % 1.0 - 0.5
            p = complex(z)
            lam = complex(z * (3 / z + 1 / (z - c) + c / (1 - c * z)))
            out.append(CircleSolution(float(theta), p, lam))
    if not out:
        raise NoParabolicFound("no-parabolic-found")
    uniq: list[CircleSolution] = []
    for s in sorted(out, key=lambda s: s.theta):
        if not uniq or abs(s.theta - uniq[-1].theta) > 1e-9:
            uniq.append(s)
    return uniq


# Problem description.

@dataclass(frozen=True)
class ParabolicFixed:
    """A fixed point on the gluing curve with multiplier 1 and `petals` petals."""
    petals: int = 1
    gamma_angle: str = "0"


@dataclass(frozen=True)
class CriticalOnCurve:
    """The free critical point of one side sits on the curve at this angle
    (in the f coordinate of the curve)."""
    side: str
    gamma_angle: float


@dataclass(frozen=True)
class CriticalPeriodic:
    side: str
    period: int = 1


Constraint = Union[ParabolicFixed, CriticalOnCurve, CriticalPeriodic]


@dataclass
class GluingProblem:
    f_spec: MarkedPoly
    g_spec: MarkedPoly
    d0: int = 2
    k_choice: int = 1
    constraints: list = field(default_factory=list)
    symmetric: bool = False

    @property
    def degrees(self) -> tuple[int, int, int]:
        return self.d0, self.f_spec.degree, self.g_spec.degree

    @property
    def form_shape(self) -> tuple[int, int, int]:
        d0, d1, d2 = self.degrees
        return d2, d1 - d0, d2 - d0


def _free_critical(f: MarkedPoly) -> list[complex]:
    return [z for z, _ in critical_points(f) if abs(z) > 1e-12]


def _periodic_period(f, z: complex, max_period: int = 12, tol: float = 1e-9) -> int | None:
    w = z
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, max_period + 1):
            w = complex(eval_map(f, w))
            if abs(w - z) < tol * max(1.0, abs(z)):
                return n
    return None


def characteristic_angle(f: MarkedPoly, c: complex, n: int = 512) -> float:
    """Internal angle of the boundary point of the marked basin nearest to c."""
    eq = equipotential(f, BasinTag.ORIGIN, 1e-7, n)
    j = int(np.argmin(np.abs(eq.samples - c)))

    def dist(t: float) -> float:
        z = ray_point(f, BasinTag.ORIGIN, lambda k: (t * 2 ** k) % 1.0, 1e-9)
        return abs(z - c)

    res = minimize_scalar(dist, bounds=((j - 1) / n, (j + 1) / n), method="bounded",
                          options={"xatol": 1e-11})
    return float(res.x % 1.0)


@lru_cache(maxsize=32)
def analyze_side(f: MarkedPoly) -> dict:
    """Boundary fixed point multiplier and the fate of each free critical point."""
    ray = trace_rays(f, BasinTag.ORIGIN, ["0"])[ad.angle(0)]
    fp = landing_point(ray, f)
    info = {"fixed_point": fp, "critical": []}
    for c in _free_critical(f):
        per = _periodic_period(f, c)
        if per is not None:
            info["critical"].append(("periodic", c, per))
            continue
        w = c
        for _ in range(4000):
            w = complex(eval_map(f, w))
            if abs(w) > 1e8:
                break
        if abs(w) > 1e8 and green(f, BasinTag.INFINITY, c) > BOUNDARY_TOL:
            info["critical"].append(("escaping", c, None))
        elif abs(w) > 1e8:
            info["critical"].append(("boundary", c, characteristic_angle(f, c)))
        elif fp.kind == Kind.PARABOLIC and abs(w - fp.location) < 1e-2:
            info["critical"].append(("parabolic", c, None))
        elif green(f, BasinTag.ORIGIN, c) > BOUNDARY_TOL:
            info["critical"].append(("captured", c, None))
        else:
            info["critical"].append(("boundary", c, characteristic_angle(f, c)))
    return info


def gluing_problem(f: MarkedPoly, g: MarkedPoly, k_choice: int = 1) -> GluingProblem:
    """Derive constraints from the dynamics of the two polynomials."""
    if f.d0 != g.d0:
        raise ValueError("local degrees at 0 differ")
    d0 = f.d0
    cons: list = []
    petals = 0
    for side, poly in (("f", f), ("g", g)):
        info = analyze_side(poly)
        if info["fixed_point"].kind == Kind.PARABOLIC:
            petals += info["fixed_point"].multiplicity - 1
        for kind, c, data in info["critical"]:
            if kind == "periodic":
                cons.append(CriticalPeriodic(side, data))
            elif kind == "boundary":
                t = data if side == "f" else (k_choice / (d0 - 1) - data) % 1.0
                cons.append(CriticalOnCurve(side, t))
            elif kind in ("escaping", "captured"):
                raise ValueError(f"{side}: free critical point not admissible ({kind})")
    if petals:
        cons.insert(0, ParabolicFixed(petals))
    return GluingProblem(f, g, d0, k_choice, cons, symmetric=(f == g))


def cubic_problem(alpha, beta) -> GluingProblem:
    return gluing_problem(cubic_family(alpha), cubic_family(beta))



def problem_to_json(p: GluingProblem) -> dict:
    cons = []
    for c in p.constraints:
        if isinstance(c, ParabolicFixed):
            cons.append({"kind": "parabolic", "petals": c.petals, "gamma_angle": c.gamma_angle})
        elif isinstance(c, CriticalOnCurve):
            cons.append({"kind": "critical-on-curve", "side": c.side, "gamma_angle": c.gamma_angle})
        else:
            cons.append({"kind": "critical-periodic", "side": c.side, "period": c.period})
    return {"f": map_to_json(p.f_spec), "g": map_to_json(p.g_spec), "d0": p.d0,
            "k_choice": p.k_choice, "constraints": cons, "symmetric": p.symmetric}


def problem_from_json(obj: dict) -> GluingProblem:
    """Either {"alpha", "beta"} for the cubic family, or {"f", "g"} with
    optional explicit "constraints" (derived from the dynamics otherwise)."""
    if "alpha" in obj:
        f, g = cubic_family(_unpair(obj["alpha"])), cubic_family(_unpair(obj["beta"]))
    else:
        f, g = (as_marked(map_from_json(obj[s])) for s in ("f", "g"))
    k = int(obj.get("k_choice", 1))
    if "constraints" not in obj:
        return gluing_problem(f, g, k)
    cons = []
    for c in obj["constraints"]:
        kind = c["kind"]
        if kind == "parabolic":
            cons.append(ParabolicFixed(int(c.get("petals", 1)), str(c.get("gamma_angle", "0"))))
        elif kind == "critical-on-curve":
            cons.append(CriticalOnCurve(c["side"], float(c["gamma_angle"])))
        elif kind == "critical-periodic":
            cons.append(CriticalPeriodic(c["side"], int(c.get("period", 1))))
        else:
            raise ValueError(f"unknown constraint kind: {kind}")
    return GluingProblem(f, g, f.d0, k, cons, bool(obj.get("symmetric", f == g)))

# Residuals.

def _side_critical(G: GluingForm, side: str) -> complex:
    free = sorted((z for z, _ in critical_points(G) if abs(z) > 1e-12), key=abs)
    return free[-1] if side == "f" else free[0]


def _basin_angle(t, basin, degrees, k_choice: int, offset) -> ad.RationalAngle:
    d0, d1, d2 = degrees
    if BasinTag(basin) == BasinTag.INFINITY:
        base = ad.gamma_to_infinity_angle(t, d0, d1)
    else:
        base = ad.gamma_to_origin_angle(t, d0, d2, k_choice)
    return ad.angle(base.fraction + Fraction(offset))


@lru_cache(maxsize=256)
def curve_offsets(G: GluingForm, k_choice: int = 1) -> tuple[Fraction, Fraction]:
    """Rotations j/(d-1) of the Böttcher coordinates at infinity and at 0
    matching the curve coordinate. The gamma = 1 normal form fixes each only
    up to such a rotation. The right pair traces the same curve from both
    sides, winding once around 0."""
    d0, d1, d2 = G.degrees
    curves = {}
    for basin, d in ((BasinTag.INFINITY, d1), (BasinTag.ORIGIN, d2)):
        for j in range(max(1, d - 1)):
            off = Fraction(j, max(1, d - 1))
            try:
                c = trace_gluing_curve(G, iterations=40, n_samples=63, k_choice=k_choice,
                                       offset=off, basin=basin)
                curves[basin, off] = c.samples
            except CurveThroughCriticalPoint:
                pass
    scored = []
    for (b1, o1), c1 in curves.items():
        if b1 != BasinTag.INFINITY:
            continue
        for (b2, o2), c2 in curves.items():
            if b2 != BasinTag.ORIGIN:
                continue
            # median, since samples near parabolic points converge slowly
            gap = float(np.median(np.abs(c1 - c2)))
            scored.append((winding_number(c1) != 1 or winding_number(c2) != 1, gap, o1, o2))
    if not scored:
        return Fraction(0), Fraction(0)
    _, _, o1, o2 = min(scored)
    return o1, o2


def origin_offset(G: GluingForm, k_choice: int = 1) -> Fraction:
    return curve_offsets(G, k_choice)[1]


def infinity_offset(G: GluingForm, k_choice: int = 1) -> Fraction:
    return curve_offsets(G, k_choice)[0]


def _critical_curve_target(G: GluingForm, con: CriticalOnCurve, d0: int, k: int,
                           potential: float = CURVE_POTENTIAL, offsets=(0.0, 0.0)) -> complex:
    """Point of the ray reaching the critical value of `con`, just inside the basin."""
    _, d1, d2 = G.degrees
    t = con.gamma_angle
    if con.side == "f":
        fn = lambda j: (ad.gamma_to_origin_angle_float((t * d0 ** (j + 1)) % 1.0, d0, d2, k)
                        + offsets[1]) % 1.0
        return ray_point(G, BasinTag.ORIGIN, fn, potential)
    fn = lambda j: (ad.recode_float((t * d0 ** (j + 1)) % 1.0, d0, d1) + offsets[0]) % 1.0
    return ray_point(G, BasinTag.INFINITY, fn, potential)


def curve_guard(G: GluingForm, problem: GluingProblem, potential: float = CURVE_POTENTIAL,
                offsets=None) -> float:
    """Largest distance from a critical point constrained to the curve to
    the ray point at its own angle. The residual only pins the critical
    value, which is also met by points on the boundary of other preimages
    of the basin."""
    d0, d1, d2 = problem.degrees
    if offsets is None:
        offsets = tuple(map(float, curve_offsets(G, problem.k_choice)))
    worst = 0.0
    for con in problem.constraints:
        if not isinstance(con, CriticalOnCurve):
            continue
        t = con.gamma_angle
        if con.side == "f":
            fn = lambda j: (ad.gamma_to_origin_angle_float((t * d0 ** j) % 1.0, d0, d2, problem.k_choice)
                            + offsets[1]) % 1.0
            Y = ray_point(G, BasinTag.ORIGIN, fn, potential)
        else:
            fn = lambda j: (ad.recode_float((t * d0 ** j) % 1.0, d0, d1) + offsets[0]) % 1.0
            Y = ray_point(G, BasinTag.INFINITY, fn, potential)
        worst = max(worst, abs(Y - _side_critical(G, con.side)))
    return worst


def constraint_residuals(G: GluingForm, problem: GluingProblem, aux: dict,
                         offsets=(0.0, 0.0)) -> np.ndarray:
    res: list[complex] = []
    for con in problem.constraints:
        if isinstance(con, ParabolicFixed):
            p = aux["p"]
            vals = deriv_values(G, p, con.petals)
            res.append(complex(eval_map(G, p)) - p)
            res.append(complex(vals[0]) - 1)
            res.extend(complex(v) for v in vals[1:])
        elif isinstance(con, CriticalPeriodic):
            c = _side_critical(G, con.side)
            w = c
            for _ in range(con.period):
                w = complex(eval_map(G, w))
            res.append((w - c) / c)  # relative, so the collapse c -> 0 is not a zero
        elif isinstance(con, CriticalOnCurve):
            X = _critical_curve_target(G, con, problem.d0, problem.k_choice, offsets=offsets)
            res.append(X - complex(eval_map(G, _side_critical(G, con.side))))
    return np.array(res, dtype=complex)


# Parametrisations.

class _Params:
    """Maps a real vector to (GluingForm, aux) with gamma = 1."""

    def __init__(self, problem: GluingProblem):
        self.problem = problem
        self.m, self.k, self.l = problem.form_shape
        self.parabolic = next((c for c in problem.constraints if isinstance(c, ParabolicFixed)), None)
        self.reduced = self.parabolic is not None and self.k == 1 and self.l == 1
        self.offsets = (0.0, 0.0)
        self.needs_offset = any(isinstance(c, CriticalOnCurve) for c in problem.constraints)

    def from_p(self, p: complex) -> tuple[complex, complex]:
        m = self.m
        a = p + (p ** (m - 1) - 1) / ((m - 1) * p ** (m - 2))
        b = p - p ** (m - 1) * (p - a)
        return a, b

    def build(self, x: np.ndarray):
        z = x[0::2] + 1j * x[1::2]
        if self.reduced:
            p = complex(z[0])
            a, b = self.from_p(p)
            return GluingForm(1, self.m, (a,), (b,)), {"p": p}
        zs = tuple(z[: self.k])
        ps = tuple(z[self.k: self.k + self.l])
        aux = {"p": complex(z[self.k + self.l])} if self.parabolic is not None else {}
        return GluingForm(1, self.m, zs, ps), aux

    def residual(self, x: np.ndarray) -> np.ndarray:
        try:
            G, aux = self.build(x)
            r = constraint_residuals(G, self.problem, aux, self.offsets)
            if self.reduced:
                r = r[2:]  # fixed-point and multiplier equations hold by construction
        except (ValueError, ZeroDivisionError, np.linalg.LinAlgError, IndexError):
            r = np.full(self.n_eq, 1e6 + 0j)
        if not np.all(np.isfinite(r)):
            r = np.full(len(r), 1e6 + 0j)
        return np.concatenate([r.real, r.imag])

    @property
    def n_eq(self) -> int:
        n = 0
        for c in self.problem.constraints:
            n += c.petals + 1 if isinstance(c, ParabolicFixed) else 1
        return n - 2 if self.reduced else n


def _pack(vals: Iterable[complex]) -> np.ndarray:
    out = []
    for v in vals:
        out += [complex(v).real, complex(v).imag]
    return np.array(out)


@dataclass
class SolveResult:
    form: GluingForm
    residual: float
    seed: GluingForm | None
    history: list = field(default_factory=list)
    aux: dict = field(default_factory=dict)


def _valid(G: GluingForm, delta: float = 1e-3) -> bool:
    rep = compactness_report([G])
    return rep.r_min > delta and rep.delta_min > delta and rep.R_max < 1e3


def _seeds(params: _Params, grid: int) -> list[np.ndarray]:
    """Polar grid in the parabolic point (reduced case) or in zeros/poles."""
    radii = np.geomspace(0.15, 4.0, grid)
    args = (np.arange(grid) + 0.5) * 2 * np.pi / grid
    ring = [r * np.exp(1j * a) for r in radii for a in args]
    if params.reduced:
        return [_pack([p]) for p in ring]
    sub_r = np.geomspace(0.15, 4.0, max(2, grid // 4))
    sub_a = (np.arange(4) + 0.5) * np.pi / 2
    small = [r * np.exp(1j * a) for r in sub_r for a in sub_a]
    seeds = []
    for a in small:
        for b in small:
            vals = [a] * params.k + [b] * params.l
            if params.parabolic is not None:
                vals.append((a + b) / 2)
            seeds.append(_pack(vals))
    return seeds


def _cheap_score(params: _Params, x: np.ndarray) -> float:
    """Screening score: residual of the algebraic constraints, and for
    curve constraints the potentials of the critical point in both basins."""
    try:
        G, aux = params.build(x)
    except (ValueError, ZeroDivisionError):
        return math.inf
    if not _valid(G, 1e-2):
        return math.inf
    score = 0.0
    for con in params.problem.constraints:
        if isinstance(con, CriticalOnCurve):
            s = _curve_score(G, con, params.problem, aux)
            if not math.isfinite(s):
                return math.inf
            score += s
        elif isinstance(con, CriticalPeriodic):
            c = _side_critical(G, con.side)
            w = c
            for _ in range(con.period):
                w = complex(eval_map(G, w))
            score += abs(w - c)
        elif isinstance(con, ParabolicFixed) and not params.reduced:
            p = aux["p"]
            vals = deriv_values(G, p, con.petals)
            score += abs(complex(eval_map(G, p)) - p) + sum(abs(complex(v)) for v in vals[1:])
            score += abs(complex(vals[0]) - 1)
        elif isinstance(con, ParabolicFixed) and con.petals > 1:
            vals = deriv_values(G, aux["p"], con.petals)
            score += sum(abs(complex(v)) for v in vals[1:])
    if "p" in aux:
        score += _unattracted(G, params.problem, aux["p"])
    return score


def _orbit_end(G, z: complex, n: int) -> complex:
    w = z
    for _ in range(n):
        w = complex(eval_map(G, w))
        if not np.isfinite(w) or abs(w) > 1e6 or abs(w) < 1e-6:
            break
    return w


def _curve_score(G: GluingForm, con: CriticalOnCurve, problem: GluingProblem, aux: dict) -> float:
    """Potential of the critical point plus the distance of its Böttcher angle
    from the target angle, up to the rotations of the normal form."""
    d0, d1, d2 = problem.degrees
    c = _side_critical(G, con.side)
    if "p" in aux and abs(_orbit_end(G, c, 300) - aux["p"]) < 2e-2:
        return math.inf
    for basin, target, d in (
            (BasinTag.INFINITY, ad.recode_float(con.gamma_angle, d0, d1), G.k + G.m - G.l),
            (BasinTag.ORIGIN, ad.gamma_to_origin_angle_float(con.gamma_angle, d0, d2, problem.k_choice), G.m)):
        pot = float(green(G, basin, c, 300))
        if pot > 0:
            try:
                phi = boettcher(G, basin, c, 300)
            except NotInBasin:
                return math.inf
            s = np.angle(phi) / (2 * np.pi)
            dist = min(abs((s - target - j / (d - 1) + 0.5) % 1.0 - 0.5) for j in range(d - 1))
            return pot + dist
    return 1.0  # trapped by some other attractor


def _unattracted(G: GluingForm, problem: GluingProblem, p: complex) -> float:
    """1 for each free critical point without a constraint that is not
    attracted to the parabolic point."""
    sides = {c.side for c in problem.constraints if isinstance(c, (CriticalOnCurve, CriticalPeriodic))}
    out = 0.0
    for side in ("f", "g"):
        if side not in sides and abs(_orbit_end(G, _side_critical(G, side), 300) - p) > 2e-2:
            out += 1.0
    return out


def _seed_vector(params: _Params, seed: GluingForm) -> np.ndarray:
    seed = normalize_gamma(seed)
    if params.reduced:
        fps = [q for q in periodic_points(seed, 1) if abs(q.location) > 1e-9]
        p = min(fps, key=lambda q: abs(q.multiplier - 1)).location
        return _pack([p])
    vals = list(seed.zeros) + list(seed.poles)
    if params.parabolic is not None:
        fps = [q for q in periodic_points(seed, 1) if abs(q.location) > 1e-9]
        vals.append(min(fps, key=lambda q: abs(q.multiplier - 1)).location)
    return _pack(vals)


def _descend(params: _Params, x0: np.ndarray, history: list):
    def fun(x):
        r = params.residual(x)
        try:
            G, _ = params.build(x)
            rep = compactness_report([G])
            history.append({"r_min": rep.r_min, "R_max": rep.R_max, "delta_min": rep.delta_min,
                            "residual": float(np.abs(r).max())})
        except ValueError:
            pass
        return r

    if params.needs_offset:
        params.offsets = tuple(map(float, curve_offsets(params.build(x0)[0], params.problem.k_choice)))
    sol = least_squares(fun, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        diff_step=1e-7, max_nfev=400)
    return sol.x, float(np.abs(sol.fun).max())


def solve_gluing(problem: GluingProblem, seed: GluingForm | None = None, grid: int = 16,
                 keep: int = 4, tol: float = SOLVE_TOL) -> SolveResult:
    """Damped least squares from a seed or from the best grid seeds."""
    params = _Params(problem)
    if not problem.constraints:
        raise ValueError("problem has no constraints")
    history: list = []
    if seed is not None:
        starts = [_seed_vector(params, seed)]
    else:
        cands = _seeds(params, grid)
        scores = np.array([_cheap_score(params, x) for x in cands])
        order = np.argsort(scores, kind="stable")
        starts, forms = [], []
        for i in order:
            if len(starts) == keep or not np.isfinite(scores[i]):
                break
            G = params.build(cands[i])[0]
            if any(scaling_class_distance(G, H) < 1e-9 for H in forms):
                continue
            starts.append(cands[i])
            forms.append(G)
    best = None
    for x0 in starts:
        x, r = _descend(params, x0, history)
        try:
            G, aux = params.build(x)
        except ValueError:
            continue
        if not _valid(G) or curve_guard(G, problem) > GUARD_TOL:
            continue
        if best is None or r < best[1]:
            best = (G, r, aux, x0)
        if r < tol:
            break
    if best is None:
        raise SolverFailed("solver-failed")
    G, r, aux, x0 = best
    if not any(isinstance(c, CriticalOnCurve) for c in problem.constraints):
        G = normalize_gamma(G)
    if r > tol:
        raise SolverFailed("solver-failed", G, r)
    seed_form = seed if seed is not None else params.build(x0)[0]
    return SolveResult(G, r, seed_form, history, aux)


# Gluing curve.

@dataclass
class GluingCurve:
    samples: np.ndarray
    gamma_angles: np.ndarray
    iteration_count: int
    hausdorff_residual: float
    residual_history: list = field(default_factory=list)
    min_critical_distance: float = math.inf


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    A = np.column_stack([a.real, a.imag])
    B = np.column_stack([b.real, b.imag])
    return max(directed_hausdorff(A, B)[0], directed_hausdorff(B, A)[0])


def winding_number(curve: np.ndarray, point: complex = 0j) -> int:
    w = np.asarray(curve) - point
    dphi = np.angle(np.roll(w, -1) / w)
    return int(round(dphi.sum() / (2 * np.pi)))


def trace_gluing_curve(G: GluingForm, iterations: int = 500, n_samples: int = 255,
                       tol: float = 1e-12, substeps: int = 2, k_choice: int = 1,
                       offset: Fraction | None = None, basin=BasinTag.ORIGIN) -> GluingCurve:
    """Pull back a small curve around 0 (or a large one around infinity)
    through the ray structure of that basin. Samples sit at curve angles
    j/n_samples; n_samples should be of the form d0^q - 1 so the angle set
    is closed under multiplication by d0."""
    d0, d1, d2 = G.degrees
    basin = BasinTag(basin)
    lm = local_model(G, basin)
    d = lm.d
    if offset is None:
        offset = curve_offsets(G, k_choice)[0 if basin == BasinTag.INFINITY else 1]
    ts = [ad.angle(f"{j}/{n_samples}") for j in range(n_samples)]
    s_of = {t: _basin_angle(t, basin, G.degrees, k_choice, offset) for t in ts}
    basin_angles = sorted(set(s_of.values()))
    closure = forward_closure(basin_angles, d)
    index = {a: i for i, a in enumerate(closure)}
    img = np.array([index[ad.mul_d(a, d)] for a in closure])
    phases = np.exp(2j * np.pi * np.array([float(a) for a in closure]))
    top = _base_potential(lm)
    sub = [top / d ** (i / substeps) for i in range(substeps)]
    cur = [_boettcher_inverse(lm, _modulus(lm, p) * phases) for p in sub]
    pick = np.array([index[s_of[t]] for t in ts])
    prev_curve = cur[0][pick].copy()
    history = []
    residual = math.inf
    it = 0
    crit = np.array([z for z, _ in critical_points(G) if abs(z) > 1e-12])
    ambiguous = False
    for it in range(1, iterations + 1):
        new = []
        for i in range(substeps):
            ref = new[i - 1] if i > 0 else cur[substeps - 1]
            z, gap = nearest_preimage(G, cur[i][img], ref, with_gap=True)
            if it > 5:
                ambiguous |= bool(np.any(gap > 0.999))
            new.append(z)
        cur = new
        curve = cur[0][pick]
        residual = hausdorff(curve, prev_curve)
        history.append(residual)
        prev_curve = curve.copy()
        if residual < tol:
            break
    curve = prev_curve
    mind = float(np.min(np.abs(curve[:, None] - crit[None, :]))) if len(crit) else math.inf
    if ambiguous and mind < 1e-9:
        raise CurveThroughCriticalPoint("curve-through-critical-point")
    return GluingCurve(curve, np.array([float(t) for t in ts]), it, residual, history, mind)


def curve_invariance(G: GluingForm, curve: GluingCurve) -> float:
    """sup over samples of dist(G(sample), curve)."""
    img = eval_map(G, curve.samples)
    return float(np.max(np.min(np.abs(img[:, None] - curve.samples[None, :]), axis=1)))


# Diagnostics.

@dataclass(frozen=True)
class CompactnessReport:
    r_min: float
    R_max: float
    delta_min: float

    def healthy(self, r: float = 0.0, R: float = math.inf, delta: float = 0.0) -> bool:
        return self.r_min > r and self.R_max < R and self.delta_min > delta


def compactness_report(forms: list[GluingForm]) -> CompactnessReport:
    if not forms:
        raise ValueError("empty family")
    mods = [abs(x) for G in forms for x in G.zeros + G.poles]
    seps = [abs(a - b) for G in forms for a in G.zeros for b in G.poles]
    r_min = min(mods) if mods else math.inf
    R_max = max(mods) if mods else 0.0
    delta = min(seps) if seps else math.inf
    return CompactnessReport(float(r_min), float(R_max), float(delta))


def symmetry_residual(G: GluingForm, radius: float, n: int = 64) -> float:
    """max |G(r^2/conj z) - r^2/conj G(z)| over a sample grid off the circle."""
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    z = np.concatenate([0.7 * radius * np.exp(1j * t), 1.4 * radius * np.exp(1j * (t + 0.1))])
    lhs = eval_map(G, radius ** 2 / np.conj(z))
    rhs = radius ** 2 / np.conj(eval_map(G, z))
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))))


# Boundary conjugacy by ray co-landing.

@dataclass
class ConjugacyReport:
    agree: bool
    rotation: str
    mismatches: list
    inconclusive: list
    dynamics_residual: float
    classes_f: list
    classes_G: list


def _colanding(points: dict, tol: float) -> list[frozenset]:
    keys = sorted(points)
    classes: list[list] = []
    for a in keys:
        for cl in classes:
            if abs(points[cl[0]] - points[a]) < tol:
                cl.append(a)
                break
        else:
            classes.append([a])
    return sorted((frozenset(c) for c in classes), key=lambda s: min(s))


def _landings(f, basin, angles, max_levels: int) -> tuple[dict, list, dict]:
    rays = trace_rays(f, basin, angles, max_levels=max_levels)
    pts, bad = {}, []
    for a in angles:
        r = rays[a]
        if not r.landed:
            bad.append(a)
            continue
        if ad.orbit(a, local_model(f, basin).d).periodic:
            try:
                pts[a] = landing_point(r, f, rays).location
            except ValueError:
                bad.append(a)
        else:
            pts[a] = r.landing_point
    return pts, bad, rays


def boundary_conjugacy_check(G: GluingForm, f: MarkedPoly, side, angle_set,
                             tol: float = 1e-6, max_levels: int = 2000) -> ConjugacyReport:
    """Compare which rays co-land for f and for G. The gamma = 1 form fixes
    the Böttcher coordinate of G only up to a rotation by j/(d-1); every
    such rotation is tried and the best match reported."""
    side = BasinTag(side)
    angles = sorted(ad.angle(a) for a in angle_set)
    d = local_model(G, side).d
    pf, bad_f, _ = _landings(f, BasinTag.INFINITY, angles, max_levels)
    best = None
    for j in range(d - 1):
        shift = ad.angle(f"{j}/{d - 1}")
        shifted = [ad.angle(a.fraction + shift.fraction) for a in angles]
        pG_raw, bad_G_raw, _ = _landings(G, side, shifted, max_levels)
        back = {s: a for s, a in zip(shifted, angles)}
        pG = {back[s]: z for s, z in pG_raw.items()}
        bad_G = [back[s] for s in bad_G_raw]
        common = {a for a in angles if a in pf and a in pG}
        cf = _colanding({a: pf[a] for a in common}, tol)
        cg = _colanding({a: pG[a] for a in common}, tol)
        mism = sorted(set(cf) ^ set(cg), key=lambda s: min(s))
        dyn = 0.0
        for a in common:
            b = ad.mul_d(a, d)
            if b in pG:
                dyn = max(dyn, abs(complex(eval_map(G, pG[a])) - pG[b]))
        cand = ConjugacyReport(not mism, str(shift), [sorted(map(str, s)) for s in mism],
                               sorted(map(str, set(bad_f) | set(bad_G))), dyn,
                               [sorted(map(str, s)) for s in cf], [sorted(map(str, s)) for s in cg])
        if best is None or (len(cand.mismatches), cand.dynamics_residual) < (len(best.mismatches), best.dynamics_residual):
            best = cand
    return best


# Verification.

@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class VerifyReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def default_angle_set(d: int, max_period: int = 4) -> list:
    """Periodic angles of period <= max_period under multiplication by d."""
    out = set()
    for p in range(1, max_period + 1):
        den = d ** p - 1
        for n in range(den):
            out.add(ad.angle(f"{n}/{den}"))
    return sorted(out)


def verify_candidate(G: GluingForm, problem: GluingProblem, mult_tol: float = 2e-3,
                     curve_iterations: int = 500, curve_tol: float = 1e-2,
                     angle_set=None, check_rays: bool = True) -> VerifyReport:
    checks = []
    d0, d1, d2 = problem.degrees
    m, k, l = problem.form_shape
    ok = (G.m, G.k, G.l) == (m, k, l)
    checks.append(Check("degrees", ok, {"expected": [m, k, l], "found": [G.m, G.k, G.l]}))
    if not ok:
        return VerifyReport(checks)

    fps = [q for q in periodic_points(G, 1) if abs(q.location) > 1e-12]
    for con in problem.constraints:
        if isinstance(con, ParabolicFixed):
            q = min(fps, key=lambda q: abs(q.multiplier - 1))
            near = sum(r.multiplicity for r in fps if abs(r.location - q.location) < 0.05)
            err = abs(q.multiplier - 1)
            checks.append(Check("parabolic", bool(err < mult_tol), {
                "location": [q.location.real, q.location.imag],
                "multiplier": [q.multiplier.real, q.multiplier.imag],
                "multiplier_error": err, "fixed_points_nearby": near, "petals": con.petals}))
        elif isinstance(con, CriticalPeriodic):
            c = _side_critical(G, con.side)
            w = c
            for _ in range(con.period):
                w = complex(eval_map(G, w))
            err = abs(w - c)
            checks.append(Check(f"critical-periodic-{con.side}", bool(err < 1e-8),
                                {"critical_point": [c.real, c.imag], "error": err}))
        elif isinstance(con, CriticalOnCurve):
            c = _side_critical(G, con.side)
            g_inf = float(green(G, BasinTag.INFINITY, c))
            g_0 = float(green(G, BasinTag.ORIGIN, c))
            X = _critical_curve_target(G, con, problem.d0, problem.k_choice,
                                       offsets=tuple(map(float, curve_offsets(G, problem.k_choice))))
            v = complex(eval_map(G, c))
            checks.append(Check(f"critical-on-curve-{con.side}", bool(abs(X - v) < 1e-2), {
                "critical_point": [c.real, c.imag], "green_infinity": g_inf, "green_origin": g_0,
                "ray_target_distance": abs(X - v)}))

    try:
        curve = trace_gluing_curve(G, iterations=curve_iterations, k_choice=problem.k_choice)
        wind = winding_number(curve.samples)
        inside = [b for b in G.poles if winding_number(curve.samples, b) == 1]
        ok = curve.hausdorff_residual < curve_tol and wind == 1
        checks.append(Check("gluing-curve", bool(ok), {
            "hausdorff_residual": curve.hausdorff_residual, "iterations": curve.iteration_count,
            "winding": wind, "poles_inside": len(inside)}))
    except CurveThroughCriticalPoint as e:
        checks.append(Check("gluing-curve", False, {"error": str(e)}))

    if check_rays:
        angles = angle_set if angle_set is not None else default_angle_set(d1, 2)
        rep = boundary_conjugacy_check(G, problem.f_spec, BasinTag.INFINITY, angles)
        checks.append(Check("ray-correspondence", rep.agree, {
            "rotation": rep.rotation, "mismatches": rep.mismatches,
            "inconclusive": rep.inconclusive, "dynamics_residual": rep.dynamics_residual}))
    return VerifyReport(checks)


# Puzzle shrinking.

def puzzle_shrinking_probe(G: GluingForm, depths: Iterable[int], levels: tuple = (1.0, 1.0),
                           k_choice: int = 1, arc_density: int = 4,
                           max_levels: int = 400, max_arc_samples: int = 2048) -> list[float]:
    """Max diameter over the depth-n pieces meeting the curve, for the graph
    made of the rays landing at curve angle 0 and equipotentials at
    `levels`. A piece between curve angles t0 < t1 is bounded by the rays
    landing there and the equipotential arcs between them."""
    d0, d1, d2 = G.degrees
    depths = list(depths)
    n_max = max(depths)
    off_inf, off_0 = curve_offsets(G, k_choice)
    dyadic = [ad.angle(f"{j}/{d0 ** n_max}") for j in range(d0 ** n_max)]
    ext = {t: _basin_angle(t, BasinTag.INFINITY, G.degrees, k_choice, off_inf) for t in dyadic}
    intr = {t: _basin_angle(t, BasinTag.ORIGIN, G.degrees, k_choice, off_0) for t in dyadic}
    rays = {BasinTag.INFINITY: trace_rays(G, BasinTag.INFINITY, sorted(set(ext.values())), max_levels=max_levels),
            BasinTag.ORIGIN: trace_rays(G, BasinTag.ORIGIN, sorted(set(intr.values())), max_levels=max_levels)}
    out = []
    for n in depths:
        pts_n = [ad.angle(f"{j}/{d0 ** n}") for j in range(d0 ** n)]
        arcs = {}
        for basin, d, lvl, lab in ((BasinTag.INFINITY, d1, levels[0], ext), (BasinTag.ORIGIN, d2, levels[1], intr)):
            # keep the grid closed under angle multiplication by d
            m = arc_density * d ** n
            while m > max_arc_samples and m % d == 0:
                m //= d
            eq = equipotential(G, basin, lvl / d ** n, m).samples
            arcs[basin] = (eq, m, lvl / d ** n, lab)
        best = 0.0
        for i, t0 in enumerate(pts_n):
            t1 = pts_n[(i + 1) % len(pts_n)]
            parts = []
            for basin, (eq, m, lv, lab) in arcs.items():
                a0, a1 = lab[t0], lab[t1]
                for a in (a0, a1):
                    r = rays[basin][a]
                    parts.append(r.samples[r.log_potentials <= math.log(lv)])
                i0 = int(a0.fraction * m)
                span = int(((a1.fraction - a0.fraction) % 1) * m) if len(pts_n) > 1 else m
                parts.append(eq[(i0 + np.arange(span + 1)) % m])
            best = max(best, _diameter(np.concatenate([p for p in parts if len(p)])))
        out.append(best)
    return out


def _diameter(pts: np.ndarray, directions: int = 90) -> float:
    """Largest projected width over evenly spaced directions; relative
    error at most 1 - cos(pi / (2 * directions))."""
    pts = pts[np.isfinite(pts)]
    if len(pts) < 2:
        return 0.0
    u = np.exp(1j * np.pi * np.arange(directions) / directions)
    proj = (pts[:, None] * np.conj(u)[None, :]).real
    return float((proj.max(axis=0) - proj.min(axis=0)).max())
