"""Symbolic puzzle systems for a glued map.

Pieces meeting the gluing curve are arcs of the curve between consecutive
points of the depth-n preimage set of the initial curve angles. Each such
arc maps onto the arc of its image with degree 1 + sum(local degree - 1)
over the curve critical points it contains. Preimage components that do not
meet the curve ("decorations") have degree 1 and carry no angle data; they
are tracked through their parent and image only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import angle_dynamics as ad


class GraphNotAdmissible(ValueError):
    pass


class OnGraphAmbiguous(ValueError):
    pass


class OffGammaChart(LookupError):
    pass


@dataclass(frozen=True)
class CurveCritical:
    label: str
    gamma_angle: ad.RationalAngle
    local_degree: int = 2


@dataclass(frozen=True)
class InitialGraph:
    """Rays landing at the curve points `gamma_angles` plus one equipotential
    in each of the two basins."""
    d0: int
    d1: int
    d2: int
    gamma_angles: tuple
    pairing: ad.GluingPairing
    levels: tuple = (1.0, 1.0)

    @property
    def external_angles(self) -> list:
        return sorted({ad.gamma_to_infinity_angle(t, self.d0, self.d1) for t in self.gamma_angles})

    @property
    def internal_angles(self) -> list:
        return sorted({ad.gamma_to_origin_angle(t, self.d0, self.d2, self.pairing.k)
                       for t in self.gamma_angles})

    def validate(self) -> None:
        for angles, d in ((self.gamma_angles, self.d0), (self.external_angles, self.d1),
                          (self.internal_angles, self.d2)):
            s = set(angles)
            if not s or any(ad.mul_d(a, d) not in s for a in s):
                raise GraphNotAdmissible("graph-not-admissible")


def initial_graph(d0: int, d1: int, d2: int, gamma_angles=("0",), k: int = 1,
                  levels=(1.0, 1.0)) -> InitialGraph:
    g = InitialGraph(d0, d1, d2, tuple(sorted(ad.angle(a) for a in gamma_angles)),
                     ad.GluingPairing(d0, k), tuple(levels))
    g.validate()
    return g


@dataclass(frozen=True)
class PuzzlePiece:
    id: tuple
    depth: int
    boundary_arcs: tuple
    parent_id: tuple | None
    image_id: tuple | None
    contains_critical: tuple
    straddles_gluing_curve: bool
    degree: int
    arc: tuple | None = None  # (t0, t1) curve angles for pieces meeting the curve

    @property
    def label(self) -> str:
        return f"P{self.id[0]},{self.id[1]}"

    def to_dict(self) -> dict:
        return {"id": list(self.id), "depth": self.depth, "boundary": list(self.boundary_arcs),
                "parent": list(self.parent_id) if self.parent_id else None,
                "image": list(self.image_id) if self.image_id else None,
                "critical": list(self.contains_critical), "on_curve": self.straddles_gluing_curve,
                "degree": self.degree,
                "arc": [str(self.arc[0]), str(self.arc[1])] if self.arc else None}


@dataclass
class PuzzleSystem:
    graph: InitialGraph
    critical: tuple
    pieces: dict = field(default_factory=dict)

    @property
    def degrees(self) -> tuple:
        return self.graph.d0, self.graph.d1, self.graph.d2

    @property
    def map_degree(self) -> int:
        d0, d1, d2 = self.degrees
        return d1 + d2 - d0

    @property
    def depth(self) -> int:
        return max(self.pieces)

    def piece(self, pid) -> PuzzlePiece:
        n, i = pid
        return self.pieces[n][i - 1]

    def children(self, pid) -> list:
        n = pid[0] + 1
        return [p for p in self.pieces.get(n, []) if p.parent_id == tuple(pid)]

    def counts(self) -> list:
        return [len(self.pieces[n]) for n in sorted(self.pieces)]

    def to_json(self) -> str:
        nodes = [p.to_dict() for n in sorted(self.pieces) for p in self.pieces[n]]
        edges = []
        for n in sorted(self.pieces):
            for p in self.pieces[n]:
                if p.parent_id:
                    edges.append({"from": list(p.id), "to": list(p.parent_id), "kind": "parent"})
                if p.image_id:
                    edges.append({"from": list(p.id), "to": list(p.image_id), "kind": "image"})
        return json.dumps({"degrees": list(self.degrees), "nodes": nodes, "edges": edges},
                          sort_keys=True, separators=(",", ":"))


def _points(graph: InitialGraph, n: int) -> list:
    """Curve angles of depth n: all preimages of the initial angles under mul_d0^n."""
    pts = set(graph.gamma_angles)
    for _ in range(n):
        pts = {q for p in pts for q in ad.preimages(p, graph.d0)}
    return sorted(pts)


def _arcs(points: list) -> list:
    return [(points[i], points[(i + 1) % len(points)]) for i in range(len(points))]


def _in_arc(t, arc) -> bool:
    a, b = arc
    return ad.cyclic_between(a, t, b)


def _arc_inside(inner, outer) -> bool:
    """Inner arc contained in outer arc (closed outer, open inner)."""
    a, b = outer
    x, y = inner
    if a == b:
        return True
    return (x == a or ad.cyclic_between(a, x, b)) and (y == b or ad.cyclic_between(a, y, b))


def _boundary(graph: InitialGraph, arc, n: int) -> tuple:
    t0, t1 = arc
    e0 = ad.gamma_to_infinity_angle(t0, graph.d0, graph.d1)
    e1 = ad.gamma_to_infinity_angle(t1, graph.d0, graph.d1)
    i0 = ad.gamma_to_origin_angle(t0, graph.d0, graph.d2, graph.pairing.k)
    i1 = ad.gamma_to_origin_angle(t1, graph.d0, graph.d2, graph.pairing.k)
    lv_inf = Fraction(graph.levels[0]).limit_denominator() / graph.d1 ** n
    lv_0 = Fraction(graph.levels[1]).limit_denominator() / graph.d2 ** n
    return (
        ("ray", "infinity", str(e0)),
        ("equipotential", "infinity", str(lv_inf), str(e0), str(e1)),
        ("ray", "infinity", str(e1)),
        ("ray", "origin", str(i1)),
        ("equipotential", "origin", str(lv_0), str(i1), str(i0)),
        ("ray", "origin", str(i0)),
    )


def _arc_degree(arc, critical) -> tuple:
    inside = [c for c in critical if _in_arc(c.gamma_angle, arc)]
    return 1 + sum(c.local_degree - 1 for c in inside), tuple(c.label for c in inside)


def build_depth0(graph: InitialGraph, critical=()) -> PuzzleSystem:
    """Depth-0 pieces: one per arc between consecutive initial curve angles.
    The components holding 0 and infinity are not pieces."""
    graph.validate()
    critical = tuple(sorted(critical, key=lambda c: c.gamma_angle))
    for c in critical:
        if c.gamma_angle in set(graph.gamma_angles):
            raise GraphNotAdmissible("ray-lands-on-critical-point")
    pieces = []
    for i, arc in enumerate(_arcs(_points(graph, 0)), start=1):
        deg, labels = _arc_degree(arc, critical)
        pieces.append(PuzzlePiece((0, i), 0, _boundary(graph, arc, 0), None, None, labels, True, deg, arc))
    return PuzzleSystem(graph, critical, {0: pieces})


def pullback(sys: PuzzleSystem, to_depth: int) -> PuzzleSystem:
    """Extend the system to `to_depth`. Pieces are indexed curve pieces first
    (by first curve angle), then decorations by (parent, image)."""
    g = sys.graph
    F = sys.map_degree
    while sys.depth < to_depth:
        n = sys.depth + 1
        pts = _points(g, n)
        if any(c.gamma_angle in set(pts) for c in sys.critical):
            raise GraphNotAdmissible("ray-lands-on-critical-point")
        prev = sys.pieces[n - 1]
        curve_prev = [p for p in prev if p.arc is not None]
        new = []
        for arc in _arcs(pts):
            parent = next(p for p in curve_prev if _arc_inside(arc, p.arc))
            img_arc = (ad.mul_d(arc[0], g.d0), ad.mul_d(arc[1], g.d0))
            if n == 1:
                image = next(p for p in sys.pieces[0] if _arc_inside(img_arc, p.arc))
            else:
                image = next(p for p in curve_prev if p.arc == img_arc)
            deg, labels = _arc_degree(arc, sys.critical)
            new.append(dict(arc=arc, parent=parent.id, image=image.id, degree=deg, labels=labels))
        decorations = []
        if n == 1:
            # decorations of depth 1 sit in the depth-0 piece holding the first critical point
            host = next((p for p in prev if p.contains_critical), prev[0])
            for q in sys.pieces[0]:
                used = sum(c["degree"] for c in new if c["image"] == q.id)
                extra = F - used
                assert extra >= 0, "inconsistent lift"
                decorations += [dict(parent=host.id, image=q.id)] * extra
        else:
            for p in prev:
                targets = sys.children(p.image_id)
                if p.arc is None:
                    decorations += [dict(parent=p.id, image=t.id) for t in targets]
                    continue
                for t in targets:
                    used = sum(c["degree"] for c in new if c["parent"] == p.id and c["image"] == t.id)
                    extra = p.degree - used
                    assert extra >= 0, "inconsistent lift"
                    decorations += [dict(parent=p.id, image=t.id)] * extra
        new.sort(key=lambda c: c["arc"][0])
        decorations.sort(key=lambda c: (c["parent"], c["image"]))
        pieces = []
        for i, c in enumerate(new, start=1):
            pieces.append(PuzzlePiece((n, i), n, _boundary(g, c["arc"], n), c["parent"], c["image"],
                                      c["labels"], True, c["degree"], c["arc"]))
        for i, c in enumerate(decorations, start=len(new) + 1):
            pieces.append(PuzzlePiece((n, i), n, (("decoration", "over", f"P{c['image'][0]},{c['image'][1]}"),),
                                      c["parent"], c["image"], (), False, 1, None))
        sys.pieces[n] = pieces
    return sys


def build(graph: InitialGraph, critical=(), depth: int = 2) -> PuzzleSystem:
    return pullback(build_depth0(graph, critical), depth)


def toy_model(depth: int = 2) -> PuzzleSystem:
    """Glued cubic pair whose critical points sit on the curve at angles
    7/12 and 11/12, with the graph made of the fixed rays at curve angle 0."""
    graph = initial_graph(2, 3, 3, ("0",))
    crit = (CurveCritical("c_f", ad.angle("7/12")), CurveCritical("c_g", ad.angle("11/12")))
    return build(graph, crit, depth)


def locate_angle(sys: PuzzleSystem, t, depth: int) -> PuzzlePiece:
    """Curve piece of the given depth containing curve angle t (rational or float)."""
    if depth > sys.depth:
        pullback(sys, depth)
    if isinstance(t, float):
        x = t % 1.0
        for p in sys.pieces[depth]:
            if p.arc is None:
                continue
            a, b = float(p.arc[0]), float(p.arc[1])
            if a == b or (0 < (x - a) % 1.0 < (b - a) % 1.0 or (b - a) % 1.0 == 0):
                if abs(x - a) < 1e-15 or abs(x - b) < 1e-15:
                    raise OnGraphAmbiguous("on-graph-ambiguous")
                return p
        raise OnGraphAmbiguous("on-graph-ambiguous")
    t = ad.angle(t)
    for p in sys.pieces[depth]:
        if p.arc is not None and (t not in (p.arc[0], p.arc[1])) and _in_arc(t, p.arc):
            return p
    raise OnGraphAmbiguous("on-graph-ambiguous")


@dataclass
class GammaChart:
    """Geometry for point location: the glued map and a traced curve."""
    G: object
    curve_samples: np.ndarray
    curve_angles: np.ndarray
    eps_graph: float = 1e-9


def locate(sys: PuzzleSystem, chart: GammaChart, z: complex, depth: int) -> PuzzlePiece | None:
    """Curve piece holding z, for z near the curve and inside both
    equipotentials of the given depth. Returns None outside the bounded
    region. Points whose nearest curve point is a graph point are ambiguous."""
    from .potential_rays import BasinTag, green

    g = sys.graph
    lv_inf = g.levels[0] / g.d1 ** depth
    lv_0 = g.levels[1] / g.d2 ** depth
    if green(chart.G, BasinTag.INFINITY, z) >= lv_inf or green(chart.G, BasinTag.ORIGIN, z) >= lv_0:
        return None
    k = int(np.argmin(np.abs(chart.curve_samples - z)))
    t = float(chart.curve_angles[k])
    pts = np.array([float(p) for p in _points(g, depth)])
    gap = np.abs((pts - t + 0.5) % 1.0 - 0.5).min()
    if gap * len(chart.curve_angles) < 0.5 and abs(chart.curve_samples[k] - z) < chart.eps_graph:
        raise OnGraphAmbiguous("on-graph-ambiguous")
    return locate_angle(sys, t, depth)


def itinerary(sys: PuzzleSystem, t, depth: int, length: int) -> list:
    """Piece ids of t, d0 t, d0^2 t, ... at a fixed depth."""
    out = []
    x = ad.angle(t) if not isinstance(t, float) else t
    for _ in range(length):
        out.append(locate_angle(sys, x, depth).id)
        x = ad.mul_d(x, sys.graph.d0) if not isinstance(x, float) else (x * sys.graph.d0) % 1.0
    return out


def is_renormalizable(sys: PuzzleSystem, critical_itinerary, max_depth: int, length: int = 48) -> bool:
    """Depth-bounded test: some period p with P_n(c) = P_n(f^{kp}(c)) for all
    k and all n <= max_depth. `critical_itinerary` is either a critical label
    of `sys` or a mapping depth -> list of piece ids."""
    if isinstance(critical_itinerary, str):
        crit = next((c for c in sys.critical if c.label == critical_itinerary), None)
        if crit is None:
            raise ValueError("critical point not on the curve (in a basin of 0 or infinity)")
        its = {n: itinerary(sys, crit.gamma_angle, n, length) for n in range(max_depth + 1)}
    else:
        its = {n: list(v) for n, v in critical_itinerary.items() if n <= max_depth}
    if not its:
        raise ValueError("empty itinerary")
    L = min(len(v) for v in its.values())
    for p in range(1, L // 2 + 1):
        if all(v[k * p] == v[0] for v in its.values() for k in range(L // p)):
            return True
    return False
