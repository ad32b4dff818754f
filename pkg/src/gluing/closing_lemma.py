"""Closing critical orbits combinatorially on a depth-N puzzle system.

The transition graph has an edge A -> B between depth-N pieces when B lies in
the image of A. A candidate for a critical piece P is a cycle P -> X1 -> ...
-> P with pairwise distinct pieces; pulling P back along it gives a
depth-(N+k) piece inside P that returns onto P after k steps.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .puzzle_engine import PuzzleSystem, locate_angle, pullback


class CandidateBudgetExhausted(RuntimeError):
    pass


@dataclass
class TransitionGraph:
    nodes: list
    edges: dict  # node -> sorted list of successors
    critical: dict = field(default_factory=dict)  # label -> node
    local_degree: dict = field(default_factory=dict)

    @classmethod
    def from_edges(cls, edges, critical=None, local_degree=None) -> "TransitionGraph":
        nodes = sorted({a for a, _ in edges} | {b for _, b in edges})
        succ = {n: sorted({b for a, b in edges if a == n}) for n in nodes}
        crit = dict(critical or {})
        return cls(nodes, succ, crit, dict(local_degree or {c: 2 for c in crit}))

    def successors(self, node) -> list:
        return self.edges.get(node, [])


def transition_graph(sys: PuzzleSystem, depth: int) -> TransitionGraph:
    if sys.depth < depth:
        pullback(sys, depth)
    pieces = sys.pieces[depth]
    edges = {}
    for a in pieces:
        # depth-N pieces inside image(a) are the children of image(a)
        img = a.image_id
        edges[a.id] = sorted(b.id for b in pieces if b.parent_id == img) if img else []
    crit = {}
    deg = {}
    for c in sys.critical:
        crit[c.label] = locate_angle(sys, c.gamma_angle, depth).id
        deg[c.label] = c.local_degree
    return TransitionGraph(sorted(edges), edges, crit, deg)


def _dist_to(graph: TransitionGraph, target) -> dict:
    """Edge distance from every node to `target` (reverse BFS)."""
    pred: dict = {n: [] for n in graph.nodes}
    for a in graph.nodes:
        for b in graph.successors(a):
            pred.setdefault(b, []).append(a)
    dist = {target: 0}
    q = deque([target])
    while q:
        v = q.popleft()
        for u in pred.get(v, []):
            if u not in dist:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


def find_candidate(graph, c: str, N: int | None = None, k_max: int | None = None) -> tuple[list, int]:
    """Shortest return chain [P, X1, ..., X_{k-1}] from the piece of c back
    to itself; among shortest chains the lexicographically smallest."""
    if isinstance(graph, PuzzleSystem):
        graph = transition_graph(graph, N if N is not None else graph.depth)
    start = graph.critical[c]
    if k_max is None:
        k_max = 10 * len(graph.nodes)
    dist = _dist_to(graph, start)
    back = [dist[s] + 1 for s in graph.successors(start) if s in dist]
    if not back or min(back) > k_max:
        raise CandidateBudgetExhausted("candidate-budget-exhausted")
    k = min(back)
    chain = [start]
    v = start
    while True:
        steps_left = k - len(chain)
        nxt = [s for s in graph.successors(v) if dist.get(s) == steps_left]
        v = min(nxt)
        if v == start:
            break
        chain.append(v)
    assert len(set(chain)) == len(chain) == k
    return chain, k


@dataclass
class Itinerary:
    label: str
    tail: list
    cycle: list
    local_degree: int = 2

    def to_dict(self) -> dict:
        return {"label": self.label, "tail": [list(x) if isinstance(x, tuple) else x for x in self.tail],
                "cycle": [list(x) if isinstance(x, tuple) else x for x in self.cycle],
                "local_degree": self.local_degree}


@dataclass
class ClosedSystem:
    graph: TransitionGraph
    itineraries: dict
    marked_cycles: list  # (cycle, labels)
    modified_pieces: set
    on_curve_push_in: bool = False

    def to_json(self) -> str:
        j = lambda x: list(x) if isinstance(x, tuple) else x
        return json.dumps({
            "critical": [self.itineraries[k].to_dict() for k in sorted(self.itineraries)],
            "cycles": [{"pieces": [j(p) for p in cyc], "labels": sorted(labels)}
                       for cyc, labels in self.marked_cycles],
            "modified": sorted(j(p) for p in self.modified_pieces),
            "push_in": self.on_curve_push_in,
        }, sort_keys=True, separators=(",", ":"))


def close_orbit(graph, candidates: dict | None = None, N: int | None = None,
                on_curve: bool = True) -> ClosedSystem:
    """Close each critical orbit in turn. A critical point whose candidate
    chain meets an existing marked cycle follows its chain up to the first
    shared piece and then joins that cycle; otherwise its chain becomes a new
    marked cycle."""
    if isinstance(graph, PuzzleSystem):
        graph = transition_graph(graph, N if N is not None else graph.depth)
    labels = sorted(graph.critical)
    if candidates is None:
        candidates = {c: find_candidate(graph, c)[0] for c in labels}
    cycles: list = []
    owner: dict = {}
    its = {}
    for c in labels:
        chain = list(candidates[c])
        hit = next((i for i, p in enumerate(chain) if p in owner), None)
        deg = graph.local_degree.get(c, 2)
        if hit is None:
            cycles.append((chain, {c}))
            for p in chain:
                owner[p] = len(cycles) - 1
            its[c] = Itinerary(c, [], chain, deg)
        else:
            idx = owner[chain[hit]]
            cyc, labs = cycles[idx]
            labs.add(c)
            r = cyc.index(chain[hit])
            its[c] = Itinerary(c, chain[:hit], cyc[r:] + cyc[:r], deg)
    modified = {graph.critical[c] for c in labels}
    return ClosedSystem(graph, its, cycles, modified, on_curve)


@dataclass
class HyperbolicReport:
    passed: bool
    offenders: list
    portrait: list


def _rotation_of(cyc: list, marked: list) -> bool:
    n = len(cyc)
    return n == len(marked) and any(cyc == marked[r:] + marked[:r] for r in range(n))


def verify_hyperbolic(cs: ClosedSystem) -> HyperbolicReport:
    offenders = []
    portrait = []
    g = cs.graph
    for label in sorted(cs.itineraries):
        it = cs.itineraries[label]
        seq = it.tail + it.cycle
        ok = bool(it.cycle)
        ok = ok and all(b in g.successors(a) for a, b in zip(seq, seq[1:]))
        ok = ok and it.cycle[0] in g.successors(it.cycle[-1])
        # each depth-N piece is met at most once before the orbit closes up
        ok = ok and len(set(seq)) == len(seq)
        ok = ok and any(_rotation_of(it.cycle, cyc) and labs for cyc, labs in cs.marked_cycles)
        if not ok:
            offenders.append(label)
        portrait.append({"label": label, "tail": len(it.tail), "cycle": len(it.cycle),
                         "local_degree": it.local_degree})
    return HyperbolicReport(not offenders, offenders, portrait)


@dataclass(frozen=True)
class PushInProfile:
    r: float
    r_tilde: float
    d0: int = 2

    def __post_init__(self):
        if not 0 < self.r < self.r_tilde < 1:
            raise ValueError("need 0 < r < r_tilde < 1")
        if not self.r ** self.d0 < self.r_tilde:
            raise ValueError("profile not increasing")

    def eta(self, t: float) -> float:
        s = (t - self.r) / (self.r_tilde - self.r)
        return self.r ** self.d0 + s * (self.r_tilde - self.r ** self.d0)


def push_in(profile: PushInProfile, t: float, theta: float) -> tuple[float, float]:
    """Polar action of the modified map: angle times d0, radius kept on
    t >= r_tilde, eta(t) on [r, r_tilde], t^d0 below r."""
    import math

    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    th = (profile.d0 * theta) % (2 * math.pi)
    if t >= profile.r_tilde:
        return t, th
    if t >= profile.r:
        return profile.eta(t), th
    return t ** profile.d0, th
