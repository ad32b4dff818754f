"""HTTP service over the gluing package."""

from __future__ import annotations

import base64
import hashlib
import json

import numpy as np
from fastapi import FastAPI, HTTPException

from . import angle_dynamics as ad
from . import closing_lemma as cl
from . import gluing_solver as gs
from . import puzzle_engine as pe
from . import render as rd
from .core_maps import GluingForm, _pair, map_from_json, map_to_json, periodic_points
from .potential_rays import BasinTag, to_csv, trace_rays
from .schemas import (Candidate, CheckOut, CircleOut, CloseOrbitRequest, CloseOrbitResponse,
                      CurveRequest, CurveResponse, FixedPointOut, FixedPointsRequest,
                      FixedPointsResponse, PuzzleRequest, PuzzleResponse, RayOut, RaysRequest,
                      RaysResponse, Relation, RenderRequest, RenderResponse, ReportRequest,
                      ReportResponse, SolveRequest, SolveResponse, VerifyRequest, VerifyResponse)

app = FastAPI(title="gluing")


def _map(obj: dict):
    try:
        return map_from_json(obj)
    except (KeyError, TypeError, ValueError) as e:
        raise HTTPException(422, f"bad map: {e}")


def _form(obj: dict) -> GluingForm:
    G = _map(obj)
    if not isinstance(G, GluingForm):
        raise HTTPException(422, "expected a gluing form (gamma, m, zeros, poles)")
    return G


def _problem(obj: dict) -> gs.GluingProblem:
    try:
        return gs.problem_from_json(obj)
    except (KeyError, TypeError, ValueError) as e:
        raise HTTPException(422, f"bad problem: {e}")


def _label(pid) -> str:
    return f"P{pid[0]},{pid[1]}" if isinstance(pid, tuple) else str(pid)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/render", response_model=RenderResponse)
def render(req: RenderRequest):
    f = _map(req.map)
    view = rd.View(complex(*req.center), req.width, req.pixels, req.max_iter)
    count, fate = rd.escape_counts(f, view)
    img = rd.colorize(count, fate)
    if req.curve_overlay:
        if not isinstance(f, GluingForm):
            raise HTTPException(422, "curve overlay needs a gluing form")
        curve = gs.trace_gluing_curve(f, iterations=200)
        img = rd.overlay(img, view, curve.samples)
    data = rd.to_ppm(img)
    names = {0: "neither", 1: "infinity", 2: "origin"}
    vals, cnt = np.unique(fate, return_counts=True)
    return RenderResponse(width=req.pixels, height=req.pixels, sha256=hashlib.sha256(data).hexdigest(),
                          ppm_base64=base64.b64encode(data).decode(),
                          fate_counts={names[int(v)]: int(c) for v, c in zip(vals, cnt)})


@app.post("/rays", response_model=RaysResponse)
def rays(req: RaysRequest):
    f = _map(req.map)
    try:
        angles = [ad.angle(a) for a in req.angles]
        traced = trace_rays(f, BasinTag(req.basin), angles, max_levels=req.max_levels)
    except (ValueError, ZeroDivisionError) as e:
        raise HTTPException(422, str(e))
    out = []
    for a in angles:
        r = traced[a]
        out.append(RayOut(angle=ad.to_str(a), landed=r.landed, samples=len(r.samples),
                          landing_point=_pair(r.landing_point) if r.landing_point is not None else None,
                          diagnostic=r.diagnostic))
    return RaysResponse(rays=out, csv=to_csv([traced[a] for a in angles]) if req.with_csv else None)


@app.post("/fixed-points", response_model=FixedPointsResponse)
def fixed_points(req: FixedPointsRequest):
    f = _map(req.map)
    try:
        pts = periodic_points(f, req.period)
    except ValueError as e:
        raise HTTPException(422, str(e))
    return FixedPointsResponse(points=[FixedPointOut(**p.to_dict()) for p in pts])


def _system(req: PuzzleRequest) -> pe.PuzzleSystem:
    if req.toy_model:
        return pe.toy_model(req.depth)
    try:
        graph = pe.initial_graph(*req.degrees, gamma_angles=tuple(req.gamma_angles), k=req.k_choice)
        crit = tuple(pe.CurveCritical(c.label, ad.angle(c.gamma_angle), c.local_degree)
                     for c in req.critical)
    except (ValueError, ZeroDivisionError) as e:
        raise HTTPException(422, str(e))
    return pe.build(graph, crit, req.depth)


@app.post("/puzzle", response_model=PuzzleResponse)
def puzzle(req: PuzzleRequest):
    sys = _system(req)
    rel = [Relation(piece=p.label, image=_label(p.image_id) if p.image_id else None,
                    parent=_label(p.parent_id) if p.parent_id else None,
                    degree=p.degree, critical=list(p.contains_critical))
           for n in sorted(sys.pieces) for p in sys.pieces[n]]
    return PuzzleResponse(counts=sys.counts(), relations=rel, system=json.loads(sys.to_json()))


@app.post("/close-orbit", response_model=CloseOrbitResponse)
def close_orbit(req: CloseOrbitRequest):
    if req.puzzle is not None:
        sys = _system(req.puzzle)
        graph = cl.transition_graph(sys, req.puzzle.depth)
    elif req.edges is not None:
        graph = cl.TransitionGraph.from_edges([tuple(e) for e in req.edges], req.critical)
        if not set(req.critical.values()) <= set(graph.nodes):
            raise HTTPException(422, "critical piece not in graph")
    else:
        raise HTTPException(422, "need a puzzle or an edge list")
    cands = {}
    try:
        for c in sorted(graph.critical):
            cands[c] = cl.find_candidate(graph, c, k_max=req.k_max)
    except cl.CandidateBudgetExhausted as e:
        raise HTTPException(409, str(e))
    closed = cl.close_orbit(graph, {c: ch for c, (ch, _) in cands.items()})
    rep = cl.verify_hyperbolic(closed)
    return CloseOrbitResponse(
        candidates={c: Candidate(chain=[_label(p) for p in ch], k=k) for c, (ch, k) in cands.items()},
        closed=json.loads(closed.to_json()), hyperbolic=rep.passed, offenders=rep.offenders)


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x if isinstance(x, (str, int, float, bool, type(None))) else str(x)


@app.post("/glue-verify", response_model=VerifyResponse)
def glue_verify(req: VerifyRequest):
    G = _form(req.map)
    problem = _problem(req.problem)
    rep = gs.verify_candidate(G, problem, mult_tol=req.mult_tol, curve_iterations=req.curve_iterations,
                              curve_tol=req.curve_tol, check_rays=req.check_rays)
    return VerifyResponse(passed=rep.passed,
                          checks=[CheckOut(name=c.name, passed=c.passed, detail=_jsonable(c.detail))
                                  for c in rep.checks])


@app.post("/glue-solve", response_model=SolveResponse)
def glue_solve(req: SolveRequest):
    if req.circle_c is not None:
        try:
            sols = gs.solve_parabolic_circle(req.circle_c)
        except gs.NoParabolicFound as e:
            return SolveResponse(converged=False, message=str(e))
        return SolveResponse(converged=True, circle=[
            CircleOut(theta=s.theta, point=_pair(s.point), multiplier=_pair(s.multiplier)) for s in sols])
    if req.problem is None:
        raise HTTPException(422, "need a problem or circle_c")
    problem = _problem(req.problem)
    seed = _form(req.seed) if req.seed else None
    try:
        res = gs.solve_gluing(problem, seed=seed, grid=req.grid)
    except gs.SolverFailed as e:
        return SolveResponse(converged=False, message=str(e),
                             form=map_to_json(e.best) if e.best is not None else None,
                             residual=e.residual if np.isfinite(e.residual) else None)
    return SolveResponse(converged=True, form=map_to_json(res.form), residual=res.residual)


@app.post("/curve", response_model=CurveResponse)
def curve(req: CurveRequest):
    G = _form(req.map)
    try:
        c = gs.trace_gluing_curve(G, iterations=req.iterations, n_samples=req.n_samples,
                                  k_choice=req.k_choice)
    except gs.CurveThroughCriticalPoint as e:
        raise HTTPException(409, str(e))
    return CurveResponse(hausdorff_residual=c.hausdorff_residual, iterations=c.iteration_count,
                         winding=gs.winding_number(c.samples),
                         min_critical_distance=c.min_critical_distance,
                         samples=[_pair(z) for z in c.samples] if req.with_samples else None)


@app.post("/report", response_model=ReportResponse)
def report(req: ReportRequest):
    forms = [_form(m) for m in req.maps]
    try:
        rep = gs.compactness_report(forms)
    except ValueError as e:
        raise HTTPException(422, str(e))
    probe = [gs.puzzle_shrinking_probe(G, req.probe_depths) for G in forms] if req.probe_depths else []
    return ReportResponse(r_min=rep.r_min, R_max=rep.R_max, delta_min=rep.delta_min, probe=probe)
