"""Request and response models for the HTTP service.

Complex numbers travel as [re, im] pairs. Maps use the JSON schema of
`core_maps.map_from_json` and problems that of `gluing_solver.problem_from_json`.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, conlist

Cx = conlist(float, min_length=2, max_length=2)


class RenderRequest(BaseModel):
    map: dict
    center: Cx = [0.0, 0.0]
    width: float = Field(4.0, gt=0)
    pixels: int = Field(512, ge=1, le=4096)
    max_iter: int = Field(256, ge=1)
    curve_overlay: bool = False


class RenderResponse(BaseModel):
    width: int
    height: int
    sha256: str
    ppm_base64: str
    fate_counts: dict[str, int]


class RaysRequest(BaseModel):
    map: dict
    basin: Literal["infinity", "origin"] = "infinity"
    angles: list[str]
    max_levels: int = Field(400, ge=1)
    with_csv: bool = False


class RayOut(BaseModel):
    angle: str
    landed: bool
    landing_point: Optional[Cx] = None
    samples: int
    diagnostic: str = ""


class RaysResponse(BaseModel):
    rays: list[RayOut]
    csv: Optional[str] = None


class FixedPointsRequest(BaseModel):
    map: dict
    period: int = Field(1, ge=1, le=8)


class FixedPointOut(BaseModel):
    location: Cx
    period: int
    multiplier: Cx
    kind: str
    multiplicity: int
    converged: bool


class FixedPointsResponse(BaseModel):
    points: list[FixedPointOut]


class CriticalSpec(BaseModel):
    label: str
    gamma_angle: str
    local_degree: int = 2


class PuzzleRequest(BaseModel):
    toy_model: bool = False
    degrees: conlist(int, min_length=3, max_length=3) = [2, 3, 3]
    gamma_angles: list[str] = ["0"]
    k_choice: int = 1
    critical: list[CriticalSpec] = []
    depth: int = Field(2, ge=0, le=8)


class Relation(BaseModel):
    piece: str
    image: Optional[str]
    parent: Optional[str]
    degree: int
    critical: list[str]


class PuzzleResponse(BaseModel):
    counts: list[int]
    relations: list[Relation]
    system: dict


class CloseOrbitRequest(BaseModel):
    """Either a puzzle (as for /puzzle) or an explicit transition graph."""
    puzzle: Optional[PuzzleRequest] = None
    edges: Optional[list[conlist(str, min_length=2, max_length=2)]] = None
    critical: dict[str, str] = {}
    k_max: Optional[int] = None


class Candidate(BaseModel):
    chain: list[Any]
    k: int


class CloseOrbitResponse(BaseModel):
    candidates: dict[str, Candidate]
    closed: dict
    hyperbolic: bool
    offenders: list[str]


class VerifyRequest(BaseModel):
    map: dict
    problem: dict
    mult_tol: float = Field(2e-3, gt=0)
    curve_iterations: int = Field(500, ge=1)
    curve_tol: float = Field(1e-2, gt=0)
    check_rays: bool = True


class CheckOut(BaseModel):
    name: str
    passed: bool
    detail: dict


class VerifyResponse(BaseModel):
    passed: bool
    checks: list[CheckOut]


class SolveRequest(BaseModel):
    """A gluing problem, or `circle_c` for the parabolic search on the
    rotated Blaschke circle e^{2 pi i t} z^3 (z - c)/(1 - c z)."""
    problem: Optional[dict] = None
    circle_c: Optional[float] = Field(None, gt=1)
    seed: Optional[dict] = None
    grid: int = Field(16, ge=2)


class CircleOut(BaseModel):
    theta: float
    point: Cx
    multiplier: Cx


class SolveResponse(BaseModel):
    converged: bool
    form: Optional[dict] = None
    residual: Optional[float] = None
    circle: list[CircleOut] = []
    message: str = ""


class CurveRequest(BaseModel):
    map: dict
    iterations: int = Field(500, ge=1)
    n_samples: int = Field(255, ge=3)
    k_choice: int = 1
    with_samples: bool = False


class CurveResponse(BaseModel):
    hausdorff_residual: float
    iterations: int
    winding: int
    min_critical_distance: float
    samples: Optional[list[Cx]] = None


class ReportRequest(BaseModel):
    maps: list[dict]
    probe_depths: list[int] = []


class ReportResponse(BaseModel):
    r_min: float
    R_max: float
    delta_min: float
    probe: list[list[float]] = []
