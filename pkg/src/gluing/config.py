"""Flat key=value configuration. Environment variables are never read.

Lines are `key = value`; `#` starts a comment. Recognised keys:

    tol.mult     multiplier tolerance for parabolic checks
    tol.land     ray landing step tolerance
    tol.pot      potential below which a point counts as on the boundary
    tol.graph    distance below which a point counts as on the graph
    tol.curve    hausdorff tolerance for the invariant curve
    budget.iteration   curve pullback iterations
    budget.kmax        candidate search length bound
    budget.solver      seed grid size for solve_gluing
    budget.render_iter escape-time iterations
    seed         integer seed for any randomised sampling
    out          default output path
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class Config:
    tol_mult: float = 2e-3
    tol_land: float = 1e-12
    tol_pot: float = 1e-6
    tol_graph: float = 1e-9
    tol_curve: float = 1e-2
    budget_iteration: int = 500
    budget_kmax: int = 0  # 0 means 10 times the node count
    budget_solver: int = 16
    budget_render_iter: int = 256
    seed: int = 0
    out: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for f in fields(self):
            if f.name.startswith("tol_") and not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name.replace('_', '.', 1)} must be positive")

    def updated(self, pairs: dict) -> "Config":
        known = {f.name: f.type for f in fields(self)}
        kw = {}
        for key, raw in pairs.items():
            name = key.replace(".", "_", 1)
            if name not in known or name == "extra":
                raise KeyError(f"unknown config key: {key}")
            cur = getattr(self, name)
            kw[name] = type(cur)(raw) if not isinstance(cur, str) else str(raw)
        return replace(self, **kw)


def parse(text: str) -> dict:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = v
    return out


def load(path: str | Path | None = None, overrides: dict | None = None) -> Config:
    cfg = Config()
    if path:
        cfg = cfg.updated(parse(Path(path).read_text()))
    if overrides:
        cfg = cfg.updated(overrides)
    return cfg
