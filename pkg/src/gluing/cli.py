"""Command-line client. Requests go to the FastAPI app in process, or to a
running server with --server URL.

Exit codes: 0 success, 2 verification failure, 1 usage error.
"""

from __future__ import annotations

import argparse
import base64
import json
import sys
from pathlib import Path

from . import config as cfgmod

OK, USAGE, FAILED = 0, 1, 2

TOL_KEYS = ("mult", "land", "pot", "graph", "curve")
BUDGET_KEYS = ("iteration", "kmax", "solver", "render_iter")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE)


def _json_arg(text: str) -> dict:
    """Inline JSON or a path to a JSON file."""
    p = Path(text)
    try:
        raw = p.read_text() if not text.lstrip().startswith("{") and p.is_file() else text
        obj = json.loads(raw)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"not JSON or a readable JSON file: {text!r} ({e})")
    if not isinstance(obj, dict):
        raise UsageError(f"expected a JSON object: {text!r}")
    return obj


def _pair(text: str) -> list[float]:
    try:
        re_, im = (float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"expected re,im: {text!r}")
    return [re_, im]


def _csv(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _depths(text: str) -> list[int]:
    if "-" in text:
        a, b = text.split("-", 1)
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in _csv(text)]


def build_parser() -> Parser:
    p = Parser(prog="gluing", description=__doc__.splitlines()[0])
    p.add_argument("--server", help="base URL of a running service")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", help="output file (PPM for render, JSON or CSV otherwise)")
    p.add_argument("--threads", type=int, default=1, help="accepted for compatibility; work is vectorised")
    for k in TOL_KEYS:
        p.add_argument(f"--tol.{k}", dest=f"tol.{k}", type=float)
    for k in BUDGET_KEYS:
        p.add_argument(f"--budget.{k}", dest=f"budget.{k}", type=int)
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    s = sub.add_parser("render", help="escape-time image as binary PPM")
    s.add_argument("--map", required=True)
    s.add_argument("--center", default="0,0")
    s.add_argument("--width", type=float, default=4.0)
    s.add_argument("--pixels", type=int, default=512)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--curve", action="store_true", help="overlay the gluing curve")

    s = sub.add_parser("rays", help="trace external or internal rays")
    s.add_argument("--map", required=True)
    s.add_argument("--basin", choices=["infinity", "origin"], default="infinity")
    s.add_argument("--angles", required=True, help="comma separated, e.g. 1/3,2/3")
    s.add_argument("--max-levels", type=int, default=400)
    s.add_argument("--csv", action="store_true", help="emit ray samples as CSV")

    s = sub.add_parser("fixed-points", help="periodic points with multipliers")
    s.add_argument("--map", required=True)
    s.add_argument("--period", type=int, default=1)

    def puzzle_args(s):
        s.add_argument("--toy-model", action="store_true")
        s.add_argument("--degrees", default="2,3,3")
        s.add_argument("--gamma-angles", default="0")
        s.add_argument("--critical", action="append", default=[], metavar="LABEL=ANGLE")
        s.add_argument("--depth", type=int, default=2)

    s = sub.add_parser("puzzle", help="symbolic puzzle pieces and their images")
    puzzle_args(s)
    s.add_argument("--json", action="store_true", help="print the full piece graph")

    s = sub.add_parser("close-orbit", help="close critical orbits on a transition graph")
    puzzle_args(s)
    s.add_argument("--graph", help='JSON {"edges": [[a, b], ...], "critical": {label: node}}')
    s.add_argument("--k-max", type=int)

    s = sub.add_parser("glue-verify", help="verify a candidate gluing form")
    s.add_argument("--map", required=True)
    s.add_argument("--problem", required=True)
    s.add_argument("--no-rays", action="store_true")

    s = sub.add_parser("glue-solve", help="solve for the gluing form")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--problem")
    g.add_argument("--circle", type=float, metavar="C", help="parabolic search on the Blaschke circle")
    s.add_argument("--seed")

    s = sub.add_parser("curve", help="trace the invariant gluing curve")
    s.add_argument("--map", required=True)
    s.add_argument("--samples", type=int, default=255)
    s.add_argument("--k-choice", type=int, default=1)

    s = sub.add_parser("report", help="compactness diagnostics and shrinking probe")
    s.add_argument("--map", action="append", required=True)
    s.add_argument("--probe-depths", default="", help="e.g. 0-8 or 0,2,4")
    return p


def _puzzle_body(a) -> dict:
    crit = []
    for item in a.critical:
        if "=" not in item:
            raise UsageError(f"expected LABEL=ANGLE: {item!r}")
        label, ang = item.split("=", 1)
        crit.append({"label": label, "gamma_angle": ang})
    try:
        degrees = [int(x) for x in _csv(a.degrees)]
    except ValueError:
        raise UsageError(f"bad degrees: {a.degrees!r}")
    return {"toy_model": a.toy_model, "degrees": degrees, "gamma_angles": _csv(a.gamma_angles),
            "critical": crit, "depth": a.depth}


def request(a, cfg: cfgmod.Config) -> tuple[str, dict]:
    c = a.command
    if c == "render":
        return "/render", {"map": _json_arg(a.map), "center": _pair(a.center), "width": a.width,
                           "pixels": a.pixels, "max_iter": a.max_iter or cfg.budget_render_iter,
                           "curve_overlay": a.curve}
    if c == "rays":
        return "/rays", {"map": _json_arg(a.map), "basin": a.basin, "angles": _csv(a.angles),
                         "max_levels": a.max_levels, "with_csv": a.csv}
    if c == "fixed-points":
        return "/fixed-points", {"map": _json_arg(a.map), "period": a.period}
    if c == "puzzle":
        return "/puzzle", _puzzle_body(a)
    if c == "close-orbit":
        body = {"k_max": a.k_max or cfg.budget_kmax or None}
        if a.graph:
            g = _json_arg(a.graph)
            body.update(edges=g.get("edges"), critical=g.get("critical", {}))
        else:
            body["puzzle"] = _puzzle_body(a)
        return "/close-orbit", body
    if c == "glue-verify":
        return "/glue-verify", {"map": _json_arg(a.map), "problem": _json_arg(a.problem),
                                "mult_tol": cfg.tol_mult, "curve_iterations": cfg.budget_iteration,
                                "curve_tol": cfg.tol_curve, "check_rays": not a.no_rays}
    if c == "glue-solve":
        if a.circle is not None:
            return "/glue-solve", {"circle_c": a.circle}
        return "/glue-solve", {"problem": _json_arg(a.problem), "grid": cfg.budget_solver,
                               "seed": _json_arg(a.seed) if a.seed else None}
    if c == "curve":
        return "/curve", {"map": _json_arg(a.map), "iterations": cfg.budget_iteration,
                          "n_samples": a.samples, "k_choice": a.k_choice, "with_samples": bool(a.out)}
    if c == "report":
        return "/report", {"maps": [_json_arg(m) for m in a.map],
                           "probe_depths": _depths(a.probe_depths) if a.probe_depths else []}
    raise UsageError(f"unknown command {c}")


def _client(server: str | None):
    if server:
        import httpx
        return httpx.Client(base_url=server, timeout=600)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
    from .api import app
    return TestClient(app)


def _emit(text: str | bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(text if isinstance(text, bytes) else text.encode())
    elif isinstance(text, bytes):
        sys.stdout.buffer.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _puzzle_table(res: dict) -> str:
    lines = [f"counts: {' '.join(map(str, res['counts']))}"]
    depth = len(res["counts"]) - 1
    for r in res["relations"]:
        if not r["piece"].startswith(f"P{depth},"):
            continue
        crit = f" critical={','.join(r['critical'])}" if r["critical"] else ""
        lines.append(f"{r['piece']} -> {r['image']}  parent={r['parent']} degree={r['degree']}{crit}")
    return "\n".join(lines)


def present(command: str, res: dict, a) -> int:
    """Print or write the response; return the exit code."""
    if command == "render":
        data = base64.b64decode(res["ppm_base64"])
        if a.out:
            _emit(data, a.out)
        summary = {k: res[k] for k in ("width", "height", "sha256", "fate_counts")}
        sys.stdout.write(_dump(summary) + "\n")
        return OK
    if command == "rays":
        if a.csv:
            _emit(res["csv"], a.out)
        else:
            _emit(_dump(res["rays"]), a.out)
        return OK
    if command == "puzzle":
        _emit(_dump(res) if a.json else _puzzle_table(res), a.out)
        return OK
    if command == "close-orbit":
        _emit(_dump(res), a.out)
        return OK if res["hyperbolic"] else FAILED
    if command == "glue-verify":
        _emit(_dump(res), a.out)
        return OK if res["passed"] else FAILED
    if command == "glue-solve":
        _emit(_dump(res), a.out)
        return OK if res["converged"] else FAILED
    if command == "curve":
        if a.out:
            rows = ["re,im"] + [f"{re_!r},{im!r}" for re_, im in res.pop("samples")]
            _emit("\n".join(rows), a.out)
        sys.stdout.write(_dump(res) + "\n")
        ok = res["winding"] == 1 and res["hausdorff_residual"] < a.cfg.tol_curve
        return OK if ok else FAILED
    _emit(_dump(res), a.out)
    return OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) and USAGE
    try:
        overrides = {k: v for k, v in vars(a).items()
                     if k.startswith(("tol.", "budget.")) and v is not None}
        cfg = cfgmod.load(a.config, overrides)
        a.out = a.out or cfg.out or None
        a.cfg = cfg
        path, body = request(a, cfg)
    except (UsageError, KeyError, ValueError, OSError) as e:
        sys.stderr.write(f"gluing: error: {e}\n")
        return USAGE
    with _client(a.server) as client:
        r = client.post(path, json=body)
    if r.status_code == 409:
        sys.stderr.write(f"gluing: {r.json().get('detail')}\n")
        return FAILED
    if r.status_code != 200:
        detail = r.json().get("detail") if r.headers.get("content-type", "").startswith("application/json") else r.text
        sys.stderr.write(f"gluing: error: {detail}\n")
        return USAGE
    return present(a.command, r.json(), a)


if __name__ == "__main__":
    raise SystemExit(main())
