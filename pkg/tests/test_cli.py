import json

import pytest

from gluing import config as cfgmod
from gluing.cli import main
from gluing.render import read_ppm

from conftest import DATA

PCF_MAP = json.dumps({"gamma": [1, 0], "m": 3, "zeros": [[0, -2]], "poles": [[0, -0.125]]})


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_puzzle_toy_table(capsys):
    code, out, _ = run(capsys, "puzzle", "--toy-model", "--depth", "2")
    assert code == 0
    assert out.splitlines()[0] == "counts: 1 2 6"
    assert sum(line.startswith("P2,") for line in out.splitlines()) == 6


def test_render_writes_ppm(capsys, tmp_path):
    path = tmp_path / "z2.ppm"
    code, out, _ = run(capsys, "--out", str(path), "render", "--map", '{"power": 2}',
                       "--pixels", "32", "--max-iter", "40")
    assert code == 0
    assert read_ppm(path).shape == (32, 32, 3)
    assert json.loads(out)["width"] == 32


def test_fixed_points(capsys):
    code, out, _ = run(capsys, "fixed-points", "--map", str(DATA / "power2.json"))
    assert code == 0 and len(json.loads(out)["points"]) == 2


def test_rays_csv(capsys):
    code, out, _ = run(capsys, "rays", "--map", '{"power": 2}', "--angles", "1/3,2/3", "--csv")
    assert code == 0 and out.startswith("basin,angle_num,angle_den")


def test_glue_solve_circle(capsys):
    code, out, _ = run(capsys, "glue-solve", "--circle", "2")
    assert code == 0 and len(json.loads(out)["circle"]) == 2


def test_close_orbit_budget_exhausted(capsys):
    graph = json.dumps({"edges": [["A", "B"], ["B", "C"], ["C", "A"]], "critical": {"c": "A"}})
    code, _, err = run(capsys, "close-orbit", "--graph", graph, "--k-max", "2")
    assert code == 2 and err
    code, out, _ = run(capsys, "close-orbit", "--graph", str(DATA / "full-shift.json"))
    assert code == 0 and json.loads(out)["hyperbolic"]


def test_verify_failure_exit_code(capsys):
    code, out, _ = run(capsys, "--budget.iteration", "100", "glue-verify", "--map",
                       PCF_MAP, "--problem", str(DATA / "self-gluing.json"), "--no-rays")
    assert code == 2 and not json.loads(out)["passed"]


@pytest.mark.parametrize("argv", [
    [],
    ["render"],
    ["puzzle", "--critical", "nolabel"],
    ["--tol.mult", "-1", "puzzle", "--toy-model"],
    ["fixed-points", "--map", '{"nope": 1}'],
    ["rays", "--map", "not json and no file"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_config_file(tmp_path):
    cfg = cfgmod.load(DATA / "example.cfg", {"tol.curve": "0.5"})
    assert cfg.tol_mult == 2e-3 and cfg.budget_iteration == 500 and cfg.tol_curve == 0.5
    bad = tmp_path / "bad.cfg"
    bad.write_text("tol.mult 3\n")
    with pytest.raises(ValueError):
        cfgmod.load(bad)
    with pytest.raises(KeyError):
        cfgmod.load(None, {"tol.nope": "1"})
