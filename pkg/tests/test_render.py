import numpy as np

from gluing.core_maps import power_map
from gluing.render import View, escape_counts, grid, overlay, read_ppm, render, to_ppm, write_ppm


def test_ppm_round_trip(tmp_path):
    img = render(power_map(2), View(pixels=32, max_iter=64))
    path = tmp_path / "a.ppm"
    write_ppm(path, img)
    assert path.read_bytes().startswith(b"P6\n32 32\n255\n")
    assert np.array_equal(read_ppm(path), img)


def test_z2_boundary_is_unit_circle():
    view = View(pixels=128, max_iter=200)
    _, fate = escape_counts(power_map(2), view)
    z = grid(view)
    step = view.width / view.pixels
    # fate changes only across the unit circle
    inside = fate == 2
    far = np.abs(np.abs(z) - 1) > 1.5 * step
    assert np.array_equal(inside[far], (np.abs(z) < 1)[far])


def test_render_is_deterministic():
    v = View(pixels=48, max_iter=64)
    assert to_ppm(render(power_map(2), v)) == to_ppm(render(power_map(2), v))


def test_overlay_marks_points():
    v = View(pixels=64)
    img = np.zeros((64, 64, 3), dtype=np.uint8)
    out = overlay(img, v, [0j, 10 + 10j], color=(1, 2, 3))
    assert (out != 0).any(axis=-1).sum() == 1
    assert not img.any()
