"""Escape-time pictures of the basins of 0 and infinity, written as binary PPM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_maps import GluingForm, MarkedPoly, eval_map


@dataclass(frozen=True)
class View:
    center: complex = 0j
    width: float = 4.0
    pixels: int = 512
    max_iter: int = 256
    escape_radius: float = 1e8
    capture_radius: float = 1e-8


def grid(view: View) -> np.ndarray:
    n = view.pixels
    step = view.width / n
    xs = view.center.real + (np.arange(n) - (n - 1) / 2) * step
    ys = view.center.imag - (np.arange(n) - (n - 1) / 2) * step
    return xs[None, :] + 1j * ys[:, None]


def escape_counts(f, view: View) -> tuple[np.ndarray, np.ndarray]:
    """Per pixel: iteration count and fate (1 infinity, 2 origin, 0 neither)."""
    has_origin = isinstance(f, (MarkedPoly, GluingForm))
    z = grid(view).ravel()
    count = np.full(z.shape, view.max_iter, dtype=np.int32)
    fate = np.zeros(z.shape, dtype=np.uint8)
    idx = np.arange(z.size)
    w = z.copy()
    with np.errstate(all="ignore"):
        for n in range(view.max_iter):
            out = ~np.isfinite(w) | (np.abs(w) > view.escape_radius)
            cap = (np.abs(w) < view.capture_radius) if has_origin else np.zeros_like(out)
            done = out | cap
            if done.any():
                count[idx[done]] = n
                fate[idx[out]] = 1
                fate[idx[cap & ~out]] = 2
                keep = ~done
                idx, w = idx[keep], w[keep]
            if idx.size == 0:
                break
            w = eval_map(f, w)
    shape = (view.pixels, view.pixels)
    return count.reshape(shape), fate.reshape(shape)


def colorize(count: np.ndarray, fate: np.ndarray) -> np.ndarray:
    img = np.zeros(count.shape + (3,), dtype=np.uint8)
    shade = (255 - np.minimum(count * 6, 215)).astype(np.uint8)
    inf = fate == 1
    org = fate == 2
    img[inf] = np.stack([shade[inf] // 4, shade[inf] // 2, shade[inf]], axis=-1)
    img[org] = np.stack([shade[org], shade[org] // 2, shade[org] // 6], axis=-1)
    img[fate == 0] = (24, 24, 24)
    return img


def render(f, view: View = View()) -> np.ndarray:
    return colorize(*escape_counts(f, view))


def to_ppm(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode() + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def write_ppm(path, img: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(to_ppm(img))


def read_ppm(path) -> np.ndarray:
    data = open(path, "rb").read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


def overlay(img: np.ndarray, view: View, points, color=(255, 255, 255)) -> np.ndarray:
    """Copy of img with the pixels nearest to each point set to color."""
    out = img.copy()
    n = view.pixels
    step = view.width / n
    p = np.asarray(points, dtype=complex).ravel()
    col = np.rint((p.real - view.center.real) / step + (n - 1) / 2).astype(int)
    row = np.rint((view.center.imag - p.imag) / step + (n - 1) / 2).astype(int)
    ok = (col >= 0) & (col < n) & (row >= 0) & (row < n)
    out[row[ok], col[ok]] = color
    return out
