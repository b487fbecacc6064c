"""Minimal image I/O: binary PGM (P5) and raw little-endian float32 with a shape sidecar."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

__all__ = ["read_pgm", "write_pgm", "pgm_bytes", "read_raw", "write_raw", "read_image", "phantom"]


def _tokens(data: bytes, count: int):
    """First ``count`` header tokens (comments skipped) and the offset after them."""
    pos, out = 0, []
    while len(out) < count:
        m = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)").match(data, pos)
        if m is None:
            raise ValueError("truncated PGM header")
        out.append(m.group(2))
        pos = m.end()
    return out, pos + 1  # single whitespace byte before the raster


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    (magic, w, h, maxval), off = _tokens(data, 4)
    if magic != b"P5":
        raise ValueError("only binary PGM (P5) is supported")
    w, h, maxval = int(w), int(h), int(maxval)
    if not (0 < maxval < 65536):
        raise ValueError("bad PGM maxval")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = w * h * dtype.itemsize
    raster = data[off:off + need]
    if len(raster) != need:
        raise ValueError("truncated PGM raster")
    return np.frombuffer(raster, dtype=dtype).reshape(h, w).astype(float)


def pgm_bytes(img) -> bytes:
    """8-bit P5 encoding with values rescaled linearly to [0, 255]."""
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("expected a 2-D image")
    lo, hi = float(img.min()), float(img.max())
    scaled = np.zeros(img.shape) if hi <= lo else (img - lo) / (hi - lo) * 255.0
    raster = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    return b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]) + raster.tobytes()


def write_pgm(path, img) -> None:
    Path(path).write_bytes(pgm_bytes(img))


def _sidecar(path) -> Path:
    return Path(str(path) + ".shape")


def read_raw(path) -> np.ndarray:
    """Raw float32 LE; the sidecar ``<path>.shape`` holds ``rows cols``."""
    side = _sidecar(path)
    if not side.exists():
        raise FileNotFoundError(f"missing shape sidecar {side}")
    shape = tuple(int(s) for s in side.read_text().split())
    if len(shape) != 2 or min(shape) < 1:
        raise ValueError("shape sidecar must hold two positive integers")
    arr = np.fromfile(path, dtype="<f4")
    if arr.size != shape[0] * shape[1]:
        raise ValueError("raw file size does not match its shape sidecar")
    return arr.reshape(shape).astype(float)


def write_raw(path, img) -> None:
    img = np.asarray(img)
    np.asarray(img, dtype="<f4").tofile(path)
    _sidecar(path).write_text(f"{img.shape[0]} {img.shape[1]}\n")


def read_image(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    return read_raw(path)


def phantom(shape=(64, 64), hot_pixels: int = 40, rng=None, hot_value: float = 1.0) -> np.ndarray:
    """Zero background, a dim ellipse below the default threshold and bright isolated pixels."""
    rng = np.random.default_rng(rng)
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    inside = ((yy - h / 2) / (0.4 * h)) ** 2 + ((xx - w / 2) / (0.3 * w)) ** 2 <= 1.0
    img = np.where(inside, 0.2, 0.0)
    cand = np.flatnonzero(inside.ravel())
    pick = rng.choice(cand, size=min(hot_pixels, cand.size), replace=False)
    img.ravel()[pick] = hot_value
    return img
