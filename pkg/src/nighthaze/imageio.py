"""PNG / binary PPM / PGM reading and writing.

Pixels map linearly to [0, 1] on load (divide by 255 or 65535) and back
with round-half-up quantization on save. Color images are RGB, (H, W, 3).
"""

from __future__ import annotations

import os
from pathlib import Path

import cv2
import numpy as np

from .errors import ImageIOError

SUPPORTED_SUFFIXES = (".png", ".ppm", ".pgm", ".pnm")


def read_image(path) -> np.ndarray:
    """Load an 8- or 16-bit image as float64 in [0, 1].

    Alpha channels are dropped. Grayscale files give (H, W) arrays.
    """
    path = Path(path)
    if not path.is_file():
        raise ImageIOError(f"cannot read {path}: no such file")
    raw = cv2.imread(os.fspath(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageIOError(f"cannot decode {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise ImageIOError(f"unsupported sample type {raw.dtype} in {path}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = raw[..., :3]
        raw = raw[..., ::-1]  # BGR -> RGB
    return raw.astype(np.float64) / scale


def quantize(img, bit_depth=8) -> np.ndarray:
    """Round-half-up quantization of [0, 1] data to unsigned integers."""
    maxval = (1 << bit_depth) - 1
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    img = np.clip(np.nan_to_num(np.asarray(img, dtype=np.float64)), 0.0, 1.0)
    return np.floor(img * maxval + 0.5).astype(dtype)


def write_image(path, img, bit_depth=8) -> Path:
    """Save a [0, 1] array. ``bit_depth`` is 8 or 16."""
    if bit_depth not in (8, 16):
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    path = Path(path)
    if path.suffix.lower() not in SUPPORTED_SUFFIXES:
        raise ImageIOError(f"unsupported output format: {path.suffix or '(none)'}")
    q = quantize(img, bit_depth)
    if q.ndim == 3:
        if path.suffix.lower() == ".pgm":
            raise ImageIOError(f"cannot store a color image as PGM: {path}")
        q = np.ascontiguousarray(q[..., ::-1])
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(os.fspath(path), q):
        raise ImageIOError(f"cannot write {path}")
    return path


def read_disparity(path) -> np.ndarray:
    """Load a disparity map normalized by its maximum; zeros mark holes."""
    d = read_image(path)
    if d.ndim == 3:
        d = d.mean(axis=2)
    peak = d.max()
    if peak <= 0:
        return d
    return d / peak
