"""Runtime scaling measurements."""

from __future__ import annotations

import statistics
import time

import numpy as np

from .config import PipelineConfig
from .filters import guided_filter
from .pipeline import run

# standard runtime ladder, 128x128 up to 1024x1024, as (height, width)
SIZE_LADDER = (
    (128, 128),
    (128, 256),
    (256, 256),
    (256, 512),
    (512, 512),
    (512, 1024),
    (1024, 1024),
)


def parse_size(text: str) -> tuple[int, int]:
    """'WxH' -> (height, width)."""
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"size must look like WIDTHxHEIGHT, got {text!r}") from None
    if w < 1 or h < 1:
        raise ValueError(f"size must be positive, got {text!r}")
    return h, w


def noise_image(height, width, seed=0):
    return np.random.default_rng(seed).random((height, width, 3))


def time_call(func, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        times.append((time.perf_counter() - t0) * 1e3)
    return times


def bench_pipeline(sizes=SIZE_LADDER, repeat=3, seed=0, cfg: PipelineConfig = PipelineConfig()):
    """Median wall time of the full pipeline on uniform noise at each size."""
    rows = []
    for h, w in sizes:
        img = noise_image(h, w, seed)
        times = time_call(lambda: run(img, cfg), repeat)
        rows.append(
            {
                "width": w,
                "height": h,
                "pixels": w * h,
                "repeats": repeat,
                "median_ms": statistics.median(times),
                "min_ms": min(times),
            }
        )
    return rows


def bench_guided_radius(size=(512, 512), radii=(4, 32), repeat=5, eps=0.01, seed=0):
    """Median guided filter time for each radius on a fixed-size image."""
    rng = np.random.default_rng(seed)
    p = rng.random(size)
    g = rng.random(size)
    guided_filter(p, g, radii[0], eps)  # warm-up
    return {r: statistics.median(time_call(lambda: guided_filter(p, g, r, eps), repeat)) for r in radii}
