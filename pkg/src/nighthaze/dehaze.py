"""Dark-channel dehazing with a pointwise environmental light."""

from __future__ import annotations

import numpy as np

from .config import PipelineConfig
from .errors import DimensionError
from .filters import guided_filter, value_channel, window_min


def dark_channel(img, radius):
    """Channel minimum followed by a windowed minimum."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3:
        raise DimensionError(f"expected an (H, W, C) image, got shape {img.shape}")
    return window_min(img.min(axis=2), radius)


def _first_argmax_1d(values, radius, axis):
    # For each position, index along ``axis`` of the first maximum inside the
    # clipped window. Offsets are visited in increasing order and only a
    # strictly larger value replaces the incumbent, so ties keep the smallest index.
    n = values.shape[axis]
    idx = np.arange(n)
    shape = [1, 1]
    shape[axis] = n
    idx = idx.reshape(shape)
    best_val = np.full(values.shape, -np.inf)
    best_idx = np.zeros(values.shape, dtype=np.intp)
    for off in range(-radius, radius + 1):
        src = idx + off
        valid = (src >= 0) & (src < n)
        src_c = np.clip(src, 0, n - 1)
        cand = np.take_along_axis(values, np.broadcast_to(src_c, values.shape), axis=axis)
        cand = np.where(valid, cand, -np.inf)
        better = cand > best_val
        best_val = np.where(better, cand, best_val)
        best_idx = np.where(better, np.broadcast_to(src_c, values.shape), best_idx)
    return best_val, best_idx


def window_argmax(values, radius):
    """Row and column of the first (row-major) maximum in each clipped window."""
    values = np.asarray(values, dtype=np.float64)
    row_val, row_col = _first_argmax_1d(values, radius, axis=1)
    # smallest row among tied row maxima, then that row's first column
    _, best_row = _first_argmax_1d(row_val, radius, axis=0)
    best_col = np.take_along_axis(row_col, best_row, axis=0)
    return best_row, best_col


def raw_env_light(i_tilde, radius):
    """Color at the brightest-dark-channel pixel of each local patch."""
    i_tilde = np.asarray(i_tilde, dtype=np.float64)
    dc = dark_channel(i_tilde, radius)
    rows, cols = window_argmax(dc, radius)
    return i_tilde[rows, cols]


def estimate_env_light(i_tilde, cfg: PipelineConfig = PipelineConfig()):
    """Pointwise environmental light A, smoothed and clipped to [log_floor, 1]."""
    i_tilde = np.asarray(i_tilde, dtype=np.float64)
    raw = raw_env_light(i_tilde, cfg.patch_radius)
    guide = value_channel(i_tilde)
    A = np.stack(
        [guided_filter(raw[..., c], guide, cfg.gf_radius, cfg.gf_epsilon) for c in range(3)],
        axis=2,
    )
    return np.clip(A, cfg.log_floor, 1.0)


def raw_transmission(i_tilde, A, omega, radius):
    """1 - omega * dark_channel(I / A)."""
    i_tilde = np.asarray(i_tilde, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    if i_tilde.shape != np.broadcast_shapes(i_tilde.shape, A.shape):
        raise DimensionError(f"shape mismatch: {i_tilde.shape} vs {A.shape}")
    if np.any(A <= 0):
        raise ValueError("environmental light must be strictly positive")
    return 1.0 - omega * dark_channel(i_tilde / A, radius)


def refine_transmission(raw, i_tilde, cfg: PipelineConfig = PipelineConfig()):
    t = guided_filter(raw, value_channel(i_tilde), cfg.gf_radius, cfg.gf_epsilon)
    return np.clip(t, cfg.t_floor, 1.0)


def estimate_transmission(i_tilde, A, cfg: PipelineConfig = PipelineConfig()):
    """Guided-filter-refined transmission clipped to [t_floor, 1]."""
    raw = raw_transmission(i_tilde, A, cfg.omega, cfg.patch_radius)
    return refine_transmission(raw, i_tilde, cfg)


def compose(J, A, t):
    """Forward haze model I = J * t + A * (1 - t)."""
    t = np.asarray(t, dtype=np.float64)[..., None]
    return np.asarray(J) * t + np.asarray(A) * (1.0 - t)


def recover(i_tilde, A, t, clip=True):
    """Invert the haze model: J = (I - A) / t + A."""
    i_tilde = np.asarray(i_tilde, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if t.shape != i_tilde.shape[:2]:
        raise DimensionError(f"shape mismatch: {i_tilde.shape} vs {t.shape}")
    J = (i_tilde - A) / t[..., None] + A
    return np.clip(J, 0.0, 1.0) if clip else J
