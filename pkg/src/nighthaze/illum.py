"""Illumination compensation.

The input is split into a scalar illumination layer L and a surrogate
reflectance R_hat with I = L * R_hat per channel. L is then brightened by
a power law and the result optionally stretched per channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .errors import DimensionError
from .filters import guided_filter, percentile, value_channel


@dataclass(frozen=True)
class DecompositionResult:
    illumination: np.ndarray  # (H, W), in [log_floor, 1]
    surrogate_reflectance: np.ndarray  # (H, W, 3), in [0, 1]

    def reconstruct(self) -> np.ndarray:
        return self.illumination[..., None] * self.surrogate_reflectance


def _check_color(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionError(f"expected an (H, W, 3) image, got shape {img.shape}")
    return img


def decompose(img, cfg: PipelineConfig = PipelineConfig()) -> DecompositionResult:
    """Estimate illumination and surrogate reflectance of a color image.

    The log of the V channel is smoothed by a self-guided filter and held
    above its starting value (illumination never falls below any channel).
    By default R_hat is the exact quotient I / L. With
    ``cfg.two_pass_reflectance`` the log residual is filtered as well, which
    no longer reconstructs the input exactly.
    """
    img = _check_color(img)
    v = value_channel(img)
    ll0 = np.log(np.maximum(v, cfg.log_floor))
    ll = guided_filter(ll0, ll0, cfg.gf_radius, cfg.gf_epsilon)
    ll = np.clip(ll, ll0, 0.0)
    L = np.exp(ll)
    if cfg.two_pass_reflectance:
        ii = np.log(np.maximum(img, cfg.log_floor))
        rr = np.stack(
            [guided_filter(ii[..., c] - ll, ll0, cfg.gf_radius, cfg.gf_epsilon) for c in range(3)],
            axis=2,
        )
        r_hat = np.clip(np.exp(rr), 0.0, 1.0)
    else:
        r_hat = np.clip(img / L[..., None], 0.0, 1.0)
    return DecompositionResult(L, r_hat)


def gamma_correct(dec: DecompositionResult, gamma: float) -> np.ndarray:
    """Return L**gamma * R_hat, clipped to [0, 1]."""
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    lit = dec.illumination**gamma
    return np.clip(lit[..., None] * dec.surrogate_reflectance, 0.0, 1.0)


def stretch(img, lo_rank=5.0, hi_rank=95.0) -> np.ndarray:
    """Per-channel affine stretch mapping the lo/hi percentiles to 0 and 1.

    A channel whose percentile spread is below 1e-6 is returned unchanged.
    """
    if not lo_rank < hi_rank:
        raise ValueError(f"lo_rank must be below hi_rank, got {lo_rank}, {hi_rank}")
    img = np.asarray(img, dtype=np.float64)
    planes = img[..., None] if img.ndim == 2 else img
    out = planes.copy()
    for c in range(planes.shape[2]):
        lo = percentile(planes[..., c], lo_rank)
        hi = percentile(planes[..., c], hi_rank)
        if hi - lo < 1e-6:
            continue
        out[..., c] = np.clip((planes[..., c] - lo) / (hi - lo), 0.0, 1.0)
    return out[..., 0] if img.ndim == 2 else out
