"""Incident light color estimation and removal."""

from __future__ import annotations

import numpy as np

from .config import PipelineConfig
from .errors import DimensionError
from .filters import guided_filter, value_channel, window_max


def eta_lower_bound(i_hat, L, cfg: PipelineConfig = PipelineConfig(), lit=None):
    """Raw per-channel light color: patch max of I_hat over patch max of L**gamma.

    ``lit`` replaces L**gamma when the illumination was compensated some
    other way (e.g. a fitted curve). Result is clipped to [eta_floor, 1].
    """
    i_hat = np.asarray(i_hat, dtype=np.float64)
    if lit is None:
        lit = np.asarray(L, dtype=np.float64) ** cfg.gamma
    if i_hat.ndim != 3 or i_hat.shape[:2] != np.shape(lit):
        raise DimensionError(f"shape mismatch: {i_hat.shape} vs {np.shape(lit)}")
    r = cfg.patch_radius
    den = np.maximum(window_max(lit, r), cfg.log_floor)
    raw = np.stack([window_max(i_hat[..., c], r) for c in range(i_hat.shape[2])], axis=2)
    return np.clip(raw / den[..., None], cfg.eta_floor, 1.0)


def amplification_factor(eta, gamma0, floor=1e-12):
    """m**gamma0 / m where m is the channel mean of ``eta`` (per pixel)."""
    m = np.maximum(np.asarray(eta).mean(axis=-1), floor)
    return m ** (gamma0 - 1.0)


def refine_eta(raw, guide, cfg: PipelineConfig = PipelineConfig()):
    """Smooth the raw estimate with a guided filter, then amplify it.

    The lower bound underestimates the light color, so each pixel is scaled
    by m**gamma0 / m (m = mean over channels), which is >= 1 whenever m <= 1.
    ``cfg.eta_amplify_global`` uses one image-wide m instead.
    """
    raw = np.asarray(raw, dtype=np.float64)
    guide = np.asarray(guide, dtype=np.float64)
    if raw.ndim != 3 or raw.shape[:2] != guide.shape:
        raise DimensionError(f"shape mismatch: {raw.shape} vs {guide.shape}")
    eta = np.stack(
        [guided_filter(raw[..., c], guide, cfg.gf_radius, cfg.gf_epsilon) for c in range(raw.shape[2])],
        axis=2,
    )
    if cfg.eta_amplify_global:
        f = amplification_factor(eta.reshape(-1, eta.shape[2]).mean(axis=0), cfg.gamma0)
    else:
        f = amplification_factor(eta, cfg.gamma0)[..., None]
    return np.clip(eta * f, cfg.eta_floor, 1.0)


def estimate_eta(i_hat, L, cfg: PipelineConfig = PipelineConfig(), lit=None):
    """Lower bound followed by refinement, guided by the V channel of I_hat."""
    raw = eta_lower_bound(i_hat, L, cfg, lit=lit)
    return refine_eta(raw, value_channel(i_hat), cfg)


def color_correct(i_hat, eta, eta_floor=0.05):
    """Divide out the light color channel-wise, clipped to [0, 1]."""
    i_hat = np.asarray(i_hat, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if i_hat.shape != eta.shape:
        raise DimensionError(f"shape mismatch: {i_hat.shape} vs {eta.shape}")
    return np.clip(i_hat / np.maximum(eta, eta_floor), 0.0, 1.0)
