"""The full three-stage restoration: illumination, color, haze."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import color, dehaze, illum
from .config import PipelineConfig
from .synth import apply_poly

STAGES = ("illumination", "color", "dehaze")

# maps written by --dump-intermediates, in pipeline order
INTERMEDIATES = (
    "illumination",
    "reflectance",
    "compensated",
    "eta",
    "color_corrected",
    "dark_channel",
    "transmission_raw",
    "transmission",
    "env_light",
)


@dataclass
class PipelineResult:
    output: np.ndarray
    intermediates: dict[str, np.ndarray] = field(default_factory=dict)
    timings_ms: dict[str, float] = field(default_factory=dict)


def run(img, cfg: PipelineConfig = PipelineConfig(), illum_coeffs=None, keep=False) -> PipelineResult:
    """Restore one nighttime hazy RGB image.

    Args:
        img: (H, W, 3) float array in [0, 1].
        cfg: pipeline configuration.
        illum_coeffs: optional polynomial (lowest order first) used instead
            of the gamma curve to compensate illumination.
        keep: keep every intermediate map on the result.
    """
    img = np.asarray(img, dtype=np.float64)
    timings = {}
    maps = {}

    t0 = time.perf_counter()
    dec = illum.decompose(img, cfg)
    if illum_coeffs is None:
        lit = dec.illumination**cfg.gamma
    else:
        lit = apply_poly(dec.illumination, illum_coeffs, floor=cfg.log_floor)
    i_hat = np.clip(lit[..., None] * dec.surrogate_reflectance, 0.0, 1.0)
    if cfg.stretch_enabled and not cfg.stretch_after_color:
        i_hat = illum.stretch(i_hat, cfg.stretch_lo, cfg.stretch_hi)
    timings["illumination"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    if cfg.force_unit_eta:
        eta = np.ones_like(i_hat)
        i_tilde = i_hat
    else:
        eta = color.estimate_eta(i_hat, dec.illumination, cfg, lit=lit)
        i_tilde = color.color_correct(i_hat, eta, cfg.eta_floor)
    if cfg.stretch_enabled and cfg.stretch_after_color:
        i_tilde = illum.stretch(i_tilde, cfg.stretch_lo, cfg.stretch_hi)
    timings["color"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    A = dehaze.estimate_env_light(i_tilde, cfg)
    t_raw = dehaze.raw_transmission(i_tilde, A, cfg.omega, cfg.patch_radius)
    t = dehaze.refine_transmission(t_raw, i_tilde, cfg)
    J = dehaze.recover(i_tilde, A, t)
    timings["dehaze"] = (time.perf_counter() - t0) * 1e3

    if keep:
        maps = {
            "illumination": dec.illumination,
            "reflectance": dec.surrogate_reflectance,
            "compensated": i_hat,
            "eta": eta,
            "color_corrected": i_tilde,
            "dark_channel": dehaze.dark_channel(i_tilde, cfg.patch_radius),
            "transmission_raw": np.clip(t_raw, 0.0, 1.0),
            "transmission": t,
            "env_light": A,
        }
    return PipelineResult(J, maps, timings)


def restore(img, cfg: PipelineConfig = PipelineConfig()) -> np.ndarray:
    """Shorthand for ``run(img, cfg).output``."""
    return run(img, cfg).output
