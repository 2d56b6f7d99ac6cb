"""Synthetic nighttime haze scenes with full ground truth.

A clear image serves as reflectance R and a normalized disparity map d
gives transmission t = 0.8 d. A single light source sits at the camera-side
origin; its falloff L = 1 - beta * dis is the linearized exponential
attenuation over the normalized distance to each scene point. Scattered
light B is a guided-filter average of incident and reflected light, and
the hazy image is

    I = L * eta * R * t + B * (1 - t).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import ndimage

from .config import SynthConfig, parse_config_text
from .errors import DimensionError
from .filters import guided_filter, value_channel
from .imageio import write_image

FORWARD_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SyntheticScene:
    reflectance: np.ndarray  # R, (H, W, 3)
    disparity: np.ndarray  # d, (H, W), in (0, 1]
    transmission: np.ndarray  # t, (H, W)
    illumination: np.ndarray  # L, (H, W)
    eta_true: tuple[float, float, float]
    sigma_true: np.ndarray  # (H, W, 3)
    env_light: np.ndarray  # B, (H, W, 3)
    hazy: np.ndarray  # I, (H, W, 3)
    distance: np.ndarray  # normalized light-to-point distance

    @property
    def eta_map(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.eta_true), self.hazy.shape)

    def forward_residual(self) -> float:
        """Max deviation of the stored hazy image from the forward model."""
        t = self.transmission[..., None]
        model = self.illumination[..., None] * self.eta_map * self.reflectance * t + self.env_light * (1 - t)
        return float(np.abs(model - self.hazy).max())

    def clear_illumination(self, gamma=None) -> np.ndarray:
        """Ground-truth illumination layer (L, or L**gamma) broadcast to color."""
        L = self.illumination if gamma is None else self.illumination**gamma
        return L[..., None] * np.ones(3)


def fill_holes(disparity) -> np.ndarray:
    """Replace zero (or non-finite) entries by the nearest valid value."""
    d = np.array(disparity, dtype=np.float64)
    invalid = ~np.isfinite(d) | (d <= 0)
    if invalid.all():
        raise ValueError("degenerate disparity")
    if invalid.any():
        _, (ri, ci) = ndimage.distance_transform_edt(invalid, return_indices=True)
        d = d[ri, ci]
    return d


def scene_distance(disparity, focal_scale=1.0, normalize=True) -> np.ndarray:
    """Distance from the light source at the origin to every scene point.

    Pinhole back-projection with focal length ``focal_scale * W`` and the
    principal point at the image center: Z = 1/d, X = (u - W/2) Z / f,
    Y = (v - H/2) Z / f. Normalized by its maximum unless ``normalize`` is off.
    """
    d = fill_holes(disparity)
    if d.ndim != 2:
        raise DimensionError(f"disparity must be (H, W), got {d.shape}")
    h, w = d.shape
    f = focal_scale * w
    z = 1.0 / d
    u = np.arange(w)[None, :] - w / 2
    v = np.arange(h)[:, None] - h / 2
    dist = z * np.sqrt((u / f) ** 2 + (v / f) ** 2 + 1.0)
    return dist / dist.max() if normalize else dist


def generate(reflectance, disparity, cfg: SynthConfig = SynthConfig()) -> SyntheticScene:
    """Render a nighttime hazy image and keep every ground-truth layer."""
    R = np.asarray(reflectance, dtype=np.float64)
    if R.ndim != 3 or R.shape[2] != 3:
        raise DimensionError(f"reflectance must be (H, W, 3), got {R.shape}")
    d = np.asarray(disparity, dtype=np.float64)
    if d.shape != R.shape[:2]:
        raise DimensionError(f"disparity {d.shape} does not match image {R.shape[:2]}")
    d = fill_holes(d)
    d = d / d.max()
    eta = np.asarray(cfg.light_color, dtype=np.float64)

    t = cfg.transmission_scale * d
    dis = scene_distance(d, cfg.focal_scale)
    L = 1.0 - cfg.beta * dis
    incident = L[..., None] * eta
    S = cfg.alpha * incident + (1 - cfg.alpha) * incident * R
    guide = value_channel(S)
    B = np.stack(
        [guided_filter(S[..., c], guide, cfg.env_patch_radius, cfg.env_gf_epsilon) for c in range(3)],
        axis=2,
    )
    B = np.maximum(B, 0.0)
    sigma = B / np.maximum(L, cfg.log_floor)[..., None]
    tt = t[..., None]
    hazy = incident * R * tt + B * (1 - tt)
    scene = SyntheticScene(
        reflectance=R,
        disparity=d,
        transmission=t,
        illumination=L,
        eta_true=tuple(float(c) for c in eta),
        sigma_true=sigma,
        env_light=B,
        hazy=hazy,
        distance=dis,
    )
    residual = scene.forward_residual()
    if residual > FORWARD_TOLERANCE:
        raise AssertionError(f"forward model violated by {residual:g}")
    return scene


def fit_illumination_poly(hazy_L, clear_L, degree=3, bins=64):
    """Fit clear illumination as a polynomial of hazy illumination.

    Hazy values are split into ``bins`` equal-width bins over their range.
    In each occupied bin the pixel with the largest clear value is an
    upper-bound point; a least-squares polynomial through those points,
    weighted by bin occupancy, is returned lowest order first.
    """
    x = np.asarray(hazy_L, dtype=np.float64).ravel()
    y = np.asarray(clear_L, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch: {np.shape(hazy_L)} vs {np.shape(clear_L)}")
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    lo, hi = x.min(), x.max()
    span = hi - lo if hi > lo else 1.0
    which = np.minimum(((x - lo) / span * bins).astype(np.intp), bins - 1)
    # stable sort by (bin, clear value): the last entry of each bin is its max
    order = np.lexsort((y, which))
    sorted_bins = which[order]
    last = np.flatnonzero(np.r_[sorted_bins[1:] != sorted_bins[:-1], True])
    pick = order[last]
    counts = np.bincount(which, minlength=bins)[which[pick]]
    if pick.size < degree + 1:
        raise ValueError("insufficient support")
    return P.polyfit(x[pick], y[pick], degree, w=np.sqrt(counts)).tolist()


def apply_poly(L, coeffs, floor=1.0 / 255.0):
    """Horner evaluation of ``coeffs`` (lowest order first), clipped to [floor, 1]."""
    if len(coeffs) == 0:
        raise ValueError("empty coefficient list")
    L = np.asarray(L, dtype=np.float64)
    out = np.full_like(L, float(coeffs[-1]))
    for c in reversed(coeffs[:-1]):
        out = out * L + c
    return np.clip(out, floor, 1.0)


SCENE_MAPS = {
    "reflectance": "reflectance",
    "disparity": "disparity",
    "transmission": "transmission",
    "illumination": "illumination",
    "sigma": "sigma_true",
    "env_light": "env_light",
    "hazy": "hazy",
}


def save_scene(scene: SyntheticScene, directory, cfg: SynthConfig, bit_depth=16) -> Path:
    """Write every map as a PNG plus ``manifest.txt`` (key = value lines)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [f"{k} = {v}" for k, v in _synth_cfg_items(cfg)]
    lines.append(f"eta_true = {','.join(repr(c) for c in scene.eta_true)}")
    lines.append(f"height = {scene.hazy.shape[0]}")
    lines.append(f"width = {scene.hazy.shape[1]}")
    for name, attr in SCENE_MAPS.items():
        path = write_image(directory / f"{name}.png", getattr(scene, attr), bit_depth=bit_depth)
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        lines.append(f"sha256.{name} = {digest}")
    manifest = directory / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def _synth_cfg_items(cfg: SynthConfig):
    for key, value in vars(cfg).items():
        if isinstance(value, tuple):
            value = ",".join(repr(float(v)) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        yield key, value


def read_manifest(path) -> dict[str, str]:
    return parse_config_text(Path(path).read_text())
