"""Linear-time windowed kernels shared by every pipeline stage.

Images are float64 numpy arrays in [0, 1], shaped (H, W) for single-channel
maps and (H, W, 3) for color images. All windowed operations use square
(2r+1) x (2r+1) windows clipped to the image; means divide by the number of
in-bounds pixels rather than padding the border.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .errors import DimensionError


def _check_plane(img, radius=None, name="img"):
    img = np.asarray(img, dtype=np.float64)
    if img.size == 0:
        raise ValueError("empty input")
    if img.ndim != 2:
        raise DimensionError(f"{name} must be single-channel (H, W), got shape {img.shape}")
    if radius is not None and (int(radius) != radius or radius < 1):
        raise ValueError(f"radius must be an integer >= 1, got {radius}")
    return img


def _window_sum_1d(a, radius, axis):
    # Running sums along one axis via a zero-prefixed cumulative sum.
    n = a.shape[axis]
    c = np.cumsum(a, axis=axis)
    zero_shape = list(a.shape)
    zero_shape[axis] = 1
    c = np.concatenate([np.zeros(zero_shape), c], axis=axis)
    idx = np.arange(n)
    hi = np.minimum(idx + radius + 1, n)
    lo = np.maximum(idx - radius, 0)
    return np.take(c, hi, axis=axis) - np.take(c, lo, axis=axis)


def _window_counts(shape, radius):
    h, w = shape
    rows = np.minimum(np.arange(h) + radius + 1, h) - np.maximum(np.arange(h) - radius, 0)
    cols = np.minimum(np.arange(w) + radius + 1, w) - np.maximum(np.arange(w) - radius, 0)
    return np.outer(rows, cols).astype(np.float64)


def box_sum(img, radius):
    """Sum over the clipped window around each pixel."""
    img = _check_plane(img, radius)
    return _window_sum_1d(_window_sum_1d(img, radius, 0), radius, 1)


def box_mean(img, radius):
    """Border-aware mean over a (2r+1)^2 window, O(N) in the pixel count.

    Each output pixel is the window sum divided by the number of pixels of
    the window that fall inside the image. Cost does not depend on radius.

    Args:
        img: 2-D array.
        radius: window half-size, >= 1.

    Returns:
        float64 array with the same shape as ``img``.
    """
    img = _check_plane(img, radius)
    return box_sum(img, radius) / _window_counts(img.shape, radius)


def window_min(img, radius):
    """Minimum over the clipped (2r+1)^2 window around each pixel."""
    img = _check_plane(img, radius)
    # edge replication never introduces a value from outside the clipped window
    return ndimage.minimum_filter(img, size=2 * radius + 1, mode="nearest")


def window_max(img, radius):
    """Maximum over the clipped (2r+1)^2 window around each pixel."""
    img = _check_plane(img, radius)
    return ndimage.maximum_filter(img, size=2 * radius + 1, mode="nearest")


def guided_filter(p, guide, radius, eps):
    """Edge-preserving smoothing of ``p`` steered by a grayscale ``guide``.

    Fits ``q = a * guide + b`` in every window k with
    ``a_k = cov(guide, p) / (var(guide) + eps)`` and
    ``b_k = mean(p) - a_k * mean(guide)``, then averages the coefficients of
    all windows covering each pixel. Built on box means only, so the cost is
    linear in the pixel count and independent of ``radius``.
    """
    p = _check_plane(p, radius, "p")
    guide = _check_plane(guide, radius, "guide")
    if p.shape != guide.shape:
        raise DimensionError(f"p and guide differ in shape: {p.shape} vs {guide.shape}")
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    counts = _window_counts(p.shape, radius)

    def mean(x):
        return _window_sum_1d(_window_sum_1d(x, radius, 0), radius, 1) / counts

    mean_g = mean(guide)
    mean_p = mean(p)
    cov_gp = mean(guide * p) - mean_g * mean_p
    var_g = mean(guide * guide) - mean_g * mean_g
    a = cov_gp / (var_g + eps)
    b = mean_p - a * mean_g
    return mean(a) * guide + mean(b)


def value_channel(img):
    """HSV value: per-pixel maximum over the RGB channels."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionError(f"expected an (H, W, 3) image, got shape {img.shape}")
    return img.max(axis=2)


def gray(img):
    """Channel mean of a color image; single-channel input passes through."""
    img = np.asarray(img, dtype=np.float64)
    return img.mean(axis=2) if img.ndim == 3 else img


def percentile(img, rank):
    """Nearest-rank percentile: the ceil(rank/100 * N)-th smallest value."""
    values = np.asarray(img, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("empty input")
    if not 0 <= rank <= 100:
        raise ValueError(f"rank must lie in [0, 100], got {rank}")
    n = values.size
    k = min(max(math.ceil(rank * n / 100), 1), n)
    return float(np.partition(values, k - 1)[k - 1])


def apply_per_channel(func, img, *args, **kwargs):
    """Apply a single-channel operation to each channel of an (H, W, C) image."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return func(img, *args, **kwargs)
    return np.stack([func(img[..., c], *args, **kwargs) for c in range(img.shape[2])], axis=2)
