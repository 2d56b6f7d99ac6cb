"""Image quality measures: PSNR, SSIM, RMSE and a no-reference visual measure."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DimensionError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DYNAMIC_RANGE = 255.0


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty input")
    return a, b


def luminance(img):
    """Channel mean on the 0-255 scale."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 3:
        img = img.mean(axis=2)
    return img * DYNAMIC_RANGE


@dataclass(frozen=True)
class VisualMeasure:
    mean_of_means: float
    mean_of_stds: float

    @property
    def product(self) -> float:
        return self.mean_of_means * self.mean_of_stds

    def is_visually_good(self) -> bool:
        return is_visually_good(self.mean_of_means, self.mean_of_stds)


def visual_measure(img, patch=50) -> VisualMeasure:
    """Mean of tile means and mean of tile standard deviations.

    The image luminance (0-255) is cut into non-overlapping patch x patch
    tiles; partial tiles on the right and bottom are ignored. Standard
    deviations are population (ddof=0) values.
    """
    lum = luminance(img)
    h, w = lum.shape
    ny, nx = h // patch, w // patch
    if ny == 0 or nx == 0:
        raise ValueError(f"image {h}x{w} is smaller than one {patch}x{patch} tile")
    tiles = lum[: ny * patch, : nx * patch].reshape(ny, patch, nx, patch).swapaxes(1, 2)
    tiles = tiles.reshape(ny, nx, -1)
    return VisualMeasure(float(tiles.mean(axis=2).mean()), float(tiles.std(axis=2).mean()))


def is_visually_good(mean_of_means, mean_of_stds) -> bool:
    """Jobson's 'visually good' region: mean in [100, 200], std in [40, 80]."""
    return 100 <= mean_of_means <= 200 and 40 <= mean_of_stds <= 80


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def rmse(a, b) -> float:
    """Root mean squared difference on the [0, 1] scale."""
    return math.sqrt(mse(a, b))


def psnr(a, b) -> float:
    """PSNR in dB on the 0-255 scale; identical inputs give +inf."""
    err = mse(a, b) * DYNAMIC_RANGE**2
    if err == 0:
        return math.inf
    return 20 * math.log10(DYNAMIC_RANGE / math.sqrt(err))


def gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    x = np.arange(size) - (size - 1) / 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    return g / g.sum()


def ssim(a, b) -> float:
    """Mean SSIM of the luminances over all fully covered 11x11 windows."""
    a, b = _pair(a, b)
    x, y = luminance(a), luminance(b)
    if min(x.shape) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} pixels on each side")
    g = gaussian_window()
    half = SSIM_WINDOW // 2

    def blur(img):
        out = ndimage.correlate1d(img, g, axis=0, mode="constant")
        out = ndimage.correlate1d(out, g, axis=1, mode="constant")
        return out[half:-half, half:-half]

    c1 = (SSIM_K1 * DYNAMIC_RANGE) ** 2
    c2 = (SSIM_K2 * DYNAMIC_RANGE) ** 2
    mu_x, mu_y = blur(x), blur(y)
    var_x = blur(x * x) - mu_x * mu_x
    var_y = blur(y * y) - mu_y * mu_y
    cov = blur(x * y) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


METRICS = {
    "psnr": psnr,
    "ssim": ssim,
    "rmse": rmse,
}

# no-reference entries, computed on the result image alone
VISUAL_METRICS = ("visual_mean", "visual_std", "visual_product")


def evaluate(result, reference=None, metrics=("psnr", "ssim", "rmse", "visual"), patch=50) -> dict:
    """Compute the requested metrics for one image (pair)."""
    row = {}
    for name in metrics:
        if name == "visual":
            vm = visual_measure(result, patch)
            row["visual_mean"] = vm.mean_of_means
            row["visual_std"] = vm.mean_of_stds
            row["visual_product"] = vm.product
        elif name in METRICS:
            if reference is None:
                raise ValueError(f"metric {name} needs a reference image")
            row[name] = METRICS[name](result, reference)
        else:
            raise ValueError(f"unknown metric: {name}")
    return row


@dataclass
class EvalReport:
    """Per-image metric values and their means."""

    images: dict[str, dict[str, float]] = field(default_factory=dict)

    def add(self, name: str, values: dict[str, float]) -> None:
        self.images[name] = dict(values)

    @property
    def aggregate(self) -> dict[str, float]:
        names = []
        for row in self.images.values():
            names.extend(k for k in row if k not in names)
        return {k: float(np.mean([row[k] for row in self.images.values() if k in row])) for k in names}

    def to_json(self) -> str:
        doc = {"images": self.images, "aggregate": self.aggregate}
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls(images=json.loads(text)["images"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["image", "metric", "value"])
        for name in sorted(self.images):
            for metric in sorted(self.images[name]):
                writer.writerow([name, metric, repr(float(self.images[name][metric]))])
        for metric, value in sorted(self.aggregate.items()):
            writer.writerow(["__mean__", metric, repr(value)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EvalReport":
        report = cls()
        for row in csv.DictReader(io.StringIO(text)):
            if row["image"] == "__mean__":
                continue
            report.images.setdefault(row["image"], {})[row["metric"]] = float(row["value"])
        return report
