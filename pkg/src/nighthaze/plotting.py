"""Report figures written next to the CSV/JSON outputs.

Everything renders off-screen with the Agg backend and returns the path
of the saved file.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .synth import apply_poly  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "savefig.bbox": "tight",
}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_bench(rows, path):
    """Median runtime against pixel count, with a linear reference line.

    ``rows`` are dicts with ``width``, ``height`` and ``median_ms``.
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        px = np.array([r["width"] * r["height"] for r in rows], dtype=float)
        ms = np.array([r["median_ms"] for r in rows], dtype=float)
        order = np.argsort(px)
        px, ms = px[order], ms[order]
        ax.plot(px / 1e6, ms / 1e3, "o-", label="measured")
        if len(px) > 1:
            slope = np.dot(px, ms) / np.dot(px, px)
            ax.plot(px / 1e6, slope * px / 1e3, "--", color="0.5", label="linear fit")
        for p, m, r in zip(px, ms, [rows[i] for i in order]):
            ax.annotate(f"{r['width']}x{r['height']}", (p / 1e6, m / 1e3), fontsize=6,
                        xytext=(3, -8), textcoords="offset points")
        ax.set_xlabel("image size (megapixels)")
        ax.set_ylabel("time (s)")
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_visual_measures(report, path):
    """Scatter of mean tile std against mean tile intensity, one point per image.

    The shaded box marks the 'visually good' region.
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.2, 3.4))
        ax.add_patch(plt.Rectangle((40, 100), 40, 100, color="0.9", zorder=0, label="visually good"))
        for name, row in sorted(report.images.items()):
            if "visual_mean" not in row:
                continue
            ax.plot(row["visual_std"], row["visual_mean"], "o", ms=4)
            ax.annotate(name, (row["visual_std"], row["visual_mean"]), fontsize=6,
                        xytext=(3, 3), textcoords="offset points")
        ax.set_xlim(0, 100)
        ax.set_ylim(0, 255)
        ax.set_xlabel("mean tile std")
        ax.set_ylabel("mean tile intensity")
        ax.legend(frameon=False, loc="lower right")
        return _save(fig, path)


def plot_metric_bars(report, path, metric="psnr"):
    names = sorted(n for n, row in report.images.items() if metric in row)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(3.0, 0.5 * len(names) + 1.5), 3.0))
        values = [report.images[n][metric] for n in names]
        finite = [v if np.isfinite(v) else np.nan for v in values]
        ax.bar(range(len(names)), finite, color="C0")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=45, ha="right")
        ax.set_ylabel(metric)
        return _save(fig, path)


def plot_scene(scene, path):
    """Panel of a synthetic scene: disparity, illumination, sigma, B and I."""
    panels = [
        ("disparity", scene.disparity, "gray"),
        ("illumination", scene.illumination, "gray"),
        ("sigma", np.clip(scene.sigma_true, 0, 1), None),
        ("environmental light", np.clip(scene.env_light, 0, 1), None),
        ("clear", scene.reflectance, None),
        ("hazy", np.clip(scene.hazy, 0, 1), None),
    ]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 3, figsize=(8, 4.6))
        for ax, (title, img, cmap) in zip(axes.ravel(), panels):
            ax.imshow(img, cmap=cmap, vmin=0, vmax=1)
            ax.set_title(title)
            ax.axis("off")
        return _save(fig, path)


def plot_illumination_curves(hazy_L, clear_L, coeffs, gamma, path, max_points=20000):
    """Hazy vs clear illumination cloud with the fitted polynomial and the gamma curve."""
    x = np.asarray(hazy_L).ravel()
    y = np.asarray(clear_L).ravel()
    if x.size > max_points:
        pick = np.random.default_rng(0).choice(x.size, max_points, replace=False)
        x, y = x[pick], y[pick]
    grid = np.linspace(0, 1, 200)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 3.4))
        ax.plot(x, y, ",", color="0.6", alpha=0.5)
        ax.plot(grid, apply_poly(grid, coeffs), label=f"polynomial (deg {len(coeffs) - 1})")
        ax.plot(grid, grid**gamma, "--", label=f"gamma {gamma:.3g}")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1.02)
        ax.set_xlabel("hazy illumination")
        ax.set_ylabel("clear illumination")
        ax.legend(frameon=False, loc="lower right")
        return _save(fig, path)
