"""Regenerate the bundled low-light hazy test images in tests/data/lowlight.

Each image is a public-domain / CC0 photograph from scikit-image rendered
through the synthetic nighttime haze model with a ramp disparity, a colored
light source and a reduced exposure. Run from the repository root:

    python scripts/make_lowlight_images.py
"""

from pathlib import Path

import numpy as np
import skimage.data
from skimage.transform import resize

from nighthaze import imageio
from nighthaze.config import SynthConfig
from nighthaze.synth import generate

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "lowlight"
MAX_SIDE = 320

# name, light color, exposure, disparity direction
SOURCES = [
    ("astronaut", (1.0, 0.85, 0.45), 0.55, "vertical"),
    ("coffee", (1.0, 0.75, 0.35), 0.50, "horizontal"),
    ("chelsea", (1.0, 1.0, 0.3), 0.45, "vertical"),
    ("rocket", (0.6, 0.8, 1.0), 0.60, "radial"),
    ("immunohistochemistry", (1.0, 0.7, 0.5), 0.50, "horizontal"),
]


def ramp(h, w, kind):
    yy, xx = np.mgrid[0:h, 0:w]
    if kind == "vertical":
        d = yy / (h - 1)
    elif kind == "horizontal":
        d = xx / (w - 1)
    else:
        d = 1 - np.hypot(yy / h - 0.5, xx / w - 0.5) / np.hypot(0.5, 0.5)
    return 0.2 + 0.8 * d


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, light, exposure, kind in SOURCES:
        img = getattr(skimage.data, name)()[..., :3] / 255.0
        scale = MAX_SIDE / max(img.shape[:2])
        if scale < 1:
            shape = (round(img.shape[0] * scale), round(img.shape[1] * scale), 3)
            img = resize(img, shape, anti_aliasing=True)
        h, w = img.shape[:2]
        scene = generate(img, ramp(h, w, kind), SynthConfig(light_color=light))
        path = imageio.write_image(OUT / f"{name}.png", scene.hazy * exposure)
        print(path)


if __name__ == "__main__":
    main()
