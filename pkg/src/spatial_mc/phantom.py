"""Synthetic tumour/oedema test images with known ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

REFERENCE_SCRIPT = """\
# tumour/oedema segmentation: thresholds, proximity, texture growth
load img = image "{image}"
let tumorSeed  = intensity > 165
let oedemaSeed = intensity > 95 & intensity <= 165 & D[z <= {proximity}](tumorSeed)
let tumor  = SCMP(0.7, 2, 16, 0, 255, intensity, tumorSeed) | tumorSeed
let oedema = (SCMP(0.7, 2, 16, 0, 255, intensity, oedemaSeed) | oedemaSeed) & !tumor
save overlay "{overlay}" base=intensity oedema:#FFFF00 tumor:#FFA500
save mask "{tumor_mask}" tumor
save mask "{oedema_mask}" oedema
print stats tumor
print stats oedema
"""


@dataclass
class Phantom:
    image: np.ndarray  # uint8, indexed [x, y]
    tumor: np.ndarray
    oedema: np.ndarray

    def save(self, path):
        Image.fromarray(np.ascontiguousarray(self.image.T)).save(path, format="PNG")


def gbm_phantom(size: int = 256, tumor_radius: float = 30.0, oedema_radius: float = 60.0,
                means=(60.0, 130.0, 200.0), sigma: float = 15.0, seed: int = 0) -> Phantom:
    """Bright noisy disk inside a mid-grey noisy annulus on a dark background.

    ``means`` are (background, oedema, tumour) intensities; every pixel gets
    independent Gaussian noise of standard deviation ``sigma``.
    """
    rng = np.random.default_rng(seed)
    c = (size - 1) / 2.0
    x, y = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    r = np.hypot(x - c, y - c)
    tumor = r <= tumor_radius
    oedema = (r <= oedema_radius) & ~tumor
    mean = np.where(tumor, means[2], np.where(oedema, means[1], means[0]))
    values = mean + rng.normal(0.0, sigma, size=(size, size))
    image = np.clip(np.rint(values), 0, 255).astype(np.uint8)
    return Phantom(image, tumor, oedema)


def dice(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    total = a.sum() + b.sum()
    return 1.0 if total == 0 else 2.0 * float((a & b).sum()) / float(total)


def reference_script(image="phantom.png", overlay="overlay.png", tumor_mask="tumor.png",
                     oedema_mask="oedema.png", proximity: float = 35) -> str:
    """The segmentation script with thresholds calibrated for :func:`gbm_phantom` defaults.

    Intensity cut-offs sit halfway between neighbouring region means; the
    proximity bound exceeds the annulus width.
    """
    return REFERENCE_SCRIPT.format(image=image, overlay=overlay, tumor_mask=tumor_mask,
                                   oedema_mask=oedema_mask, proximity=proximity)
