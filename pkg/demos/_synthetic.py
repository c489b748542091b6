"""Synthetic scene builders shared by the demo scripts.

Everything is seeded pure numpy/PIL, so every demo prints the same numbers on
every run. The scenes mimic the two regimes the toolkit cares about: textured
images with enough corners to align, and shadowed pairs whose HSV value
difference carries a clean histogram mode.
"""

import numpy as np
import scipy.ndimage as ndi
from PIL import Image, ImageDraw


def textured_image(height, width, rng, blobs=30, smooth=1.0, sharp=0):
    """Smooth random elliptical blobs over low-amplitude noise; sharp > 0
    stamps that many small saturated rectangles whose corners survive any
    contrast compression."""
    img = rng.random((height, width, 3)) * 0.1 + 0.4
    for _ in range(blobs):
        cy, cx = rng.integers(0, height), rng.integers(0, width)
        ry, rx = rng.integers(5, max(6, min(height, width) // 8), size=2)
        color = rng.random(3)
        yy, xx = np.ogrid[:height, :width]
        blob = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
        img[blob] = 0.7 * color + 0.3 * img[blob]
    img = ndi.gaussian_filter(img, sigma=(smooth, smooth, 0))
    for _ in range(sharp):
        cy = int(rng.integers(0, max(1, height - 4)))
        cx = int(rng.integers(0, max(1, width - 4)))
        sy, sx = rng.integers(2, 5, size=2)
        color = (rng.random(3) > 0.5).astype(np.float64)
        img[cy:cy + sy, cx:cx + sx] *= 0.25
        img[cy:cy + sy, cx:cx + sx] += 0.75 * color
    return np.clip(img, 0.0, 1.0)


def polygon_mask(height, width, vertices):
    canvas = Image.new("L", (width, height), 0)
    ImageDraw.Draw(canvas).polygon([(float(x), float(y)) for x, y in vertices],
                                   fill=255)
    return (np.asarray(canvas) > 0).astype(np.uint8)


def random_polygon(rng, height, width, n_vertices=6):
    cy = rng.uniform(0.3, 0.7) * height
    cx = rng.uniform(0.3, 0.7) * width
    angles = np.sort(rng.uniform(0, 2 * np.pi, n_vertices))
    radius = rng.uniform(0.18, 0.32, n_vertices) * min(height, width)
    xs = np.clip(cx + radius * np.cos(angles), 0, width - 1)
    ys = np.clip(cy + radius * np.sin(angles), 0, height - 1)
    return list(zip(xs, ys))


def shadow_scene(seed, height=96, width=128, delta=None, noise_sigma=0.02,
                 penumbra=0.0, floor=0.62, gain=0.33, blobs=30, sharp=60):
    """Textured ground truth plus the same image darkened by delta inside a
    random polygon (12-30% of the frame) with shared-across-channels noise.
    Returns (shadowed_input, gt, true_mask, delta)."""
    rng = np.random.default_rng(seed)
    base = floor + textured_image(height, width, rng,
                                  blobs=blobs, sharp=sharp) * gain
    if delta is None:
        delta = float(rng.uniform(0.2, 0.5))
    while True:
        mask = polygon_mask(height, width, random_polygon(rng, height, width))
        if 0.12 <= mask.mean() <= 0.30:
            break
    attenuation = mask.astype(np.float64)
    if penumbra > 0:
        attenuation = ndi.gaussian_filter(attenuation, penumbra)
    noise = rng.normal(0.0, noise_sigma, size=(height, width))
    shadowed = base - delta * attenuation[..., None] + noise[..., None]
    return np.clip(shadowed, 0.0, 1.0), base, mask, delta


def mask_iou(a, b):
    a = np.asarray(a) > 0
    b = np.asarray(b) > 0
    union = np.logical_or(a, b).sum()
    return 1.0 if union == 0 else float(np.logical_and(a, b).sum() / union)
