"""Shared synthetic-data builders for the test suite.

Everything is seeded and pure numpy/PIL so tests are reproducible; no test
touches real photographs.
"""

import numpy as np
import pytest
import scipy.ndimage as ndi
from PIL import Image, ImageDraw

from shadowkit import io
from shadowkit.manifest import DatasetManifest, ManifestEntry


def textured_image(height, width, rng, blobs=30, smooth=1.0, sharp=0):
    """Smooth random elliptical blobs over low-amplitude noise: enough corner
    structure for feature detection, no aliasing under mild warps.

    sharp > 0 stamps that many small hard-edged rectangles on top after
    smoothing. Their corners survive contrast compression, so scenes that
    also contain a deep shadow step still yield plenty of detections."""
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
        color = (rng.random(3) > 0.5).astype(np.float64)  # saturated corners
        img[cy:cy + sy, cx:cx + sx] *= 0.25
        img[cy:cy + sy, cx:cx + sx] += 0.75 * color
    return np.clip(img, 0.0, 1.0)


def polygon_mask(height, width, vertices):
    """Filled-polygon binary mask from (x, y) vertices via PIL rasterization."""
    canvas = Image.new("L", (width, height), 0)
    ImageDraw.Draw(canvas).polygon([(float(x), float(y)) for x, y in vertices],
                                   fill=255)
    return (np.asarray(canvas) > 0).astype(np.uint8)


def random_polygon(rng, height, width, n_vertices=6):
    """Star-convex polygon around a random interior center, big enough to
    dominate the histogram's shadow mode."""
    cy = rng.uniform(0.3, 0.7) * height
    cx = rng.uniform(0.3, 0.7) * width
    angles = np.sort(rng.uniform(0, 2 * np.pi, n_vertices))
    radius = rng.uniform(0.18, 0.32, n_vertices) * min(height, width)
    xs = np.clip(cx + radius * np.cos(angles), 0, width - 1)
    ys = np.clip(cy + radius * np.sin(angles), 0, height - 1)
    return list(zip(xs, ys))


def shadow_scene(seed, height=96, width=128, delta=None, noise_sigma=0.02,
                 delta_range=(0.2, 0.5), penumbra=0.0, floor=0.62, gain=0.33,
                 blobs=30, sharp=60):
    """One synthetic annotation scene.

    The ground truth is a textured image with values comfortably above the
    attenuation depth; the input is the same image with all channels lowered
    by delta inside a random polygon (so the HSV value drops by exactly
    delta) plus per-pixel scalar noise shared across channels (so the value
    noise is exactly that Gaussian). The polygon covers 12-30% of the image:
    much smaller and the shadow mode would drown in the noise tail, which is
    the regime where the workflow hands thresholds to the human annotator
    anyway. penumbra > 0 feathers the shadow edge by that gaussian sigma in
    the composed input; the returned truth mask stays binary. floor and gain
    squeeze the base texture into [floor, floor + gain]; defaults leave room
    for the deepest default delta. Returns (input, gt, true_mask, delta).
    """
    rng = np.random.default_rng(seed)
    base = textured_image(height, width, rng, blobs=blobs, sharp=sharp)
    base = floor + base * gain  # keep base - delta - noise away from 0
    if delta is None:
        delta = float(rng.uniform(*delta_range))
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


def checkerboard(height, width, cell):
    yy, xx = np.mgrid[:height, :width]
    return (((yy // cell) + (xx // cell)) % 2).astype(np.float64)


def project(h_matrix, pts):
    """Apply a homography to (N, 2) points."""
    pts = np.asarray(pts, dtype=np.float64)
    hom = np.column_stack([pts, np.ones(len(pts))]) @ np.asarray(h_matrix).T
    return hom[:, :2] / hom[:, 2:3]


def random_homography(rng, size=200.0, corner_jitter=0.08, max_condition=100.0):
    """Random projective map built by perturbing the corners of a square;
    rejection-sampled to keep the matrix condition number below the cap."""
    from shadowkit.homography import estimate_dlt, pairs_from_points

    src = np.array([[0.0, 0.0], [size, 0.0], [size, size], [0.0, size]])
    while True:
        dst = src + rng.uniform(-corner_jitter, corner_jitter, src.shape) * size
        dst += rng.uniform(-0.05, 0.05, 2) * size
        h = estimate_dlt(pairs_from_points(src, dst))
        if np.linalg.cond(h) < max_condition:
            return h


def write_dataset(root, n_pairs, seed=0, misalign=True, photo=True,
                  height=None, width=None):
    """Disk dataset of shadow scenes with optionally misaligned ground truths.

    photo=True composes scenes for the alignment problem: full-contrast base
    texture dense with crisp corners, shallow shadows with a feathered edge.
    A hard-edged deep shadow would dwarf every texture corner under the
    detector's relative response threshold, which is a property of flat
    synthetic compositing, not of photographs. photo=False keeps the
    deep-shadow annotation regime of shadow_scene's defaults, where threshold
    proposals recover the truth mask cleanly as long as the ground truth
    needs no resampling (interpolation smear at crisp edges otherwise rivals
    the histogram's shadow mode).

    Writes input/<id>.png, gt/<id>.png and manifest.json under root; returns
    (manifest, truths) where truths maps id -> dict(true_mask, h_misalign).
    """
    from shadowkit.imaging import warp

    if height is None or width is None:
        height, width = (120, 160) if photo else (96, 128)
    scene_params = (dict(delta_range=(0.2, 0.3), penumbra=1.2, floor=0.40,
                         gain=0.55, blobs=40, sharp=140) if photo else {})
    root.mkdir(parents=True, exist_ok=True)
    (root / "input").mkdir(exist_ok=True)
    (root / "gt").mkdir(exist_ok=True)
    entries = []
    truths = {}
    for i in range(n_pairs):
        image_id = f"scene{i:03d}"
        shadowed, gt, mask, delta = shadow_scene(
            seed * 1000 + i, height=height, width=width, **scene_params)
        h0 = np.eye(3)
        gt_disk = gt
        if misalign:
            rng = np.random.default_rng(seed * 1000 + i + 5)
            h0 = np.array([
                [1 + rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02),
                 rng.uniform(-4, 4)],
                [rng.uniform(-0.02, 0.02), 1 + rng.uniform(-0.02, 0.02),
                 rng.uniform(-4, 4)],
                [rng.uniform(-2e-5, 2e-5), rng.uniform(-2e-5, 2e-5), 1.0],
            ])
            gt_disk = warp(gt, np.linalg.inv(h0))
        input_path = io.save_png(root / "input" / f"{image_id}.png", shadowed)
        gt_path = io.save_png(root / "gt" / f"{image_id}.png", gt_disk)
        entries.append(ManifestEntry(id=image_id, input_path=input_path,
                                     gt_path=gt_path))
        truths[image_id] = {"true_mask": mask, "h_misalign": h0,
                            "delta": delta}
    manifest = DatasetManifest(entries=entries, root=root)
    manifest.save(root / "manifest.json")
    return manifest, truths


def mask_iou(a, b):
    a = np.asarray(a) > 0
    b = np.asarray(b) > 0
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
