"""Quality metrics and the loss stack.

PSNR, SSIM (Wang et al. constants: 11x11 Gaussian window, sigma 1.5,
K1 = 0.01, K2 = 0.03), Canny edge detection, the edge-map SSIM loss
(essim_loss), feature-space structure loss (sp_loss), the combined removal
loss (beta * sp + essim + mse) and the joint removal/detection combination.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .imaging import check_image, luminance, resize_bilinear, v_channel

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

CANNY_SIGMA = 1.4
CANNY_LOW = 0.1
CANNY_HIGH = 0.2


def mse(a, b):
    """Pixelwise mean squared error on [0, 1] data."""
    a = check_image(a, name="a")
    b = check_image(b, name="b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(a, b):
    """10*log10(1 / MSE) in dB on [0, 1] data; +inf when the images are equal."""
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / err)


def _gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords[:, None] ** 2 + coords[None, :] ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def ssim(a, b, window=SSIM_WINDOW, sigma=SSIM_SIGMA, k1=SSIM_K1, k2=SSIM_K2):
    """Mean local SSIM over all positions where the full window fits.

    Color inputs are reduced to the luminance channel first. Raises
    ValueError when the images are smaller than the window.
    """
    a = luminance(check_image(a, name="a"))
    b = luminance(check_image(b, name="b"))
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    h, w = a.shape
    if h < window or w < window:
        raise ValueError(f"images must be at least {window}x{window} for SSIM, got {h}x{w}")

    kern = _gaussian_window(window, sigma)
    pad = window // 2

    def filt(x):
        return ndi.correlate(x, kern, mode="constant")[pad:h - pad, pad:w - pad]

    mu1 = filt(a)
    mu2 = filt(b)
    s11 = filt(a * a) - mu1 * mu1
    s22 = filt(b * b) - mu2 * mu2
    s12 = filt(a * b) - mu1 * mu2

    c1 = k1 ** 2
    c2 = k2 ** 2
    num = (2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)
    den = (mu1 ** 2 + mu2 ** 2 + c1) * (s11 + s22 + c2)
    return float(np.mean(num / den))


def ssim_loss(a, b, **kwargs):
    """1 - ssim(a, b)."""
    return 1.0 - ssim(a, b, **kwargs)


def _nonmax_suppress(mag, gx, gy):
    # quantize the gradient direction into 4 sectors and keep pixels that beat
    # both neighbours along it; the >= / > asymmetry breaks the two-pixel tie a
    # perfectly symmetric step produces, leaving a 1-px line
    h, w = mag.shape
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    sector = np.floor((theta + np.pi / 8) / (np.pi / 4)).astype(np.int64) % 4

    padded = np.pad(mag, 1, mode="constant")
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    fwd = np.zeros_like(mag)
    bwd = np.zeros_like(mag)
    for s, (dy, dx) in offsets.items():
        sel = sector == s
        fwd[sel] = padded[1 + dy:h + 1 + dy, 1 + dx:w + 1 + dx][sel]
        bwd[sel] = padded[1 - dy:h + 1 - dy, 1 - dx:w + 1 - dx][sel]
    return (mag >= fwd) & (mag > bwd)


def canny(plane, low=CANNY_LOW, high=CANNY_HIGH, sigma=CANNY_SIGMA):
    """Canny edges of a [0, 1] plane, returned as a binary uint8 map.

    Gaussian smoothing, Sobel gradients (scaled so magnitude is a per-pixel
    slope on [0, 1] data), directional non-maximum suppression, then
    double-threshold hysteresis with 8-connectivity.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise ValueError(f"canny expects a 2-D plane, got shape {plane.shape}")
    if not 0.0 <= low <= high:
        raise ValueError(f"thresholds must satisfy 0 <= low <= high, got {low}, {high}")

    smoothed = ndi.gaussian_filter(plane, sigma, mode="nearest")
    gx = ndi.sobel(smoothed, axis=1, mode="nearest") / 8.0
    gy = ndi.sobel(smoothed, axis=0, mode="nearest") / 8.0
    mag = np.hypot(gx, gy)

    ridge = _nonmax_suppress(mag, gx, gy) & (mag > 0)
    weak = ridge & (mag >= low)
    strong = ridge & (mag >= high)
    if not strong.any():
        return np.zeros_like(plane, dtype=np.uint8)

    labels, _ = ndi.label(weak, structure=np.ones((3, 3), dtype=np.int64))
    strong_labels = np.unique(labels[strong])
    strong_labels = strong_labels[strong_labels > 0]
    return np.isin(labels, strong_labels).astype(np.uint8)


def edge_detect(img, low=CANNY_LOW, high=CANNY_HIGH, sigma=CANNY_SIGMA):
    """Canny edges of the HSV value channel of a color image."""
    return canny(v_channel(img), low=low, high=high, sigma=sigma)


def essim_loss(pred, gt, low=CANNY_LOW, high=CANNY_HIGH, sigma=CANNY_SIGMA):
    """SSIM loss between the edge maps of pred and gt (edges as {0, 1} planes)."""
    pred = check_image(pred, channels=3, name="pred")
    gt = check_image(gt, channels=3, name="gt")
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    ep = edge_detect(pred, low=low, high=high, sigma=sigma).astype(np.float64)
    eg = edge_detect(gt, low=low, high=high, sigma=sigma).astype(np.float64)
    return ssim_loss(ep, eg)


class PatchGridExtractor:
    """Deterministic desk-scale feature embedding.

    Luminance resized to 32x32, mean-pooled over 4x4 patches to an 8x8 grid,
    concatenated with the grid's horizontal and vertical gradients: D = 192.
    Stands in for a pretrained deep extractor behind the same interface.
    """

    dim = 192

    def embed(self, img):
        lum = luminance(check_image(img))
        grid = resize_bilinear(lum, (32, 32)).reshape(8, 4, 8, 4).mean(axis=(1, 3))
        gy, gx = np.gradient(grid)
        return np.concatenate([grid.ravel(), gx.ravel(), gy.ravel()])


DEFAULT_EXTRACTOR = PatchGridExtractor()


def _embed_fn(extractor):
    if extractor is None:
        extractor = DEFAULT_EXTRACTOR
    return extractor.embed if hasattr(extractor, "embed") else extractor


def sp_loss(pred, gt, extractor=None):
    """Mean squared distance between feature embeddings of pred and gt."""
    embed = _embed_fn(extractor)
    e1 = np.asarray(embed(pred), dtype=np.float64)
    e2 = np.asarray(embed(gt), dtype=np.float64)
    if e1.shape != e2.shape:
        raise ValueError(f"embedding dimension mismatch: {e1.shape} vs {e2.shape}")
    return float(np.mean((e1 - e2) ** 2))


@dataclass(frozen=True)
class LossWeights:
    """alpha: pretask (detection) weight in [0, 1]; beta: structure-loss weight."""

    alpha: float = 1e-2
    beta: float = 1e6

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")


def removal_loss(pred, gt, weights=LossWeights(), extractor=None):
    """beta * sp_loss + essim_loss + mse."""
    return (weights.beta * sp_loss(pred, gt, extractor=extractor)
            + essim_loss(pred, gt)
            + mse(pred, gt))


def joint_loss(l_removal, l_detection, alpha):
    """(1 - alpha) * removal + alpha * detection."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    return (1.0 - alpha) * l_removal + alpha * l_detection


def detection_loss(pred_mask, gt_mask, eps=1e-7):
    """Mean binary cross-entropy of a [0, 1] probability map against a binary mask."""
    pred = np.asarray(pred_mask, dtype=np.float64)
    gt = (np.asarray(gt_mask) > 0).astype(np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    p = np.clip(pred, eps, 1.0 - eps)
    return float(np.mean(-(gt * np.log(p) + (1.0 - gt) * np.log(1.0 - p))))
