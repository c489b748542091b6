"""Core image representation and geometry.

Images are numpy float arrays with values in [0, 1]: shape (H, W) for a
single plane, (H, W, 3) for color. The continuous coordinate convention used
everywhere in this package: the center of pixel (row i, col j) sits at
(x, y) = (j + 0.5, i + 0.5), so an image spans [0, W] x [0, H].
"""

import numpy as np

from .errors import EstimationError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def check_image(img, channels=None, name="image"):
    """Validate an image array; returns it as float64."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        ch = 1
    elif img.ndim == 3 and img.shape[2] in (1, 3):
        ch = img.shape[2]
    else:
        raise ValueError(f"{name}: expected (H, W) or (H, W, 3) array, got shape {img.shape}")
    if channels is not None and ch != channels:
        raise ValueError(f"{name}: expected {channels} channel(s), got {ch}")
    return img


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def rgb_to_hsv(img):
    """RGB -> HSV per the hexcone model, all channels in [0, 1].

    H is the hue angle scaled to [0, 1); S is chroma/max; V = max(R, G, B).
    Gray pixels (zero chroma) get H = 0, black pixels also S = 0.
    """
    img = check_image(img, channels=3)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    maxc = img.max(axis=-1)
    minc = img.min(axis=-1)
    v = maxc
    c = maxc - minc
    chromatic = c > 0
    c_safe = np.where(chromatic, c, 1.0)
    s = np.where(maxc > 0, c / np.where(maxc > 0, maxc, 1.0), 0.0)
    rc = (maxc - r) / c_safe
    gc = (maxc - g) / c_safe
    bc = (maxc - b) / c_safe
    # same branch order as colorsys: r first, then g, else b
    h = np.select([r == maxc, g == maxc], [bc - gc, 2.0 + rc - bc], default=4.0 + gc - rc)
    h = np.where(chromatic, (h / 6.0) % 1.0, 0.0)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(img):
    """Inverse of :func:`rgb_to_hsv` (hexcone model, H in [0, 1])."""
    img = check_image(img, channels=3)
    h, s, v = img[..., 0], img[..., 1], img[..., 2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(np.int64) % 6
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def v_channel(img):
    """V channel of HSV: the per-pixel max over R, G, B."""
    img = check_image(img, channels=3)
    return img.max(axis=-1)


def luminance(img):
    """Rec.601 luma (0.299 R + 0.587 G + 0.114 B); grayscale passes through."""
    img = check_image(img)
    if img.ndim == 2:
        return img
    if img.shape[2] == 1:
        return img[..., 0]
    wr, wg, wb = LUMA_WEIGHTS
    return wr * img[..., 0] + wg * img[..., 1] + wb * img[..., 2]


def _reflect_positions(pos, n):
    # reflect-101: mirror about the first/last pixel centers without repeating
    # them, so folded positions land in [0, n-1] and no out-of-raster read occurs
    if n == 1:
        return np.zeros_like(pos)
    period = 2.0 * (n - 1)
    pos = np.mod(pos, period)
    return np.where(pos > n - 1, period - pos, pos)


def _bilinear_sample(img, ay, ax, padding):
    """Sample img at array positions (ay rows, ax cols) with bilinear weights."""
    h, w = img.shape[:2]
    if padding == "reflect":
        ax = _reflect_positions(ax, w)
        ay = _reflect_positions(ay, h)
    x0 = np.floor(ax).astype(np.int64)
    y0 = np.floor(ay).astype(np.int64)
    fx = ax - x0
    fy = ay - y0
    x1 = x0 + 1
    y1 = y0 + 1

    if padding == "reflect":
        x0 = np.clip(x0, 0, w - 1)
        x1 = np.clip(x1, 0, w - 1)
        y0 = np.clip(y0, 0, h - 1)
        y1 = np.clip(y1, 0, h - 1)
        w00 = (1 - fx) * (1 - fy)
        w10 = fx * (1 - fy)
        w01 = (1 - fx) * fy
        w11 = fx * fy
    elif padding == "zero":
        vx0 = (x0 >= 0) & (x0 < w)
        vx1 = (x1 >= 0) & (x1 < w)
        vy0 = (y0 >= 0) & (y0 < h)
        vy1 = (y1 >= 0) & (y1 < h)
        w00 = (1 - fx) * (1 - fy) * (vx0 & vy0)
        w10 = fx * (1 - fy) * (vx1 & vy0)
        w01 = (1 - fx) * fy * (vx0 & vy1)
        w11 = fx * fy * (vx1 & vy1)
        x0 = np.clip(x0, 0, w - 1)
        x1 = np.clip(x1, 0, w - 1)
        y0 = np.clip(y0, 0, h - 1)
        y1 = np.clip(y1, 0, h - 1)
    else:
        raise ValueError(f"unknown padding mode {padding!r} (use 'reflect' or 'zero')")

    if img.ndim == 3:
        w00 = w00[..., None]
        w10 = w10[..., None]
        w01 = w01[..., None]
        w11 = w11[..., None]
    return (w00 * img[y0, x0] + w10 * img[y0, x1]
            + w01 * img[y1, x0] + w11 * img[y1, x1])


def warp(img, h, out_size=None, padding="reflect"):
    """Warp img by the homography h (source coords -> output coords).

    Each output pixel is bilinearly sampled from img at the h^-1-mapped
    location, in the pixel-center-at-half-integer coordinate convention.
    out_size is (height, width); defaults to the input size. Out-of-bounds
    source positions are resolved by `padding`: "reflect" (mirror without
    repeating the edge pixel) or "zero".
    """
    img = check_image(img)
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (3, 3):
        raise ValueError(f"homography must be 3x3, got {h.shape}")
    try:
        hinv = np.linalg.inv(h)
    except np.linalg.LinAlgError as exc:
        raise EstimationError("homography is singular") from exc
    if not np.all(np.isfinite(hinv)):
        raise EstimationError("homography is singular or non-finite")

    out_h, out_w = out_size if out_size is not None else img.shape[:2]
    jj, ii = np.meshgrid(np.arange(out_w), np.arange(out_h))
    x = jj + 0.5
    y = ii + 0.5
    denom = hinv[2, 0] * x + hinv[2, 1] * y + hinv[2, 2]
    valid = np.abs(denom) > 1e-12
    denom = np.where(valid, denom, 1.0)
    sx = (hinv[0, 0] * x + hinv[0, 1] * y + hinv[0, 2]) / denom
    sy = (hinv[1, 0] * x + hinv[1, 1] * y + hinv[1, 2]) / denom

    out = _bilinear_sample(img, sy - 0.5, sx - 0.5, padding)
    if not valid.all():
        out[~valid] = 0.0
    return out


def resize_bilinear(img, out_size):
    """Bilinear resize to out_size = (height, width)."""
    img = check_image(img)
    out_h, out_w = out_size
    h, w = img.shape[:2]
    scale = np.array([[out_w / w, 0.0, 0.0],
                      [0.0, out_h / h, 0.0],
                      [0.0, 0.0, 1.0]])
    return warp(img, scale, out_size=(out_h, out_w), padding="reflect")


def rotate90(img, k=1):
    """Rotate by k*90 degrees counterclockwise (exact pixel permutation)."""
    img = check_image(img)
    return np.rot90(img, k=k, axes=(0, 1)).copy()


def flip_vertical(img):
    """Mirror top-to-bottom (exact pixel permutation)."""
    img = check_image(img)
    return img[::-1].copy()


def mixup(a, b, lam):
    """Elementwise blend lam*a + (1-lam)*b; a and b must share dimensions."""
    a = check_image(a, name="a")
    b = check_image(b, name="b")
    _check_same_shape(a, b)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"mixup weight must be in [0, 1], got {lam}")
    return lam * a + (1.0 - lam) * b
