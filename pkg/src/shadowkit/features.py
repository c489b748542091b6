"""Multi-scale corner detection, binary description and descriptor matching.

The detector is a pyramid Harris corner detector with quadratic subpixel
refinement; descriptors are 256-bit binary strings of pairwise intensity
comparisons (offset-invariant by construction). Everything is deterministic:
the comparison pattern is a frozen seeded draw, and keypoints are totally
ordered by (response desc, y, x) so results do not depend on scheduling.
"""

import json
from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .imaging import check_image, luminance

HARRIS_K = 0.05
HARRIS_REL_THRESHOLD = 0.01
MIN_KEYPOINT_DISTANCE = 2.0
DESC_PATCH_RADIUS = 15
DESC_MARGIN = DESC_PATCH_RADIUS + 2
BRIEF_SMOOTH_SIGMA = 2.0
DEFAULT_RATIO = 0.8

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


def _brief_pattern(n_bits=256, radius=DESC_PATCH_RADIUS, seed=20230423):
    rng = np.random.default_rng(seed)
    pts = rng.normal(0.0, radius / 2.5, size=(n_bits, 4))
    pts = np.clip(np.rint(pts), -radius, radius).astype(np.int64)
    same = (pts[:, 0] == pts[:, 2]) & (pts[:, 1] == pts[:, 3])
    pts[same, 3] = np.where(pts[same, 3] < radius, pts[same, 3] + 1, pts[same, 3] - 1)
    return pts  # columns: dy1, dx1, dy2, dx2


_PATTERN = _brief_pattern()


@dataclass(frozen=True)
class Keypoint:
    """Detected corner: (x, y) are pixel-center coordinates in the base image,
    scale is the pyramid octave index, response the corner strength."""

    x: float
    y: float
    scale: int
    response: float

    def to_json(self):
        return json.dumps({"x": round(self.x, 4), "y": round(self.y, 4),
                           "scale": self.scale, "response": round(self.response, 8)})


@dataclass(frozen=True)
class MatchPair:
    """Correspondence between image A and image B with the descriptor Hamming distance."""

    src: tuple
    dst: tuple
    distance: int = 0

    def to_json(self):
        return json.dumps({"src": [round(v, 4) for v in self.src],
                           "dst": [round(v, 4) for v in self.dst],
                           "distance": int(self.distance)})


def _build_pyramid(lum, octaves):
    levels = [ndi.gaussian_filter(lum, 1.0, mode="nearest")]
    for _ in range(1, octaves):
        prev = levels[-1]
        if min(prev.shape) < 2 * DESC_MARGIN + 4:
            break
        levels.append(ndi.gaussian_filter(prev, 1.0, mode="nearest")[::2, ::2])
    return levels


def _harris_response(level):
    gx = ndi.sobel(level, axis=1, mode="nearest") / 8.0
    gy = ndi.sobel(level, axis=0, mode="nearest") / 8.0
    sxx = ndi.gaussian_filter(gx * gx, 1.5, mode="nearest")
    syy = ndi.gaussian_filter(gy * gy, 1.5, mode="nearest")
    sxy = ndi.gaussian_filter(gx * gy, 1.5, mode="nearest")
    return sxx * syy - sxy * sxy - HARRIS_K * (sxx + syy) ** 2


def _subpixel_offset(resp, ys, xs, axis):
    if axis == 0:
        prev, nxt = resp[ys - 1, xs], resp[ys + 1, xs]
    else:
        prev, nxt = resp[ys, xs - 1], resp[ys, xs + 1]
    center = resp[ys, xs]
    denom = prev - 2.0 * center + nxt
    usable = np.abs(denom) > 1e-12
    off = np.where(usable, 0.5 * (prev - nxt) / np.where(usable, denom, 1.0), 0.0)
    return np.clip(off, -0.5, 0.5)


def detect(img, max_keypoints=500, octaves=4):
    """Strongest corners of an image, at most max_keypoints of them.

    Works on the luminance of a gray or color image, across `octaves` pyramid
    levels, with 3x3 non-maximum suppression per octave. Returns keypoints
    sorted by descending response (ties broken on (y, x)); a featureless image
    yields an empty list.
    """
    lum = luminance(check_image(img))
    out = []
    for octave, level in enumerate(_build_pyramid(lum, octaves)):
        resp = _harris_response(level)
        floor = max(1e-10, HARRIS_REL_THRESHOLD * float(resp.max(initial=0.0)))
        peaks = (resp == ndi.maximum_filter(resp, size=3, mode="constant")) & (resp > floor)
        m = DESC_MARGIN
        peaks[:m] = peaks[-m:] = False
        peaks[:, :m] = peaks[:, -m:] = False
        ys, xs = np.nonzero(peaks)
        if ys.size == 0:
            continue
        dx = _subpixel_offset(resp, ys, xs, axis=1)
        dy = _subpixel_offset(resp, ys, xs, axis=0)
        s = float(2 ** octave)
        half = (s - 1.0) / 2.0
        for yi, xi, oy, ox in zip(ys, xs, dy, dx):
            out.append(Keypoint(x=s * (xi + ox + 0.5) - half,
                                y=s * (yi + oy + 0.5) - half,
                                scale=octave,
                                response=float(resp[yi, xi])))
    out.sort(key=lambda k: (-k.response, k.y, k.x))
    return _dedupe(out, MIN_KEYPOINT_DISTANCE)[:max_keypoints]


def _dedupe(keypoints, radius):
    """Greedy suppression of weaker keypoints within radius of a kept one.

    Response ties at symmetric corners (a junction centered between pixels
    produces a 2x2 block of equal responses) and cross-octave repeats collapse
    to a single keypoint this way.
    """
    kept = []
    xs = np.empty(len(keypoints))
    ys = np.empty(len(keypoints))
    r2 = radius * radius
    for kp in keypoints:
        n = len(kept)
        if n:
            d2 = (xs[:n] - kp.x) ** 2 + (ys[:n] - kp.y) ** 2
            if d2.min() < r2:
                continue
        xs[n] = kp.x
        ys[n] = kp.y
        kept.append(kp)
    return kept


def describe(img, keypoints, octaves=None):
    """256-bit binary descriptors for keypoints detected on the same image.

    Returns (descriptors, kept) where descriptors is a (M, 32) uint8 array and
    kept lists the indices of the keypoints that were describable; keypoints
    whose comparison patch leaves the image are skipped.
    """
    lum = luminance(check_image(img))
    if not keypoints:
        return np.zeros((0, 32), dtype=np.uint8), []
    if octaves is None:
        octaves = max(k.scale for k in keypoints) + 1
    levels = [ndi.gaussian_filter(lv, BRIEF_SMOOTH_SIGMA, mode="nearest")
              for lv in _build_pyramid(lum, octaves)]

    descs = np.zeros((len(keypoints), 32), dtype=np.uint8)
    kept = []
    by_octave = {}
    for i, kp in enumerate(keypoints):
        by_octave.setdefault(kp.scale, []).append(i)

    dy1, dx1, dy2, dx2 = _PATTERN[:, 0], _PATTERN[:, 1], _PATTERN[:, 2], _PATTERN[:, 3]
    r = DESC_PATCH_RADIUS
    for octave, idxs in sorted(by_octave.items()):
        if octave >= len(levels):
            continue
        level = levels[octave]
        h, w = level.shape
        s = float(2 ** octave)
        half = (s - 1.0) / 2.0
        idxs = np.asarray(idxs)
        cols = np.rint(np.array([(keypoints[i].x + half) / s - 0.5 for i in idxs])).astype(np.int64)
        rows = np.rint(np.array([(keypoints[i].y + half) / s - 0.5 for i in idxs])).astype(np.int64)
        ok = (rows >= r) & (rows < h - r) & (cols >= r) & (cols < w - r)
        idxs, rows, cols = idxs[ok], rows[ok], cols[ok]
        if idxs.size == 0:
            continue
        p1 = level[rows[:, None] + dy1[None, :], cols[:, None] + dx1[None, :]]
        p2 = level[rows[:, None] + dy2[None, :], cols[:, None] + dx2[None, :]]
        descs[idxs] = np.packbits(p1 < p2, axis=1)
        kept.extend(int(i) for i in idxs)

    kept = sorted(kept)
    return descs[kept], kept


def hamming_distances(a, b):
    """(len(a), len(b)) matrix of Hamming distances between packed descriptors."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.uint16)
    step = max(1, 2 ** 22 // max(1, b.shape[0] * 32))
    for lo in range(0, a.shape[0], step):
        chunk = a[lo:lo + step]
        out[lo:lo + step] = _POPCOUNT[np.bitwise_xor(chunk[:, None, :], b[None, :, :])].sum(
            axis=2, dtype=np.uint16)
    return out


def match_indices(desc_a, desc_b, ratio=DEFAULT_RATIO):
    """Lowe-ratio + mutual-cross-check matching on packed descriptors.

    Returns an (M, 3) int array of (index_a, index_b, hamming_distance). For
    each row of desc_a the nearest neighbour in desc_b is kept iff
    best < ratio * second_best and the pairing is mutual. Empty inputs give an
    empty result.
    """
    desc_a = np.asarray(desc_a, dtype=np.uint8)
    desc_b = np.asarray(desc_b, dtype=np.uint8)
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    if desc_a.shape[0] == 0 or desc_b.shape[0] == 0:
        return np.zeros((0, 3), dtype=np.int64)

    d = hamming_distances(desc_a, desc_b)
    best_b = np.argmin(d, axis=1)
    d1 = d[np.arange(d.shape[0]), best_b].astype(np.float64)
    if d.shape[1] >= 2:
        d2 = np.partition(d, 1, axis=1)[:, 1].astype(np.float64)
    else:
        d2 = np.full(d.shape[0], np.inf)
    passes = d1 < ratio * d2

    best_a = np.argmin(d, axis=0)
    mutual = best_a[best_b] == np.arange(d.shape[0])

    ia = np.nonzero(passes & mutual)[0]
    return np.stack([ia, best_b[ia], d1[ia].astype(np.int64)], axis=1)


def match(kps_a, desc_a, kps_b, desc_b, ratio=DEFAULT_RATIO):
    """match_indices lifted to coordinates: a list of MatchPair(src in A, dst in B)."""
    idx = match_indices(desc_a, desc_b, ratio=ratio)
    return [MatchPair(src=(kps_a[ia].x, kps_a[ia].y),
                      dst=(kps_b[ib].x, kps_b[ib].y),
                      distance=int(dist))
            for ia, ib, dist in idx]
