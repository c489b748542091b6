"""Robust homography estimation and the ground-truth alignment driver.

estimate_dlt: Hartley-normalized direct linear transform (least squares).
ransac_homography: seeded RANSAC over 4-point minimal samples scored by
symmetric transfer error, with adaptive early exit and an all-inlier refit.
align_pair: detect/describe/match two images of the same scene, estimate the
homography mapping the shadow-free image into the shadow image's frame, and
warp it there with reflect padding.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import features
from .errors import EstimationError, NoConsensusError
from .imaging import check_image, warp


def pairs_from_points(src, dst, distances=None):
    """Build MatchPair objects from (N, 2) source and destination point arrays."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise ValueError("src and dst must both be (N, 2) arrays")
    if distances is None:
        distances = np.zeros(len(src), dtype=np.int64)
    return [features.MatchPair(src=(float(s[0]), float(s[1])),
                               dst=(float(d[0]), float(d[1])),
                               distance=int(t))
            for s, d, t in zip(src, dst, distances)]


def _point_arrays(pairs):
    src = np.array([p.src for p in pairs], dtype=np.float64)
    dst = np.array([p.dst for p in pairs], dtype=np.float64)
    return src, dst


def _normalization(pts):
    # similarity moving the centroid to the origin and mean distance to sqrt(2)
    centroid = pts.mean(axis=0)
    dist = np.sqrt(((pts - centroid) ** 2).sum(axis=1)).mean()
    if dist < 1e-12:
        raise EstimationError("degenerate configuration: coincident points")
    s = math.sqrt(2.0) / dist
    return np.array([[s, 0.0, -s * centroid[0]],
                     [0.0, s, -s * centroid[1]],
                     [0.0, 0.0, 1.0]])


def _apply_h(h, pts):
    ph = np.c_[pts, np.ones(len(pts))]
    q = ph @ h.T
    w = q[:, 2]
    w = np.where(np.abs(w) > 1e-15, w, 1e-15)
    return q[:, :2] / w[:, None]


def estimate_dlt(pairs):
    """Least-squares homography from >= 4 correspondences (normalized DLT).

    Exact for 4 noise-free pairs. Raises EstimationError on degenerate
    configurations (rank-deficient system, coincident/collinear points).
    """
    if len(pairs) < 4:
        raise ValueError(f"need at least 4 pairs, got {len(pairs)}")
    src, dst = _point_arrays(pairs)
    t_src = _normalization(src)
    t_dst = _normalization(dst)
    sn = _apply_h(t_src, src)
    dn = _apply_h(t_dst, dst)

    n = len(pairs)
    zeros = np.zeros(n)
    ones = np.ones(n)
    x, y = sn[:, 0], sn[:, 1]
    u, v = dn[:, 0], dn[:, 1]
    a = np.zeros((2 * n, 9))
    a[0::2] = np.c_[x, y, ones, zeros, zeros, zeros, -u * x, -u * y, -u]
    a[1::2] = np.c_[zeros, zeros, zeros, x, y, ones, -v * x, -v * y, -v]

    _, sv, vt = np.linalg.svd(a)
    if sv[7] < 1e-9 * max(sv[0], 1e-12):
        raise EstimationError("degenerate configuration: rank-deficient system")
    hn = vt[-1].reshape(3, 3)
    h = np.linalg.inv(t_dst) @ hn @ t_src
    if abs(h[2, 2]) < 1e-12 or not np.all(np.isfinite(h)):
        raise EstimationError("degenerate homography estimate")
    h = h / h[2, 2]
    if abs(np.linalg.det(h)) < 1e-12:
        raise EstimationError("estimated homography is singular")
    return h


def symmetric_transfer_error(h, pairs):
    """Per-pair mean of forward and backward transfer distances, in pixels."""
    src, dst = _point_arrays(pairs)
    hinv = np.linalg.inv(h)
    d_fwd = np.sqrt(((_apply_h(h, src) - dst) ** 2).sum(axis=1))
    d_bwd = np.sqrt(((_apply_h(hinv, dst) - src) ** 2).sum(axis=1))
    return 0.5 * (d_fwd + d_bwd)


@dataclass
class RansacResult:
    h: np.ndarray
    inliers: np.ndarray          # boolean flag per input pair
    iterations_run: int
    residuals: np.ndarray        # symmetric transfer error per pair under h

    @property
    def inlier_count(self):
        return int(self.inliers.sum())

    @property
    def mean_inlier_residual(self):
        if not self.inliers.any():
            return math.inf
        return float(self.residuals[self.inliers].mean())


def _adaptive_iterations(inlier_ratio, confidence, sample_size=4):
    if inlier_ratio <= 0.0:
        return math.inf
    good = inlier_ratio ** sample_size
    if good >= 1.0:
        return 0
    denom = math.log1p(-good)
    if denom >= 0.0:
        return math.inf
    return math.ceil(math.log1p(-confidence) / denom)


def ransac_homography(pairs, reproj_threshold=3.0, max_iters=2000,
                      confidence=0.995, seed=0):
    """RANSAC homography fit of putative matches; deterministic per seed.

    Repeatedly fits 4-pair minimal samples, scores by symmetric transfer
    error < reproj_threshold, keeps the largest consensus set, refits on all
    its inliers, and exits early once the adaptive iteration bound for the
    requested confidence is met. Raises NoConsensusError when no model is
    supported by at least 4 inliers.
    """
    n = len(pairs)
    if n < 4:
        raise NoConsensusError(f"need at least 4 pairs for RANSAC, got {n}")
    rng = np.random.default_rng(seed)

    best_count = 0
    best_mean = math.inf
    best_h = None
    needed = math.inf
    it = 0
    while it < max_iters and it < needed:
        it += 1
        idx = rng.choice(n, size=4, replace=False)
        try:
            h = estimate_dlt([pairs[i] for i in idx])
        except EstimationError:
            continue
        err = symmetric_transfer_error(h, pairs)
        inl = err < reproj_threshold
        count = int(inl.sum())
        if count < 4:
            continue
        mean_err = float(err[inl].mean())
        if count > best_count or (count == best_count and mean_err < best_mean):
            best_count = count
            best_mean = mean_err
            best_h = h
            needed = _adaptive_iterations(count / n, confidence)

    if best_h is None:
        raise NoConsensusError("no homography with at least 4 inliers found")

    # refit on the full consensus set; keep the minimal-sample model if the
    # refit degenerates or loses support
    err = symmetric_transfer_error(best_h, pairs)
    inl = err < reproj_threshold
    try:
        refit = estimate_dlt([pairs[i] for i in np.nonzero(inl)[0]])
        err_refit = symmetric_transfer_error(refit, pairs)
        inl_refit = err_refit < reproj_threshold
        if int(inl_refit.sum()) >= 4:
            return RansacResult(h=refit, inliers=inl_refit,
                                iterations_run=it, residuals=err_refit)
    except EstimationError:
        pass
    return RansacResult(h=best_h, inliers=inl, iterations_run=it, residuals=err)


@dataclass
class AlignmentReport:
    """Outcome of one shadow / shadow-free alignment."""

    aligned: bool
    inlier_count: int = 0
    mean_residual_px: float = math.inf
    n_keypoints_input: int = 0
    n_keypoints_gt: int = 0
    n_matches: int = 0
    iterations: int = 0
    fallback_identity: bool = False
    error: str = ""

    def to_dict(self):
        return {
            "aligned": self.aligned,
            "inliers": self.inlier_count,
            "mean_residual_px": None if math.isinf(self.mean_residual_px)
            else round(self.mean_residual_px, 6),
            "n_keypoints_input": self.n_keypoints_input,
            "n_keypoints_gt": self.n_keypoints_gt,
            "n_matches": self.n_matches,
            "iterations": self.iterations,
            "fallback_identity": self.fallback_identity,
            "error": self.error,
        }


def align_pair(shadow, shadow_free, reproj_threshold=3.0, seed=7,
               max_keypoints=1000, octaves=4, ratio=features.DEFAULT_RATIO,
               max_iters=2000, confidence=0.995, padding="reflect",
               fallback_identity=True, min_inliers=8):
    """Warp shadow_free into the shadow image's frame.

    Detects and matches corners on both images, estimates the homography
    mapping shadow-free coordinates to shadow coordinates with RANSAC, and
    warps. A consensus below min_inliers is rejected: four matches fit any
    exact homography, so a minimal-sample consensus carries no evidence the
    pair is actually related, and warping by it can destroy an already
    aligned ground truth. Returns (aligned_gt, h, report). When no consensus
    can be found and fallback_identity is set, the unwarped shadow_free
    image and the identity come back with the failure recorded in the
    report; otherwise the NoConsensusError propagates.
    """
    shadow = check_image(shadow, name="shadow")
    shadow_free = check_image(shadow_free, name="shadow_free")

    def fallback(reason, report):
        report.error = reason
        report.fallback_identity = True
        if not fallback_identity:
            raise NoConsensusError(reason)
        return shadow_free, np.eye(3), report

    kps_in = features.detect(shadow, max_keypoints=max_keypoints, octaves=octaves)
    kps_gt = features.detect(shadow_free, max_keypoints=max_keypoints, octaves=octaves)
    report = AlignmentReport(aligned=False,
                             n_keypoints_input=len(kps_in),
                             n_keypoints_gt=len(kps_gt))
    if len(kps_in) < 4 or len(kps_gt) < 4:
        return fallback("no_consensus: too few keypoints", report)

    desc_in, kept_in = features.describe(shadow, kps_in)
    desc_gt, kept_gt = features.describe(shadow_free, kps_gt)
    kps_in = [kps_in[i] for i in kept_in]
    kps_gt = [kps_gt[i] for i in kept_gt]
    matches = features.match(kps_gt, desc_gt, kps_in, desc_in, ratio=ratio)
    report.n_matches = len(matches)
    if len(matches) < 4:
        return fallback("no_consensus: too few matches", report)

    try:
        result = ransac_homography(matches, reproj_threshold=reproj_threshold,
                                   max_iters=max_iters, confidence=confidence,
                                   seed=seed)
    except NoConsensusError as exc:
        return fallback(f"no_consensus: {exc}", report)

    if result.inlier_count < min_inliers:
        report.n_matches = len(matches)
        return fallback(
            f"no_consensus: consensus of {result.inlier_count} is below "
            f"min_inliers={min_inliers}", report)

    report.aligned = True
    report.inlier_count = result.inlier_count
    report.mean_residual_px = result.mean_inlier_residual
    report.iterations = result.iterations_run
    aligned = warp(shadow_free, result.h, out_size=shadow.shape[:2], padding=padding)
    return aligned, result.h, report


def homography_to_json(h, report):
    """Sidecar JSON written alongside each aligned image."""
    return json.dumps({
        "h": [[float(v) for v in row] for row in np.asarray(h)],
        "inliers": report.inlier_count,
        "mean_residual_px": None if math.isinf(report.mean_residual_px)
        else report.mean_residual_px,
        "aligned": report.aligned,
        "fallback_identity": report.fallback_identity,
    }, indent=2, sort_keys=True)


def homography_from_json(text):
    data = json.loads(text)
    return np.array(data["h"], dtype=np.float64)
