"""Align a ground truth back onto its shadowed counterpart.

Shadow-removal datasets pair a shadowed photo with a shadow-free retake of
the same scene; the retake never lands on exactly the same pixels. This demo
misaligns a synthetic pair with a known projective map, then recovers the
map from keypoint matches alone and measures how close the recovered warp is
to the truth.

Run:  python3 demos/01_alignment.py
"""

from pathlib import Path

import numpy as np
from _synthetic import textured_image

from shadowkit import io
from shadowkit.features import detect
from shadowkit.homography import align_pair
from shadowkit.imaging import warp

OUT = Path(__file__).parent / "out" / "alignment"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(7)
    shadow = textured_image(180, 240, rng, blobs=45)

    # the "retake": same scene seen through a mild projective distortion
    h_true = np.array([[1.015, 0.025, 3.0],
                       [-0.018, 0.990, -4.0],
                       [1.5e-5, -1.0e-5, 1.0]])
    misaligned_gt = warp(shadow, h_true)

    keypoints = detect(shadow)
    print(f"detected {len(keypoints)} keypoints on the shadow image")

    aligned_gt, h_est, report = align_pair(shadow, misaligned_gt, seed=0)
    print(f"matches: {report.n_matches}, inliers: {report.inlier_count}")
    print(f"mean inlier residual: {report.mean_residual_px:.3f} px")

    # the recovered map warps the gt back onto the shadow frame, so the
    # truth to compare against is the inverse of the applied misalignment
    h, w = shadow.shape[:2]
    corners = np.array([[0, 0, 1], [w, 0, 1], [w, h, 1], [0, h, 1]],
                       dtype=np.float64)

    def apply(m, pts):
        q = pts @ m.T
        return q[:, :2] / q[:, 2:3]

    corner_err = np.linalg.norm(
        apply(h_est, corners) - apply(np.linalg.inv(h_true), corners), axis=1)
    print(f"corner disagreement vs true map: max {corner_err.max():.3f} px")

    before = np.abs(shadow - misaligned_gt).mean(axis=-1)
    after = np.abs(shadow - aligned_gt).mean(axis=-1)
    print(f"mean |input - gt| before alignment: {before.mean():.4f}")
    print(f"mean |input - gt| after alignment:  {after.mean():.4f}")

    io.save_png(OUT / "shadow.png", shadow)
    io.save_png(OUT / "gt_misaligned.png", misaligned_gt)
    io.save_png(OUT / "gt_aligned.png", aligned_gt)
    io.save_png(OUT / "residual_before.png", np.clip(before * 4, 0, 1))
    io.save_png(OUT / "residual_after.png", np.clip(after * 4, 0, 1))
    print(f"wrote images to {OUT}")


if __name__ == "__main__":
    main()
