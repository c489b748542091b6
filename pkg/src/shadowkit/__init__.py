"""shadowkit: shadow-removal dataset tooling.

Ground-truth alignment by feature-matched homography, semi-automatic shadow
mask annotation from value-channel error histograms, edge- and
structure-aware restoration losses, CutShadow augmentation, and the batch /
HTTP drivers tying them together.
"""

from .augment import CutRegion, Direction, augment_sample, cutshadow, sample_region
from .errors import EstimationError, NoConsensusError
from .features import Keypoint, MatchPair, describe, detect, match
from .homography import (AlignmentReport, RansacResult, align_pair,
                         estimate_dlt, homography_from_json,
                         homography_to_json, pairs_from_points,
                         ransac_homography, symmetric_transfer_error)
from .imaging import (flip_vertical, hsv_to_rgb, luminance, mixup,
                      resize_bilinear, rgb_to_hsv, rotate90, v_channel, warp)
from .io import load_image, load_mask, mask_png_bytes, png_bytes, save_mask, save_png
from .manifest import DatasetManifest, ManifestEntry
from .metrics import (LossWeights, PatchGridExtractor, canny, detection_loss,
                      edge_detect, essim_loss, joint_loss, mse, psnr,
                      removal_loss, sp_loss, ssim, ssim_loss)
from .pipeline import PreprocessConfig, run_augment, run_eval, run_preprocess
from .sasma import (Histogram, SelectionStore, ThresholdSelection,
                    annotate_batch, annotate_pair, binarize, build_histogram,
                    error_map)

__version__ = "0.1.0"

__all__ = [
    "AlignmentReport", "CutRegion", "DatasetManifest", "Direction",
    "EstimationError", "Histogram", "Keypoint", "LossWeights",
    "ManifestEntry", "MatchPair", "NoConsensusError", "PatchGridExtractor",
    "PreprocessConfig", "RansacResult", "SelectionStore",
    "ThresholdSelection", "align_pair", "annotate_batch", "annotate_pair",
    "augment_sample", "binarize", "build_histogram", "canny", "cutshadow",
    "describe", "detect", "detection_loss", "edge_detect", "error_map",
    "essim_loss", "estimate_dlt", "flip_vertical", "homography_from_json",
    "homography_to_json", "hsv_to_rgb", "joint_loss", "load_image",
    "load_mask", "luminance", "mask_png_bytes", "match", "mixup", "mse",
    "pairs_from_points", "png_bytes", "psnr", "ransac_homography",
    "removal_loss", "resize_bilinear", "rgb_to_hsv", "rotate90",
    "run_augment", "run_eval", "run_preprocess", "sample_region", "save_mask",
    "save_png", "sp_loss", "ssim", "ssim_loss", "symmetric_transfer_error",
    "v_channel", "warp",
]
