"""Batch drivers: dataset preprocessing (align + mask proposal), augmentation
emission, and prediction evaluation.

Preprocessing is idempotent: every entry's inputs and the effective config are
content-hashed, and a rerun over a completed output directory recomputes
nothing. All randomness derives from (config seed, entry index, sample index)
so runs are reproducible from the manifest and config alone.
"""

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import io, sasma
from .augment import augment_sample
from .homography import align_pair, homography_to_json
from .manifest import DatasetManifest, ManifestEntry
from .metrics import (LossWeights, detection_loss, essim_loss, joint_loss,
                      psnr, removal_loss, sp_loss, ssim)

STATE_FILE = "preprocess_state.json"


@dataclass(frozen=True)
class PreprocessConfig:
    seed: int = 0
    reproj_threshold: float = 3.0
    max_keypoints: int = 1000
    octaves: int = 4
    ratio: float = 0.8
    max_iters: int = 2000
    confidence: float = 0.995
    padding: str = "reflect"
    fallback_identity: bool = True
    min_inliers: int = 8
    cleanup: bool = False

    def to_dict(self):
        return asdict(self)


def _entry_hash(entry, config):
    digest = hashlib.sha256()
    digest.update(Path(entry.input_path).read_bytes())
    digest.update(Path(entry.gt_path).read_bytes())
    digest.update(json.dumps(config.to_dict(), sort_keys=True).encode())
    return digest.hexdigest()


def _load_state(out_dir):
    path = Path(out_dir) / STATE_FILE
    if path.exists():
        return json.loads(path.read_text())
    return {}


def _save_state(out_dir, state):
    path = Path(out_dir) / STATE_FILE
    path.write_text(json.dumps(state, indent=2, sort_keys=True))


def run_preprocess(manifest, config, out_dir):
    """Align every ground truth to its shadow image, then propose a shadow
    mask from the aligned pair.

    Writes aligned/<id>.png, homography/<id>.json, masks/<id>.png and an
    updated manifest whose gt_path points at the aligned image. Entries whose
    inputs and config hash to a completed state entry are skipped outright.
    Per-entry failures are recorded and the run continues.

    Returns (updated_manifest, report_dict).
    """
    out_dir = Path(out_dir)
    for sub in ("aligned", "homography", "masks"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    state = _load_state(out_dir)
    report = {"config": config.to_dict(), "entries": {}, "failures": {}}
    updated = []

    for idx, entry in enumerate(manifest):
        paths = {"aligned": out_dir / "aligned" / f"{entry.id}.png",
                 "homography": out_dir / "homography" / f"{entry.id}.json",
                 "mask": out_dir / "masks" / f"{entry.id}.png"}
        try:
            content_hash = _entry_hash(entry, config)
        except OSError as exc:
            report["failures"][entry.id] = f"unreadable input: {exc}"
            continue

        done = (state.get(entry.id, {}).get("hash") == content_hash
                and all(p.exists() for p in paths.values()))
        if done:
            report["entries"][entry.id] = {**state[entry.id]["summary"],
                                           "skipped": True}
        else:
            try:
                summary = _preprocess_entry(entry, config, idx, paths)
            except Exception as exc:
                report["failures"][entry.id] = str(exc)
                continue
            state[entry.id] = {"hash": content_hash, "summary": summary}
            report["entries"][entry.id] = {**summary, "skipped": False}

        selection = entry.selection
        if selection is None:
            prov = state[entry.id]["summary"].get("selection")
            selection = prov
        updated.append(ManifestEntry(
            id=entry.id, input_path=entry.input_path,
            gt_path=paths["aligned"], mask_path=paths["mask"],
            homography_path=paths["homography"], selection=selection))

    _save_state(out_dir, state)
    out_manifest = DatasetManifest(entries=updated, root=out_dir)
    out_manifest.save(out_dir / "manifest.json")
    report_path = out_dir / "preprocess_report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True))
    return out_manifest, report


def _preprocess_entry(entry, config, idx, paths):
    image = io.load_image(entry.input_path)
    gt = io.load_image(entry.gt_path)

    aligned, h, align_report = align_pair(
        image, gt,
        reproj_threshold=config.reproj_threshold,
        seed=[config.seed, idx],
        max_keypoints=config.max_keypoints,
        octaves=config.octaves,
        ratio=config.ratio,
        max_iters=config.max_iters,
        confidence=config.confidence,
        padding=config.padding,
        fallback_identity=config.fallback_identity,
        min_inliers=config.min_inliers,
    )
    io.save_png(paths["aligned"], aligned)
    paths["homography"].write_text(homography_to_json(h, align_report))

    stored = (sasma.ThresholdSelection.from_dict(entry.selection)
              if entry.selection else None)
    mask, hist, sel = sasma.annotate_pair(image, aligned, selection=stored,
                                          cleanup=config.cleanup)
    io.save_mask(paths["mask"], mask)

    return {
        "inliers": align_report.inlier_count,
        "mean_residual_px": (None if math.isinf(align_report.mean_residual_px)
                             else align_report.mean_residual_px),
        "fallback_identity": align_report.fallback_identity,
        "align_error": align_report.error,
        "selection": sel.to_dict() if sel else None,
        "mask_pixels": int(mask.sum()),
    }


def run_augment(manifest, out_dir, seed=0, area_fraction_range=(0.05, 0.4),
                n_per_image=4):
    """Emit n_per_image augmented (input, gt, mask) triplets per entry.

    Entries must carry a mask. Sample k of entry i uses the independent
    random stream seeded by (seed, i, k); each triplet gets a provenance JSON
    recording the transforms applied.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = {"seed": int(seed), "samples": [], "failures": {}}

    for idx, entry in enumerate(manifest):
        if entry.mask_path is None:
            report["failures"][entry.id] = "entry has no mask"
            continue
        try:
            image = io.load_image(entry.input_path)
            gt = io.load_image(entry.gt_path)
            mask = io.load_mask(entry.mask_path)
        except (OSError, ValueError) as exc:
            report["failures"][entry.id] = str(exc)
            continue

        for k in range(n_per_image):
            aug_in, aug_gt, aug_mask, prov = augment_sample(
                image, gt, mask, seed=[seed, idx, k],
                area_fraction_range=area_fraction_range)
            stem = f"{entry.id}_aug{k}"
            io.save_png(out_dir / f"{stem}_input.png", aug_in)
            io.save_png(out_dir / f"{stem}_gt.png", aug_gt)
            io.save_mask(out_dir / f"{stem}_mask.png", aug_mask)
            prov.update({"id": entry.id, "sample": k, "base_seed": int(seed)})
            (out_dir / f"{stem}.json").write_text(
                json.dumps(prov, indent=2, sort_keys=True))
            report["samples"].append(stem)

    (out_dir / "augment_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True))
    return report


def _json_number(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def run_eval(manifest, pred_dir, weights=None):
    """Score predicted restorations against the manifest's ground truths.

    Expects pred_dir/<id>.png per entry; an optional predicted shadow mask at
    pred_dir/masks/<id>.png (paired with the entry's mask) adds the detection
    and joint rows. Missing or unreadable predictions are flagged and excluded
    from the means. Infinite PSNR (identical images) serializes as "inf".
    """
    weights = weights or LossWeights()
    pred_dir = Path(pred_dir)
    per_image = {}
    skipped = {}

    for entry in manifest:
        pred_path = pred_dir / f"{entry.id}.png"
        if not pred_path.exists():
            skipped[entry.id] = "missing prediction"
            continue
        try:
            pred = io.load_image(pred_path)
            gt = io.load_image(entry.gt_path)
        except (OSError, ValueError) as exc:
            skipped[entry.id] = str(exc)
            continue
        if pred.shape != gt.shape:
            skipped[entry.id] = (f"dimension mismatch: prediction {pred.shape} "
                                 f"vs gt {gt.shape}")
            continue

        row = {
            "psnr": psnr(pred, gt),
            "ssim": ssim(pred, gt),
            "essim_loss": essim_loss(pred, gt),
            "sp_loss": sp_loss(pred, gt),
            "removal_loss": removal_loss(pred, gt, weights=weights),
        }
        pred_mask_path = pred_dir / "masks" / f"{entry.id}.png"
        if entry.mask_path is not None and pred_mask_path.exists():
            gt_mask = io.load_mask(entry.mask_path).astype(np.float64)
            pred_mask = io.load_mask(pred_mask_path).astype(np.float64)
            row["detection_loss"] = detection_loss(pred_mask, gt_mask)
            row["joint_loss"] = joint_loss(row["removal_loss"],
                                           row["detection_loss"],
                                           weights.alpha)
        per_image[entry.id] = row

    metric_names = sorted({name for row in per_image.values() for name in row})
    means = {}
    for name in metric_names:
        values = [row[name] for row in per_image.values() if name in row]
        means[name] = sum(values) / len(values) if values else None

    report = {
        "weights": {"alpha": weights.alpha, "beta": weights.beta},
        "n_evaluated": len(per_image),
        "n_skipped": len(skipped),
        "per_image": {
            image_id: {k: _json_number(v) for k, v in row.items()}
            for image_id, row in sorted(per_image.items())
        },
        "skipped": skipped,
        "means": {k: _json_number(v) for k, v in means.items()},
    }
    return report
