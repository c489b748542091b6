"""Run the whole dataset workflow through the command-line interface.

Builds a small dataset on disk (shadowed inputs plus deliberately misaligned
shadow-free ground truths), then drives the same entry points a user would:

    shadowkit preprocess   align gt to input, propose masks, write manifest
    shadowkit preprocess   again: every entry skips, outputs byte-identical
    shadowkit augment      seeded CutShadow samples with provenance
    shadowkit eval         score a fake "model output" against the gt

Run:  python3 demos/05_pipeline.py
"""

import hashlib
import json
import shutil
from pathlib import Path

import numpy as np
from _synthetic import shadow_scene

from shadowkit import io
from shadowkit.cli import main as cli
from shadowkit.imaging import warp
from shadowkit.manifest import DatasetManifest, ManifestEntry

OUT = Path(__file__).parent / "out" / "pipeline"


def build_dataset(root, n_pairs=3, seed=100):
    """Photo-like scenes: feathered shadows over corner-dense texture, ground
    truth warped off its raster by a known mild projective map. Proposals on
    resampled pairs compete with interpolation noise at crisp edges; these
    scenes keep the shadow mode dominant, the annotation UI handles the rest
    of the cases."""
    (root / "input").mkdir(parents=True, exist_ok=True)
    (root / "gt").mkdir(exist_ok=True)
    entries = []
    for i in range(n_pairs):
        shadowed, gt, _, _ = shadow_scene(
            seed + i, height=120, width=160, penumbra=1.2, floor=0.40,
            gain=0.55, blobs=40, sharp=50, delta=0.30)
        rng = np.random.default_rng(seed + i)
        h0 = np.array([
            [1 + rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02),
             rng.uniform(-4, 4)],
            [rng.uniform(-0.02, 0.02), 1 + rng.uniform(-0.02, 0.02),
             rng.uniform(-4, 4)],
            [0.0, 0.0, 1.0]])
        image_id = f"scene{i:03d}"
        input_path = io.save_png(root / "input" / f"{image_id}.png", shadowed)
        gt_path = io.save_png(root / "gt" / f"{image_id}.png",
                              warp(gt, np.linalg.inv(h0)))
        entries.append(ManifestEntry(id=image_id, input_path=input_path,
                                     gt_path=gt_path))
    manifest = DatasetManifest(entries=entries, root=root)
    manifest.save(root / "manifest.json")
    return root / "manifest.json"


def tree_hash(root):
    """Hash of every output file except the run report, which legitimately
    differs between a fresh run and a rerun (it records what was skipped)."""
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.name != "preprocess_report.json":
            digest.update(path.relative_to(root).as_posix().encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()[:16]


def main():
    if OUT.exists():
        shutil.rmtree(OUT)
    data = OUT / "data"
    manifest_path = build_dataset(data)
    print(f"dataset at {data}\n")

    work = OUT / "preprocessed"
    print("$ shadowkit preprocess")
    cli(["preprocess", "--manifest", str(manifest_path),
         "--out-dir", str(work), "--seed", "0"])

    report = json.loads((work / "preprocess_report.json").read_text())
    for image_id, entry in sorted(report["entries"].items()):
        print(f"  {image_id}: residual {entry['mean_residual_px']:.3f} px, "
              f"{entry['inliers']} inliers, mask interval "
              f"[{entry['selection']['lower']:.4f}, "
              f"{entry['selection']['upper']:.4f}]")

    before = tree_hash(work)
    print("\n$ shadowkit preprocess   (again, same seed)")
    cli(["preprocess", "--manifest", str(manifest_path),
         "--out-dir", str(work), "--seed", "0"])
    after = tree_hash(work)
    print(f"  output tree hash before {before} after {after} "
          f"{'(byte-identical)' if before == after else '(DIFFERS!)'}")

    print("\n$ shadowkit augment")
    cli(["augment", "--manifest", str(work / "manifest.json"),
         "--out-dir", str(OUT / "augmented"), "--n-per-image", "2",
         "--seed", "0"])

    # fake a model: the aligned gt itself, so scores are near-perfect
    preds = OUT / "preds"
    preds.mkdir()
    for png in sorted((work / "aligned").glob("*.png")):
        shutil.copy(png, preds / png.name)

    print("\n$ shadowkit eval")
    cli(["eval", "--pred-dir", str(preds),
         "--manifest", str(work / "manifest.json"),
         "--report", str(OUT / "eval.json")])
    print(f"\nartifacts under {OUT}")


if __name__ == "__main__":
    main()
