"""Command-line entry points.

Subcommands: align, sasma (propose/apply), augment, eval, serve, preprocess,
and a keypoints debug dump. Option precedence everywhere is CLI flag over
--config file over built-in default, and the effective configuration is
echoed into each command's JSON report.
"""

import argparse
import json
import math
import sys
from pathlib import Path

from . import io, sasma
from .features import describe, detect, match
from .homography import align_pair, homography_to_json
from .manifest import DatasetManifest, ManifestEntry
from .metrics import LossWeights
from .pipeline import PreprocessConfig, run_augment, run_eval, run_preprocess
from .server import serve_annotation

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def _image_files(directory):
    directory = Path(directory)
    files = [p for p in directory.iterdir()
             if p.suffix.lower() in IMAGE_SUFFIXES]
    return {p.stem: p for p in sorted(files)}


def manifest_from_dirs(input_dir, gt_dir):
    """Pair same-stem images across two directories into a manifest."""
    inputs = _image_files(input_dir)
    gts = _image_files(gt_dir)
    common = sorted(set(inputs) & set(gts))
    if not common:
        raise SystemExit(f"no same-named image pairs between {input_dir} "
                         f"and {gt_dir}")
    unmatched = sorted(set(inputs) ^ set(gts))
    if unmatched:
        print(f"warning: {len(unmatched)} unmatched files skipped: "
              f"{', '.join(unmatched[:5])}", file=sys.stderr)
    entries = [ManifestEntry(id=stem, input_path=inputs[stem],
                             gt_path=gts[stem]) for stem in common]
    return DatasetManifest(entries=entries)


def _load_manifest(args):
    if getattr(args, "manifest", None):
        return DatasetManifest.load(args.manifest)
    if getattr(args, "input_dir", None) and getattr(args, "gt_dir", None):
        return manifest_from_dirs(args.input_dir, args.gt_dir)
    raise SystemExit("give either --manifest or both --input-dir and --gt-dir")


def _effective(args, names, defaults):
    """flag > config file > default, for the listed option names."""
    from_file = {}
    if getattr(args, "config", None):
        from_file = json.loads(Path(args.config).read_text())
        unknown = set(from_file) - set(names)
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for name in names:
        flag = getattr(args, name, None)
        if flag is not None:
            out[name] = flag
        elif name in from_file:
            out[name] = from_file[name]
        else:
            out[name] = defaults[name]
    return out


def cmd_align(args):
    manifest = _load_manifest(args)
    defaults = PreprocessConfig()
    cfg = _effective(args, ("threshold", "seed", "padding", "max_keypoints"),
                     {"threshold": defaults.reproj_threshold,
                      "seed": 7, "padding": defaults.padding,
                      "max_keypoints": defaults.max_keypoints})
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report = {"config": cfg, "pairs": {}, "failures": {}}
    for idx, entry in enumerate(manifest):
        try:
            image = io.load_image(entry.input_path)
            gt = io.load_image(entry.gt_path)
            aligned, h, pair_report = align_pair(
                image, gt, reproj_threshold=cfg["threshold"],
                seed=[cfg["seed"], idx], padding=cfg["padding"],
                max_keypoints=cfg["max_keypoints"])
        except Exception as exc:
            report["failures"][entry.id] = str(exc)
            print(f"align {entry.id}: FAILED ({exc})", file=sys.stderr)
            continue
        io.save_png(out_dir / f"{entry.id}.png", aligned)
        (out_dir / f"{entry.id}.json").write_text(
            homography_to_json(h, pair_report))
        resid = pair_report.mean_residual_px
        report["pairs"][entry.id] = {
            "inliers": pair_report.inlier_count,
            "mean_residual_px": None if math.isinf(resid) else resid,
            "fallback_identity": pair_report.fallback_identity,
        }
        print(f"align {entry.id}: {pair_report.inlier_count} inliers, "
              f"residual {resid:.3f} px")
    (out_dir / "align_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True))
    return 1 if report["failures"] else 0


def cmd_sasma(args):
    manifest = DatasetManifest.load(args.pairs_manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.action == "propose":
        store = sasma.SelectionStore(path=out_dir / "selections.json")
        hist_dir = out_dir / "histograms"
        hist_dir.mkdir(exist_ok=True)
        n_proposed = 0
        for entry in manifest:
            err = sasma.error_map(io.load_image(entry.input_path),
                                  io.load_image(entry.gt_path))
            hist = sasma.build_histogram(err)
            (hist_dir / f"{entry.id}.json").write_text(json.dumps({
                "bins": [int(c) for c in hist.counts],
                "peak": hist.peak,
                "proposed_lower": hist.proposed_lower,
                "proposed_upper": hist.proposed_upper,
            }))
            sel = hist.to_selection()
            if sel is not None:
                store.set(entry.id, sel)
                n_proposed += 1
                print(f"sasma propose {entry.id}: "
                      f"[{sel.lower:.4f}, {sel.upper:.4f}]")
            else:
                print(f"sasma propose {entry.id}: no shadow mode found")
        store.save()
        print(f"{n_proposed}/{len(manifest)} proposals -> {store.path}")
        return 0

    # apply: explicit selections file wins, then per-entry manifest
    # selections, then the automatic proposal
    store = (sasma.SelectionStore.load(args.selections)
             if args.selections else sasma.SelectionStore())
    for entry in manifest:
        if entry.id not in store and entry.selection:
            store.set(entry.id,
                      sasma.ThresholdSelection.from_dict(entry.selection))
    entries = [(e.id, e.input_path, e.gt_path) for e in manifest]
    report = sasma.annotate_batch(entries, out_dir, store=store,
                                  cleanup=args.cleanup)
    for image_id, reason in report.failures.items():
        print(f"sasma apply {image_id}: FAILED ({reason})", file=sys.stderr)
    print(f"{len(report.masks)}/{len(manifest)} masks -> {out_dir}")
    return 1 if report.failures else 0


def cmd_augment(args):
    manifest = DatasetManifest.load(args.manifest)
    cfg = _effective(args, ("seed", "area_min", "area_max", "n_per_image"),
                     {"seed": 0, "area_min": 0.05, "area_max": 0.4,
                      "n_per_image": 4})
    report = run_augment(manifest, args.out_dir, seed=cfg["seed"],
                         area_fraction_range=(cfg["area_min"],
                                              cfg["area_max"]),
                         n_per_image=cfg["n_per_image"])
    for image_id, reason in report["failures"].items():
        print(f"augment {image_id}: FAILED ({reason})", file=sys.stderr)
    print(f"{len(report['samples'])} augmented triplets -> {args.out_dir}")
    return 1 if report["failures"] else 0


def cmd_eval(args):
    if args.manifest:
        manifest = DatasetManifest.load(args.manifest)
    elif args.gt_dir:
        gts = _image_files(args.gt_dir)
        preds = _image_files(args.pred_dir)
        ids = sorted(set(gts) & set(preds)) or sorted(gts)
        manifest = DatasetManifest(entries=[
            ManifestEntry(id=i, input_path=gts[i], gt_path=gts[i])
            for i in ids])
    else:
        raise SystemExit("give either --manifest or --gt-dir")

    cfg = _effective(args, ("alpha", "beta"),
                     {"alpha": LossWeights.alpha, "beta": LossWeights.beta})
    weights = LossWeights(alpha=cfg["alpha"], beta=cfg["beta"])
    report = run_eval(manifest, args.pred_dir, weights=weights)

    if args.metrics:
        wanted = _metric_columns(args.metrics)
        report["per_image"] = {
            image_id: {k: v for k, v in row.items() if k in wanted}
            for image_id, row in report["per_image"].items()}
        report["means"] = {k: v for k, v in report["means"].items()
                           if k in wanted}

    text = json.dumps(report, indent=2, sort_keys=True)
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        Path(args.report).write_text(text)
    for name, value in sorted(report["means"].items()):
        print(f"mean {name}: {value}")
    print(f"{report['n_evaluated']} evaluated, {report['n_skipped']} skipped")
    return 0


def _metric_columns(spec_str):
    aliases = {"psnr": ["psnr"], "ssim": ["ssim"],
               "essim": ["essim_loss"], "sp": ["sp_loss"],
               "removal": ["removal_loss"], "detection": ["detection_loss"],
               "joint": ["joint_loss"]}
    wanted = set()
    for token in spec_str.split(","):
        token = token.strip().lower()
        if token not in aliases:
            raise SystemExit(f"unknown metric {token!r}; choose from "
                             f"{', '.join(sorted(aliases))}")
        wanted.update(aliases[token])
    return wanted


def cmd_preprocess(args):
    manifest = DatasetManifest.load(args.manifest)
    defaults = PreprocessConfig()
    names = ("seed", "threshold", "max_keypoints", "cleanup")
    cfg = _effective(args, names, {"seed": defaults.seed,
                                   "threshold": defaults.reproj_threshold,
                                   "max_keypoints": defaults.max_keypoints,
                                   "cleanup": defaults.cleanup})
    config = PreprocessConfig(seed=cfg["seed"],
                              reproj_threshold=cfg["threshold"],
                              max_keypoints=cfg["max_keypoints"],
                              cleanup=cfg["cleanup"])
    updated, report = run_preprocess(manifest, config, args.out_dir)
    n_skipped = sum(1 for e in report["entries"].values() if e["skipped"])
    for image_id, reason in report["failures"].items():
        print(f"preprocess {image_id}: FAILED ({reason})", file=sys.stderr)
    print(f"{len(updated)} entries preprocessed ({n_skipped} up to date) "
          f"-> {args.out_dir}")
    return 1 if report["failures"] else 0


def cmd_serve(args):
    serve_annotation(manifest=args.manifest, port=args.port, host=args.host,
                     frontend_dir=args.frontend_dir)
    return 0


def cmd_keypoints(args):
    image = io.load_image(args.image)
    kps = detect(image, max_keypoints=args.max_keypoints)
    descs, kept = describe(image, kps)
    out = Path(args.out) if args.out else None
    lines = []
    if args.match_image:
        other = io.load_image(args.match_image)
        kps_b = detect(other, max_keypoints=args.max_keypoints)
        descs_b, kept_b = describe(other, kps_b)
        pairs = match([kps[i] for i in kept], descs,
                      [kps_b[i] for i in kept_b], descs_b)
        lines = [p.to_json() for p in pairs]
        print(f"{len(pairs)} matches", file=sys.stderr)
    else:
        lines = [kps[i].to_json() for i in kept]
        print(f"{len(kept)} keypoints", file=sys.stderr)
    text = "\n".join(lines) + ("\n" if lines else "")
    if out:
        out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="shadowkit",
        description="shadow-removal dataset preprocessing, annotation, "
                    "augmentation, and evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", help="warp ground truths onto shadow images")
    p.add_argument("--manifest")
    p.add_argument("--input-dir")
    p.add_argument("--gt-dir")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--padding", choices=("reflect", "zero"))
    p.add_argument("--max-keypoints", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("sasma", help="propose or apply shadow-mask thresholds")
    p.add_argument("action", choices=("propose", "apply"))
    p.add_argument("--pairs-manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--selections", help="selections JSON (apply only)")
    p.add_argument("--cleanup", action="store_true")
    p.set_defaults(func=cmd_sasma)

    p = sub.add_parser("augment", help="emit CutShadow training triplets")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--area-min", type=float)
    p.add_argument("--area-max", type=float)
    p.add_argument("--n-per-image", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--manifest")
    p.add_argument("--gt-dir")
    p.add_argument("--metrics", help="comma list: psnr,ssim,essim,sp,"
                                     "removal,detection,joint")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--config")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--manifest")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--frontend-dir")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("preprocess", help="align + propose masks in one pass")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--max-keypoints", type=int)
    p.add_argument("--cleanup", action="store_true", default=None)
    p.add_argument("--config")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("keypoints", help="debug dump of keypoints or matches")
    p.add_argument("--image", required=True)
    p.add_argument("--match-image")
    p.add_argument("--max-keypoints", type=int, default=500)
    p.add_argument("--out")
    p.set_defaults(func=cmd_keypoints)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
