"""Semi-automatic shadow mask annotation.

An absolute-error map of the HSV value channel between the shadow image and
its aligned shadow-free counterpart is histogrammed; the shadow mode shows up
as a secondary peak away from zero. A threshold interval around that peak is
proposed automatically, a human annotator may override it, and pixels whose
error falls inside the interval become the shadow mask.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.ndimage as ndi

from . import io
from .imaging import check_image, v_channel

N_BINS = 256
# the near-zero non-shadow mass dominates the low bins; the peak search only
# considers bins entirely above this error value
PEAK_MIN_ERROR = 0.05
PEAK_MIN_BIN = int(np.ceil(PEAK_MIN_ERROR * N_BINS))
RUN_FRACTION = 0.10
RUN_WIDEN_BINS = 2

SOURCE_PROPOSED = "proposed"
SOURCE_HUMAN = "human-adjusted"


@dataclass(frozen=True)
class ThresholdSelection:
    """Error-value interval [lower, upper] marking shadow pixels."""

    lower: float
    upper: float
    source: str = SOURCE_PROPOSED

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValueError(
                f"selection must satisfy 0 <= lower <= upper <= 1, got "
                f"({self.lower}, {self.upper})")

    def to_dict(self):
        return {"lower": self.lower, "upper": self.upper, "source": self.source}

    @classmethod
    def from_dict(cls, d):
        return cls(lower=float(d["lower"]), upper=float(d["upper"]),
                   source=str(d.get("source", SOURCE_HUMAN)))


@dataclass
class Histogram:
    """256-bin error histogram with the proposed shadow interval.

    peak/lower/upper are bin indices; all three are -1 when no shadow mode was
    found (then there is no proposal).
    """

    counts: np.ndarray
    peak: int
    lower: int
    upper: int

    bin_width = 1.0 / N_BINS

    @property
    def has_proposal(self):
        return self.peak >= 0

    @property
    def proposed_lower(self):
        return self.lower / N_BINS if self.has_proposal else None

    @property
    def proposed_upper(self):
        return min(1.0, (self.upper + 1) / N_BINS) if self.has_proposal else None

    def to_selection(self):
        if not self.has_proposal:
            return None
        return ThresholdSelection(self.proposed_lower, self.proposed_upper,
                                  source=SOURCE_PROPOSED)


def error_map(image, gt_aligned):
    """Per-pixel absolute difference of the HSV value channels."""

    def value_plane(img, name):
        img = check_image(img, name=name)
        return v_channel(img) if img.ndim == 3 else img

    a = value_plane(image, "image")
    b = value_plane(gt_aligned, "gt_aligned")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape} "
                         "(ground truth must be aligned first)")
    return np.abs(a - b)


def build_histogram(err):
    """Histogram an error plane and propose shadow thresholds.

    The peak is the highest-count bin above the near-zero exclusion; the
    proposal is the contiguous run of bins around it with counts >= 10% of the
    peak count, widened by 2 bins on each side.
    """
    err = np.asarray(err, dtype=np.float64)
    counts = np.histogram(err, bins=N_BINS, range=(0.0, 1.0))[0]

    search = counts[PEAK_MIN_BIN:]
    if search.size == 0 or search.max() == 0:
        return Histogram(counts=counts, peak=-1, lower=-1, upper=-1)
    peak = PEAK_MIN_BIN + int(np.argmax(search))

    floor = RUN_FRACTION * counts[peak]
    lower = peak
    while lower > 0 and counts[lower - 1] >= floor:
        lower -= 1
    upper = peak
    while upper < N_BINS - 1 and counts[upper + 1] >= floor:
        upper += 1
    lower = max(0, lower - RUN_WIDEN_BINS)
    upper = min(N_BINS - 1, upper + RUN_WIDEN_BINS)
    return Histogram(counts=counts, peak=peak, lower=lower, upper=upper)


def binarize(err, selection, cleanup=False):
    """Mask = 1 where lower <= err <= upper.

    With cleanup set, a 3x3 morphological open-then-close pass removes
    speckle; it is never applied implicitly.
    """
    err = np.asarray(err, dtype=np.float64)
    mask = (err >= selection.lower) & (err <= selection.upper)
    if cleanup:
        structure = np.ones((3, 3), dtype=bool)
        mask = ndi.binary_opening(mask, structure=structure)
        mask = ndi.binary_closing(mask, structure=structure)
    return mask.astype(np.uint8)


class SelectionStore:
    """JSON-backed map image-id -> ThresholdSelection."""

    def __init__(self, selections=None, path=None):
        self._data = dict(selections or {})
        self.path = Path(path) if path else None

    @classmethod
    def load(cls, path):
        path = Path(path)
        if not path.exists():
            return cls(path=path)
        raw = json.loads(path.read_text())
        return cls({k: ThresholdSelection.from_dict(v) for k, v in raw.items()},
                   path=path)

    def save(self, path=None):
        path = Path(path) if path else self.path
        if path is None:
            raise ValueError("selection store has no path")
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {k: self._data[k].to_dict() for k in sorted(self._data)}
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(payload, indent=2, sort_keys=True))
        tmp.replace(path)
        self.path = path

    def get(self, image_id):
        return self._data.get(image_id)

    def set(self, image_id, selection):
        self._data[image_id] = selection

    def ids(self):
        return sorted(self._data)

    def __contains__(self, image_id):
        return image_id in self._data

    def __len__(self):
        return len(self._data)


def annotate_pair(image, gt_aligned, selection=None, cleanup=False):
    """Mask one aligned pair: stored/human selection if given, else the proposal.

    Returns (mask, histogram, selection_used); selection_used is None when
    there was neither a stored selection nor a proposal (the mask is then all
    zeros).
    """
    err = error_map(image, gt_aligned)
    hist = build_histogram(err)
    sel = selection if selection is not None else hist.to_selection()
    if sel is None:
        return np.zeros(err.shape, dtype=np.uint8), hist, None
    return binarize(err, sel, cleanup=cleanup), hist, sel


@dataclass
class BatchReport:
    masks: dict
    provenance: dict
    failures: dict

    def to_dict(self):
        return {"masks": {k: str(v) for k, v in self.masks.items()},
                "provenance": self.provenance,
                "failures": self.failures}


def annotate_batch(entries, out_dir, store=None, cleanup=False):
    """Mask a batch of (image_id, input_path, gt_path) aligned pairs.

    Stored human selections win over automatic proposals. Masks are written to
    out_dir/<id>.png with a provenance.json sidecar recording the thresholds
    used per image. Missing or unreadable pairs are reported and skipped; the
    batch continues.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    store = store or SelectionStore()
    report = BatchReport(masks={}, provenance={}, failures={})

    for image_id, input_path, gt_path in entries:
        try:
            image = io.load_image(input_path)
            gt = io.load_image(gt_path)
            mask, hist, sel = annotate_pair(image, gt, selection=store.get(image_id),
                                            cleanup=cleanup)
        except (OSError, ValueError) as exc:
            report.failures[image_id] = str(exc)
            continue
        mask_path = io.save_mask(out_dir / f"{image_id}.png", mask)
        report.masks[image_id] = mask_path
        report.provenance[image_id] = {
            "selection": sel.to_dict() if sel else None,
            "peak_bin": hist.peak,
            "cleanup": bool(cleanup),
        }

    prov_path = out_dir / "provenance.json"
    prov_path.write_text(json.dumps(report.provenance, indent=2, sort_keys=True))
    return report
