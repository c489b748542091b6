"""Dataset manifest: a single JSON file listing the image pairs of a dataset.

Each entry pairs a shadow image with its shadow-free ground truth and
optionally points at derived artifacts (aligned GT, mask, homography,
threshold selection). Paths are stored relative to the manifest file so a
dataset directory can be moved wholesale.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class ManifestEntry:
    id: str
    input_path: Path
    gt_path: Path
    mask_path: Path = None
    homography_path: Path = None
    selection: dict = None

    def to_dict(self, root=None):
        def rel(p):
            if p is None:
                return None
            p = Path(p)
            if root is not None:
                try:
                    return str(p.relative_to(root))
                except ValueError:
                    pass
            return str(p)

        d = {"id": self.id, "input_path": rel(self.input_path),
             "gt_path": rel(self.gt_path)}
        if self.mask_path is not None:
            d["mask_path"] = rel(self.mask_path)
        if self.homography_path is not None:
            d["homography_path"] = rel(self.homography_path)
        if self.selection is not None:
            d["selection"] = self.selection
        return d


@dataclass
class DatasetManifest:
    entries: list = field(default_factory=list)
    root: Path = None

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.id in seen:
                raise ValueError(f"duplicate manifest id {e.id!r}")
            seen.add(e.id)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self):
        return [e.id for e in self.entries]

    def get(self, image_id):
        for e in self.entries:
            if e.id == image_id:
                return e
        raise KeyError(f"no manifest entry with id {image_id!r}")

    @classmethod
    def load(cls, path, check_files=True):
        """Parse a manifest JSON; resolves paths against the file's directory
        and verifies the referenced inputs exist."""
        path = Path(path)
        raw = json.loads(path.read_text())
        entries_raw = raw["entries"] if isinstance(raw, dict) else raw
        root = path.parent

        def resolve(p):
            if p is None:
                return None
            p = Path(p)
            return p if p.is_absolute() else root / p

        entries = []
        for d in entries_raw:
            entry = ManifestEntry(
                id=str(d["id"]),
                input_path=resolve(d["input_path"]),
                gt_path=resolve(d["gt_path"]),
                mask_path=resolve(d.get("mask_path")),
                homography_path=resolve(d.get("homography_path")),
                selection=d.get("selection"),
            )
            entries.append(entry)
        manifest = cls(entries=entries, root=root)
        if check_files:
            manifest.check_files()
        return manifest

    def check_files(self):
        missing = []
        for e in self.entries:
            for p in (e.input_path, e.gt_path, e.mask_path, e.homography_path):
                if p is not None and not Path(p).exists():
                    missing.append(f"{e.id}: {p}")
        if missing:
            raise FileNotFoundError(
                "manifest references missing files:\n  " + "\n  ".join(missing))

    def save(self, path):
        path = Path(path)
        root = path.parent
        payload = {"entries": [e.to_dict(root=root) for e in self.entries]}
        path.parent.mkdir(parents=True, exist_ok=True)
        # sorted keys so reruns that rebuild entries from JSON state stay
        # byte-identical with the first run
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.root = root
        return path
