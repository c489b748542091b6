"""HTTP annotation service for the human threshold-adjustment step.

Serves the error histogram and threshold proposal per image, renders live
mask previews for arbitrary threshold intervals, and persists accepted
selections plus their masks. Mask bytes are produced by the same encoding
path as the batch annotator, so a mask fetched from the server is
byte-identical to the batch output for the same selection.

Reads are unrestricted; all writes go through one lock (last write wins per
image, each write logged).
"""

import logging
import os
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, model_validator

from . import io, sasma
from .manifest import DatasetManifest

log = logging.getLogger("shadowkit.server")

DATA_ROOT_ENV = "SHADOWKIT_DATA_ROOT"
SELECTIONS_FILE = "selections.json"


def default_manifest_path():
    root = os.environ.get(DATA_ROOT_ENV)
    if not root:
        raise ValueError(
            f"no manifest given and {DATA_ROOT_ENV} is not set")
    return Path(root) / "manifest.json"


class SelectionBody(BaseModel):
    lower: float = Field(ge=0.0, le=1.0)
    upper: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _ordered(self):
        if self.lower > self.upper:
            raise ValueError(
                f"lower ({self.lower}) must not exceed upper ({self.upper})")
        return self


class AnnotationService:
    """Manifest-backed state shared by the endpoints.

    Error maps and histograms are cached per image id (inputs are immutable
    for the lifetime of a service). Selections live in memory until save is
    called, which persists the store and writes the mask file.
    """

    def __init__(self, manifest, masks_dir=None, store_path=None):
        self.manifest = manifest
        root = manifest.root or Path(".")
        self.masks_dir = Path(masks_dir) if masks_dir else root / "masks"
        store_path = Path(store_path) if store_path else root / SELECTIONS_FILE
        self.store = sasma.SelectionStore.load(store_path)
        self.write_lock = threading.Lock()
        self._cache = {}

    def entry(self, image_id):
        try:
            return self.manifest.get(image_id)
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"unknown image id {image_id!r}")

    def error_map(self, image_id):
        if image_id not in self._cache:
            entry = self.entry(image_id)
            image = io.load_image(entry.input_path)
            gt = io.load_image(entry.gt_path)
            try:
                err = sasma.error_map(image, gt)
            except ValueError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            self._cache[image_id] = err
        return self._cache[image_id]

    def selection_of(self, image_id):
        sel = self.store.get(image_id)
        if sel is not None:
            return sel
        entry = self.entry(image_id)
        if entry.selection:
            return sasma.ThresholdSelection.from_dict(entry.selection)
        return None


def create_app(manifest=None, masks_dir=None, store_path=None,
               frontend_dir=None):
    """Build the FastAPI app. manifest may be a DatasetManifest or a path;
    when omitted it is read from $SHADOWKIT_DATA_ROOT/manifest.json."""
    if manifest is None:
        manifest = default_manifest_path()
    if not isinstance(manifest, DatasetManifest):
        manifest = DatasetManifest.load(manifest)

    service = AnnotationService(manifest, masks_dir=masks_dir,
                                store_path=store_path)
    app = FastAPI(title="shadowkit annotation")
    app.state.service = service

    def png_response(data):
        return Response(content=data, media_type="image/png")

    @app.get("/api/images")
    def list_images():
        images = []
        for entry in service.manifest:
            sel = service.selection_of(entry.id)
            images.append({"id": entry.id,
                           "selection": sel.to_dict() if sel else None})
        return {"images": images}

    @app.get("/api/images/{image_id}/histogram")
    def histogram(image_id: str):
        hist = sasma.build_histogram(service.error_map(image_id))
        return {
            "bins": [int(c) for c in hist.counts],
            "bin_width": sasma.Histogram.bin_width,
            "peak": hist.peak,
            "proposed_lower": hist.proposed_lower,
            "proposed_upper": hist.proposed_upper,
        }

    @app.get("/api/images/{image_id}/pair")
    def pair(image_id: str):
        err = service.error_map(image_id)
        height, width = err.shape
        sel = service.selection_of(image_id)
        return {
            "id": image_id,
            "width": int(width),
            "height": int(height),
            "input_url": f"/api/images/{image_id}/input.png",
            "gt_url": f"/api/images/{image_id}/gt.png",
            "selection": sel.to_dict() if sel else None,
        }

    @app.get("/api/images/{image_id}/input.png")
    def input_png(image_id: str):
        entry = service.entry(image_id)
        return png_response(io.png_bytes(io.load_image(entry.input_path)))

    @app.get("/api/images/{image_id}/gt.png")
    def gt_png(image_id: str):
        entry = service.entry(image_id)
        return png_response(io.png_bytes(io.load_image(entry.gt_path)))

    @app.get("/api/images/{image_id}/mask")
    def mask_preview(image_id: str,
                     lower: float = Query(ge=0.0, le=1.0),
                     upper: float = Query(ge=0.0, le=1.0)):
        if lower > upper:
            raise HTTPException(
                status_code=422,
                detail=f"lower ({lower}) must not exceed upper ({upper})")
        sel = sasma.ThresholdSelection(lower, upper,
                                       source=sasma.SOURCE_HUMAN)
        mask = sasma.binarize(service.error_map(image_id), sel)
        return png_response(io.mask_png_bytes(mask))

    @app.post("/api/images/{image_id}/selection")
    def set_selection(image_id: str, body: SelectionBody):
        service.entry(image_id)
        sel = sasma.ThresholdSelection(body.lower, body.upper,
                                       source=sasma.SOURCE_HUMAN)
        with service.write_lock:
            service.store.set(image_id, sel)
            log.info("selection %s <- [%.4f, %.4f]", image_id,
                     sel.lower, sel.upper)
        return {"id": image_id, "selection": sel.to_dict(), "saved": False}

    @app.post("/api/images/{image_id}/save")
    def save(image_id: str):
        service.entry(image_id)
        sel = service.selection_of(image_id)
        if sel is None:
            hist = sasma.build_histogram(service.error_map(image_id))
            sel = hist.to_selection()
            if sel is None:
                raise HTTPException(
                    status_code=409,
                    detail=f"no selection or proposal for {image_id!r}")
        mask = sasma.binarize(service.error_map(image_id), sel)
        with service.write_lock:
            service.store.set(image_id, sel)
            self_path = service.store.path
            service.store.save(self_path)
            mask_path = io.save_mask(service.masks_dir / f"{image_id}.png",
                                     mask)
            log.info("saved %s: mask %s, selections %s", image_id,
                     mask_path, self_path)
        return {"id": image_id, "selection": sel.to_dict(), "saved": True,
                "mask_path": str(mask_path),
                "mask_pixels": int(np.sum(mask))}

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True),
                  name="frontend")

    return app


def serve_annotation(manifest=None, port=8000, host="127.0.0.1",
                     masks_dir=None, store_path=None, frontend_dir=None):
    """Run the annotation service until interrupted."""
    import uvicorn

    app = create_app(manifest, masks_dir=masks_dir, store_path=store_path,
                     frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port)
