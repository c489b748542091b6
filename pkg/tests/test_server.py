"""Annotation HTTP API, exercised through the in-process test client."""

import json

import numpy as np
import pytest
from conftest import write_dataset
from fastapi.testclient import TestClient

from shadowkit import io, sasma
from shadowkit.server import create_app


@pytest.fixture
def service(tmp_path):
    manifest, truths = write_dataset(tmp_path / "data", n_pairs=3, seed=41,
                                     misalign=False, photo=False)
    app = create_app(manifest,
                     masks_dir=tmp_path / "masks",
                     store_path=tmp_path / "selections.json")
    return TestClient(app), tmp_path, manifest


class TestListing:
    def test_images_in_manifest_order(self, service):
        client, _, manifest = service
        payload = client.get("/api/images").json()
        assert [img["id"] for img in payload["images"]] == manifest.ids()
        assert all(img["selection"] is None for img in payload["images"])

    def test_unknown_id_is_404(self, service):
        client, _, _ = service
        for url in ("/api/images/nope/histogram", "/api/images/nope/pair",
                    "/api/images/nope/input.png"):
            assert client.get(url).status_code == 404
        assert client.post("/api/images/nope/selection",
                           json={"lower": 0.1, "upper": 0.2}).status_code == 404
        assert client.post("/api/images/nope/save").status_code == 404


class TestHistogram:
    def test_histogram_payload(self, service):
        client, _, manifest = service
        image_id = manifest.ids()[0]
        payload = client.get(f"/api/images/{image_id}/histogram").json()
        assert len(payload["bins"]) == 256
        assert payload["bin_width"] == pytest.approx(1 / 256)
        entry = manifest.get(image_id)
        err = sasma.error_map(io.load_image(entry.input_path),
                              io.load_image(entry.gt_path))
        hist = sasma.build_histogram(err)
        assert payload["bins"] == [int(c) for c in hist.counts]
        assert payload["peak"] == hist.peak
        assert payload["proposed_lower"] == pytest.approx(hist.proposed_lower)
        assert payload["proposed_upper"] == pytest.approx(hist.proposed_upper)

    def test_pair_payload(self, service):
        client, _, manifest = service
        image_id = manifest.ids()[0]
        payload = client.get(f"/api/images/{image_id}/pair").json()
        assert payload["id"] == image_id
        assert (payload["height"], payload["width"]) == (96, 128)
        for key in ("input_url", "gt_url"):
            png = client.get(payload[key])
            assert png.status_code == 200
            assert png.headers["content-type"] == "image/png"

    def test_served_input_bytes_match_encoder(self, service):
        client, _, manifest = service
        entry = manifest.get(manifest.ids()[0])
        served = client.get(f"/api/images/{entry.id}/input.png").content
        assert served == io.png_bytes(io.load_image(entry.input_path))


class TestMaskPreview:
    def test_preview_matches_binarize_bytes(self, service):
        client, _, manifest = service
        entry = manifest.get(manifest.ids()[0])
        err = sasma.error_map(io.load_image(entry.input_path),
                              io.load_image(entry.gt_path))
        sel = sasma.build_histogram(err).to_selection()
        resp = client.get(f"/api/images/{entry.id}/mask",
                          params={"lower": sel.lower, "upper": sel.upper})
        assert resp.status_code == 200
        expected = sasma.binarize(err, sel)
        assert resp.content == io.mask_png_bytes(expected)

    def test_inverted_interval_is_422(self, service):
        client, _, manifest = service
        image_id = manifest.ids()[0]
        resp = client.get(f"/api/images/{image_id}/mask",
                          params={"lower": 0.6, "upper": 0.2})
        assert resp.status_code == 422

    def test_out_of_range_is_422(self, service):
        client, _, manifest = service
        image_id = manifest.ids()[0]
        resp = client.get(f"/api/images/{image_id}/mask",
                          params={"lower": -0.1, "upper": 0.2})
        assert resp.status_code == 422


class TestSelectionLifecycle:
    def test_selection_then_save_persists(self, service):
        client, tmp_path, manifest = service
        image_id = manifest.ids()[1]
        resp = client.post(f"/api/images/{image_id}/selection",
                           json={"lower": 0.15, "upper": 0.6})
        assert resp.status_code == 200
        body = resp.json()
        assert body["saved"] is False
        assert body["selection"]["source"] == sasma.SOURCE_HUMAN
        # in memory only so far
        assert not (tmp_path / "selections.json").exists()
        # listing reflects the pending selection
        images = {img["id"]: img for img in
                  client.get("/api/images").json()["images"]}
        assert images[image_id]["selection"]["lower"] == pytest.approx(0.15)

        resp = client.post(f"/api/images/{image_id}/save")
        assert resp.status_code == 200
        body = resp.json()
        assert body["saved"] is True
        store = sasma.SelectionStore.load(tmp_path / "selections.json")
        assert store.get(image_id).upper == pytest.approx(0.6)
        mask = io.load_mask(tmp_path / "masks" / f"{image_id}.png")
        assert mask.sum() == body["mask_pixels"]

    def test_inverted_selection_body_is_422(self, service):
        client, _, manifest = service
        image_id = manifest.ids()[0]
        resp = client.post(f"/api/images/{image_id}/selection",
                           json={"lower": 0.7, "upper": 0.3})
        assert resp.status_code == 422

    def test_save_without_selection_falls_back_to_proposal(self, service):
        client, tmp_path, manifest = service
        image_id = manifest.ids()[0]
        resp = client.post(f"/api/images/{image_id}/save")
        assert resp.status_code == 200
        assert resp.json()["selection"]["source"] == sasma.SOURCE_PROPOSED
        assert (tmp_path / "masks" / f"{image_id}.png").exists()

    def test_save_without_any_proposal_is_409(self, tmp_path):
        # identical pair: error map is all zeros, no histogram peak
        (tmp_path / "input").mkdir()
        (tmp_path / "gt").mkdir()
        rng = np.random.default_rng(0)
        img = rng.random((32, 32, 3))
        io.save_png(tmp_path / "input" / "flat.png", img)
        io.save_png(tmp_path / "gt" / "flat.png", img)
        manifest_path = tmp_path / "manifest.json"
        manifest_path.write_text(json.dumps({"entries": [
            {"id": "flat", "input_path": "input/flat.png",
             "gt_path": "gt/flat.png"}]}))
        app = create_app(manifest_path, masks_dir=tmp_path / "masks",
                         store_path=tmp_path / "selections.json")
        client = TestClient(app)
        assert client.post("/api/images/flat/save").status_code == 409


class TestDataRootEnv:
    def test_manifest_from_env(self, tmp_path, monkeypatch):
        manifest, _ = write_dataset(tmp_path, n_pairs=1, seed=43,
                                    misalign=False, photo=False)
        monkeypatch.setenv("SHADOWKIT_DATA_ROOT", str(tmp_path))
        app = create_app()
        client = TestClient(app)
        ids = [img["id"] for img in
               client.get("/api/images").json()["images"]]
        assert ids == manifest.ids()

    def test_missing_env_is_error(self, monkeypatch):
        monkeypatch.delenv("SHADOWKIT_DATA_ROOT", raising=False)
        with pytest.raises(ValueError, match="SHADOWKIT_DATA_ROOT"):
            create_app()
