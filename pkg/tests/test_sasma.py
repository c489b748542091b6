"""Error maps, histogram proposals, binarization, and batch annotation."""

import json

import numpy as np
import pytest

from conftest import mask_iou, shadow_scene, write_dataset
from shadowkit import io
from shadowkit.imaging import v_channel
from shadowkit.sasma import (N_BINS, PEAK_MIN_BIN, SelectionStore,
                             ThresholdSelection, annotate_batch,
                             annotate_pair, binarize, build_histogram,
                             error_map)


class TestErrorMap:
    def test_identical_images_zero(self, rng):
        img = rng.random((10, 12, 3))
        assert np.all(error_map(img, img) == 0.0)

    def test_constant_shadow_region(self, rng):
        gt = rng.random((20, 20, 3)) * 0.5 + 0.2
        shadowed = gt.copy()
        shadowed[5:15, 5:15] -= 0.15
        err = error_map(shadowed, gt)
        inside = err[5:15, 5:15]
        outside = np.delete(err.ravel(), [i * 20 + j for i in range(5, 15)
                                          for j in range(5, 15)])
        assert np.allclose(inside, 0.15, atol=1e-12)
        assert np.all(outside == 0.0)

    def test_matches_v_channel_difference(self, rng):
        a, b = rng.random((8, 9, 3)), rng.random((8, 9, 3))
        expected = np.abs(v_channel(a) - v_channel(b))
        assert np.array_equal(error_map(a, b), expected)

    def test_symmetry(self, rng):
        a, b = rng.random((8, 9, 3)), rng.random((8, 9, 3))
        assert np.array_equal(error_map(a, b), error_map(b, a))

    def test_gray_planes_accepted(self, rng):
        a, b = rng.random((8, 9)), rng.random((8, 9))
        assert np.array_equal(error_map(a, b), np.abs(a - b))

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            error_map(rng.random((8, 9, 3)), rng.random((9, 8, 3)))


class TestBuildHistogram:
    def test_all_zero_plane_no_proposal(self):
        hist = build_histogram(np.zeros((30, 40)))
        assert hist.counts[0] == 1200
        assert hist.counts[1:].sum() == 0
        assert hist.peak == -1 and hist.lower == -1 and hist.upper == -1
        assert not hist.has_proposal
        assert hist.to_selection() is None

    def test_bimodal_proposal_brackets_shadow_mode(self, rng):
        err = np.where(rng.random(10000) < 0.8,
                       rng.normal(0.01, 0.002, 10000),
                       rng.normal(0.40, 0.002, 10000))
        hist = build_histogram(np.clip(np.abs(err), 0, 1).reshape(100, 100))
        assert abs(hist.peak - 102) <= 2
        assert hist.proposed_lower <= 0.40 <= hist.proposed_upper

    def test_count_conservation(self, rng):
        err = rng.random((37, 53))
        hist = build_histogram(err)
        assert hist.counts.sum() == 37 * 53

    def test_peak_between_bounds(self, rng):
        for seed in range(5):
            shadowed, gt, _, _ = shadow_scene(seed)
            hist = build_histogram(error_map(shadowed, gt))
            assert hist.has_proposal
            assert hist.lower <= hist.peak <= hist.upper

    def test_near_zero_mass_excluded_from_peak_search(self):
        # 99% of pixels in the lowest bins must not become the peak
        err = np.concatenate([np.full(9900, 0.01), np.full(100, 0.3)])
        hist = build_histogram(err.reshape(100, 100))
        assert hist.peak == int(0.3 * N_BINS)
        assert hist.peak >= PEAK_MIN_BIN


class TestBinarize:
    def test_full_range_all_ones(self, rng):
        err = rng.random((10, 10))
        mask = binarize(err, ThresholdSelection(0.0, 1.0))
        assert np.all(mask == 1)

    def test_empty_interval_all_zeros(self, rng):
        err = (rng.random((10, 10)) * 0.4).round(2)  # no value is exactly 0.5
        mask = binarize(err, ThresholdSelection(0.5, 0.5))
        assert np.all(mask == 0)

    def test_bounds_inclusive(self):
        err = np.array([[0.2, 0.3, 0.4, 0.5]])
        mask = binarize(err, ThresholdSelection(0.3, 0.4))
        assert np.array_equal(mask, [[0, 1, 1, 0]])

    def test_widening_never_removes_pixels(self, rng):
        err = rng.random((40, 40))
        lower, upper = 0.4, 0.6
        base = binarize(err, ThresholdSelection(lower, upper))
        for _ in range(50):
            wide_lo = lower - rng.uniform(0, lower)
            wide_up = upper + rng.uniform(0, 1 - upper)
            wide = binarize(err, ThresholdSelection(wide_lo, wide_up))
            assert np.all(wide[base == 1] == 1)

    def test_proposal_on_synthetic_shadow(self):
        shadowed, gt, true_mask, _ = shadow_scene(seed=7, delta=0.35)
        err = error_map(shadowed, gt)
        sel = build_histogram(err).to_selection()
        mask = binarize(err, sel)
        assert mask_iou(mask, true_mask) >= 0.95

    def test_cleanup_removes_speckle_and_fills_holes(self):
        err = np.zeros((20, 20))
        err[5:15, 5:15] = 0.4  # solid block
        err[8, 8] = 0.0        # pinhole inside
        err[2, 2] = 0.4        # isolated speckle
        sel = ThresholdSelection(0.3, 0.5)
        raw = binarize(err, sel)
        assert raw[2, 2] == 1 and raw[8, 8] == 0
        clean = binarize(err, sel, cleanup=True)
        assert clean[2, 2] == 0 and clean[8, 8] == 1


class TestThresholdSelection:
    def test_validation(self):
        with pytest.raises(ValueError):
            ThresholdSelection(0.6, 0.4)
        with pytest.raises(ValueError):
            ThresholdSelection(-0.1, 0.4)
        with pytest.raises(ValueError):
            ThresholdSelection(0.5, 1.2)

    def test_dict_round_trip(self):
        sel = ThresholdSelection(0.2, 0.6, source="human-adjusted")
        assert ThresholdSelection.from_dict(sel.to_dict()) == sel


class TestSelectionStore:
    def test_round_trip(self, tmp_path):
        store = SelectionStore(path=tmp_path / "sel.json")
        store.set("a", ThresholdSelection(0.1, 0.3))
        store.set("b", ThresholdSelection(0.2, 0.4, source="human-adjusted"))
        store.save()
        loaded = SelectionStore.load(tmp_path / "sel.json")
        assert loaded.ids() == ["a", "b"]
        assert loaded.get("b").upper == 0.4
        assert "a" in loaded and len(loaded) == 2

    def test_missing_file_is_empty(self, tmp_path):
        store = SelectionStore.load(tmp_path / "nope.json")
        assert len(store) == 0


class TestAnnotate:
    def test_pair_uses_proposal_when_no_selection(self):
        shadowed, gt, true_mask, _ = shadow_scene(seed=3)
        mask, hist, sel = annotate_pair(shadowed, gt)
        assert sel is not None and sel.source == "proposed"
        assert mask_iou(mask, true_mask) >= 0.8

    def test_pair_selection_overrides_proposal(self):
        shadowed, gt, _, _ = shadow_scene(seed=3)
        narrow = ThresholdSelection(0.98, 1.0, source="human-adjusted")
        mask, _, sel = annotate_pair(shadowed, gt, selection=narrow)
        assert sel is narrow
        assert mask.sum() == 0

    def test_pair_no_proposal_zero_mask(self, rng):
        img = rng.random((20, 20, 3)) * 0.02  # error mass all near zero
        mask, hist, sel = annotate_pair(img, img)
        assert sel is None and mask.sum() == 0

    def test_batch_auto_proposals(self, tmp_path):
        manifest, truths = write_dataset(tmp_path / "data", n_pairs=4,
                                         seed=5, misalign=False)
        entries = [(e.id, e.input_path, e.gt_path) for e in manifest]
        report = annotate_batch(entries, tmp_path / "masks")
        assert not report.failures
        ious = []
        for image_id, mask_path in report.masks.items():
            mask = io.load_mask(mask_path)
            ious.append(mask_iou(mask, truths[image_id]["true_mask"]))
        assert np.mean(ious) >= 0.9
        prov = json.loads((tmp_path / "masks" / "provenance.json").read_text())
        assert set(prov) == {e.id for e in manifest}
        assert all(p["selection"]["source"] == "proposed"
                   for p in prov.values())

    def test_batch_override_isolation(self, tmp_path):
        manifest, _ = write_dataset(tmp_path / "data", n_pairs=3, seed=6,
                                    misalign=False)
        entries = [(e.id, e.input_path, e.gt_path) for e in manifest]
        auto = annotate_batch(entries, tmp_path / "auto")

        store = SelectionStore()
        store.set("scene001", ThresholdSelection(0.9, 1.0,
                                                 source="human-adjusted"))
        overridden = annotate_batch(entries, tmp_path / "over", store=store)
        for image_id in auto.masks:
            same = (auto.masks[image_id].read_bytes()
                    == overridden.masks[image_id].read_bytes())
            assert same == (image_id != "scene001")

    def test_batch_missing_file_reported(self, tmp_path):
        manifest, _ = write_dataset(tmp_path / "data", n_pairs=2, seed=7,
                                    misalign=False)
        entries = [(e.id, e.input_path, e.gt_path) for e in manifest]
        entries.append(("ghost", tmp_path / "no.png", tmp_path / "no2.png"))
        report = annotate_batch(entries, tmp_path / "masks")
        assert set(report.failures) == {"ghost"}
        assert len(report.masks) == 2

    def test_mask_determinism(self, tmp_path):
        shadowed, gt, _, _ = shadow_scene(seed=9)
        sel = ThresholdSelection(0.2, 0.6)
        m1, _, _ = annotate_pair(shadowed, gt, selection=sel)
        m2, _, _ = annotate_pair(shadowed, gt, selection=sel)
        assert io.mask_png_bytes(m1) == io.mask_png_bytes(m2)
