"""Tests for corpus synthesis, procedural images and manifest loading."""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from cyclesr.core.config import DegradationSpec, ShiftSpec
from cyclesr.data.manifest import load_manifest
from cyclesr.degrade.corpus import (
    MANIFEST_NAME,
    CorpusManifest,
    ManifestEntry,
    image_rng,
    split_ids,
    synthesize_corpus,
)
from cyclesr.degrade.pipeline import apply_shift, downsample
from cyclesr.degrade.procedural import generate_procedural_hr, procedural_image
from cyclesr.imaging.image import load_image, save_image
from tests.conftest import TINY_IMAGES, tiny_degradation


class TestProcedural:
    def test_image_in_range(self, rng):
        img = procedural_image(32, rng)
        assert img.shape == (3, 32, 32)
        assert img.min() >= 0.0 and img.max() <= 1.0
        assert img.std() > 0.01

    def test_generation_is_deterministic(self, tmp_dir):
        a = generate_procedural_hr(tmp_dir / "a", 3, 24, seed=5)
        b = generate_procedural_hr(tmp_dir / "b", 3, 24, seed=5)
        assert [p.name for p in a] == ["img_0000.png", "img_0001.png", "img_0002.png"]
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()

    def test_invalid_arguments(self, tmp_dir):
        with pytest.raises(ValueError, match="count"):
            generate_procedural_hr(tmp_dir, 0, 24, seed=0)
        with pytest.raises(ValueError, match="size"):
            generate_procedural_hr(tmp_dir, 1, 4, seed=0)


class TestSplit:
    def test_first_half_is_hr_domain(self):
        roles = split_ids(["d", "a", "c", "b", "e"])
        assert [k for k, v in sorted(roles.items()) if v == "hr_domain"] == ["a", "b", "c"]
        assert [k for k, v in sorted(roles.items()) if v == "lr_domain"] == ["d", "e"]

    def test_image_rng_independent_of_order(self):
        a = image_rng(1, "img_0003").random(4)
        image_rng(1, "img_0001").random(10)
        b = image_rng(1, "img_0003").random(4)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, image_rng(2, "img_0003").random(4))


class TestSynthesize:
    def test_layout_and_manifest(self, corpus_dir):
        manifest = CorpusManifest.read(corpus_dir / MANIFEST_NAME)
        assert len(manifest.entries) == TINY_IMAGES
        assert len(manifest.ids_with_role("hr_domain")) == TINY_IMAGES // 2
        assert len(manifest.ids_with_role("lr_domain")) == TINY_IMAGES // 2
        for entry in manifest.entries:
            assert load_image(corpus_dir / entry.hr).shape == (3, 64, 64)
            assert load_image(corpus_dir / entry.lr_syn).shape == (3, 16, 16)
            assert load_image(corpus_dir / entry.lr_real).shape == (3, 16, 16)

    def test_lr_syn_is_clean_bicubic(self, corpus_dir):
        manifest = CorpusManifest.read(corpus_dir / MANIFEST_NAME)
        entry = manifest.entries[0]
        hr = load_image(corpus_dir / entry.hr)
        expected = np.floor(np.clip(downsample(hr, 4), 0, 1) * 255 + 0.5) / 255
        np.testing.assert_allclose(load_image(corpus_dir / entry.lr_syn), expected, atol=1e-12)

    def test_rerun_is_byte_identical(self, hr_dir, corpus_dir, tmp_dir):
        again = tmp_dir / "again"
        synthesize_corpus(hr_dir, tiny_degradation(), again, seed=3, workers=3)
        assert (again / MANIFEST_NAME).read_bytes() == (corpus_dir / MANIFEST_NAME).read_bytes()
        for sub in ("hr", "lr_syn", "lr_real"):
            for path in sorted((corpus_dir / sub).iterdir()):
                assert (again / sub / path.name).read_bytes() == path.read_bytes()

    def test_records_drawn_shift(self, hr_dir, tmp_dir):
        # no blur or noise: lr_real is exactly lr_syn translated by the recorded shift
        out = tmp_dir / "shifted"
        manifest = synthesize_corpus(hr_dir, DegradationSpec(scale=4, shift=ShiftSpec(max=2)), out, seed=3)
        shifts = [entry.shift for entry in manifest.entries]
        assert all(0 <= dx <= 2 and 0 <= dy <= 2 for dx, dy in shifts)
        assert CorpusManifest.read(out / MANIFEST_NAME).entries[0].shift == shifts[0]
        for entry in manifest.entries:
            lr_syn = load_image(out / entry.lr_syn)
            np.testing.assert_array_equal(apply_shift(lr_syn, *entry.shift), load_image(out / entry.lr_real))

    def test_other_seed_changes_real_lr(self, hr_dir, corpus_dir, tmp_dir):
        other = tmp_dir / "other"
        synthesize_corpus(hr_dir, tiny_degradation(), other, seed=4)
        name = sorted((corpus_dir / "lr_real").iterdir())[0].name
        assert (other / "lr_real" / name).read_bytes() != (corpus_dir / "lr_real" / name).read_bytes()

    def test_needs_two_images(self, tmp_dir, rng):
        save_image(rng.random((3, 16, 16)), tmp_dir / "hr" / "only.png")
        with pytest.raises(ValueError, match="at least 2"):
            synthesize_corpus(tmp_dir / "hr", DegradationSpec(), tmp_dir / "out", seed=0)

    def test_duplicate_stems(self, tmp_dir, rng):
        save_image(rng.random((3, 16, 16)), tmp_dir / "hr" / "x.png")
        save_image(rng.random((3, 16, 16)), tmp_dir / "hr" / "x.bmp")
        with pytest.raises(ValueError, match="Duplicate image stems"):
            synthesize_corpus(tmp_dir / "hr", DegradationSpec(), tmp_dir / "out", seed=0)

    def test_indivisible_images_named(self, tmp_dir, rng):
        save_image(rng.random((3, 16, 16)), tmp_dir / "hr" / "good.png")
        save_image(rng.random((3, 18, 16)), tmp_dir / "hr" / "odd.png")
        with pytest.raises(ValueError, match="odd.png"):
            synthesize_corpus(tmp_dir / "hr", DegradationSpec(), tmp_dir / "out", seed=0)


class TestManifest:
    def _spec(self):
        return DegradationSpec().model_dump(mode="json")

    def test_id_in_both_splits(self):
        entries = [
            {"id": "a", "role": "hr_domain", "hr": "hr/a.png", "lr_syn": "lr_syn/a.png"},
            {"id": "a", "role": "lr_domain", "lr_real": "lr_real/a.png"},
        ]
        with pytest.raises(ValidationError, match="both the HR and LR splits"):
            CorpusManifest(seed=0, degradation=self._spec(), entries=entries)

    def test_lr_syn_without_hr(self):
        entry = ManifestEntry(id="a", role="hr_domain", lr_syn="lr_syn/a.png")
        with pytest.raises(ValidationError, match="no paired hr"):
            CorpusManifest(seed=0, degradation=self._spec(), entries=[entry])

    def test_load_reports_missing_files(self, corpus_dir):
        manifest = json.loads((corpus_dir / MANIFEST_NAME).read_text())
        victim = manifest["entries"][0]["lr_syn"]
        (corpus_dir / victim).unlink()
        with pytest.raises(ValueError, match="missing files"):
            load_manifest(corpus_dir / MANIFEST_NAME)

    def test_load_missing_manifest(self, tmp_dir):
        with pytest.raises(FileNotFoundError):
            load_manifest(tmp_dir / MANIFEST_NAME)

    def test_dataset_views(self, corpus):
        assert corpus.scale == 4
        assert len(corpus.hr_ids) == 3 and len(corpus.lr_ids) == 3
        assert corpus.has_paired_real
        assert corpus.validation_ids() == corpus.lr_ids
        assert len(corpus.validation_ids(all_entries=True)) == TINY_IMAGES
        image_id, lr, hr = corpus.validation_pairs()[0]
        assert lr.shape == (3, 16, 16) and hr.shape == (3, 64, 64)
        assert corpus.hr(image_id) is hr

    def test_lr_gap_is_positive(self, corpus):
        assert corpus.mean_abs_lr_gap() > 0.0

    def test_unknown_id(self, corpus):
        with pytest.raises(ValueError, match="Unknown image id"):
            corpus.hr("nope")

    def test_split_drives_domains(self, corpus):
        split = corpus.manifest.split
        assert sorted(split) == sorted(e.id for e in corpus.manifest.entries)
        assert corpus.hr_ids == [i for i, role in split.items() if role == "hr_domain"]
        assert corpus.lr_ids == [i for i, role in split.items() if role == "lr_domain"]
        assert [i for i, _ in corpus.manifest.hr_entries] == sorted(split)

    def test_unrecorded_shift_defaults_to_zero(self, corpus_dir):
        manifest = json.loads((corpus_dir / MANIFEST_NAME).read_text())
        for entry in manifest["entries"]:
            entry.pop("shift")
        (corpus_dir / MANIFEST_NAME).write_text(json.dumps(manifest))
        corpus = load_manifest(corpus_dir / MANIFEST_NAME)
        assert corpus.shift(corpus.hr_ids[0]) == (0, 0)
