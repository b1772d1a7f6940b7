"""Tests for image I/O, resampling and normalization."""

import cv2
import numpy as np
import pytest
import torch
from PIL import Image

from cyclesr.imaging.image import (
    _cubic,
    bicubic_resample,
    check_image,
    from_tensor,
    list_images,
    load_image,
    normalize_to_reference,
    quantize,
    reflect_index,
    resample,
    save_image,
    to_tensor,
)


class TestImageIO:
    def test_save_load_is_bit_exact(self, tmp_dir, rng):
        img = rng.integers(0, 256, size=(3, 17, 23)) / 255.0
        save_image(img, tmp_dir / "a.png")
        back = load_image(tmp_dir / "a.png")
        assert back.shape == (3, 17, 23)
        np.testing.assert_array_equal(quantize(back), quantize(img))
        np.testing.assert_allclose(back, img, atol=1e-12)

    def test_grayscale_broadcast(self, tmp_dir):
        Image.fromarray(np.full((5, 4), 128, np.uint8), mode="L").save(tmp_dir / "g.png")
        img = load_image(tmp_dir / "g.png")
        assert img.shape == (3, 5, 4)
        np.testing.assert_allclose(img, 128 / 255)

    def test_sixteen_bit(self, tmp_dir):
        Image.fromarray(np.full((4, 4), 65535, np.uint16)).save(tmp_dir / "d.png")
        np.testing.assert_allclose(load_image(tmp_dir / "d.png"), 1.0)

    def test_sixteen_bit_rgb_keeps_precision(self, tmp_dir):
        rgb = np.arange(3 * 4 * 5, dtype=np.uint16).reshape(4, 5, 3) * 1001 + 1
        assert cv2.imwrite(str(tmp_dir / "rgb16.png"), np.ascontiguousarray(rgb[:, :, ::-1]))
        img = load_image(tmp_dir / "rgb16.png")
        assert img.shape == (3, 4, 5)
        np.testing.assert_allclose(img, rgb.transpose(2, 0, 1) / 65535.0, atol=1e-12)

    def test_sixteen_bit_rgba_drops_alpha(self, tmp_dir):
        rgba = np.full((3, 3, 4), 40000, np.uint16)
        rgba[..., 0] = 257
        assert cv2.imwrite(str(tmp_dir / "rgba16.png"), np.ascontiguousarray(rgba[:, :, [2, 1, 0, 3]]))
        img = load_image(tmp_dir / "rgba16.png")
        np.testing.assert_allclose(img[0], 257 / 65535.0)
        np.testing.assert_allclose(img[1:], 40000 / 65535.0)

    def test_missing_file(self, tmp_dir):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_dir / "nope.png")

    def test_undecodable_file(self, tmp_dir):
        (tmp_dir / "bad.png").write_bytes(b"not an image")
        with pytest.raises(ValueError, match="Cannot decode"):
            load_image(tmp_dir / "bad.png")

    def test_quantize_clamps_and_rounds_half_up(self):
        img = np.array([-0.5, 0.5, 0.25, 2.0]).reshape(1, 1, 4).repeat(3, axis=0)
        assert quantize(img)[0, :, 0].tolist() == [0, 128, 64, 255]

    def test_list_images_sorted_and_filtered(self, tmp_dir):
        for name in ("b.png", "a.bmp", "notes.txt"):
            (tmp_dir / name).write_bytes(b"")
        assert [p.name for p in list_images(tmp_dir)] == ["a.bmp", "b.png"]

    def test_check_image_rejects_nan(self):
        img = np.zeros((3, 2, 2))
        img[0, 0, 0] = np.nan
        with pytest.raises(ValueError, match="NaN"):
            check_image(img)

    def test_check_image_rejects_wrong_layout(self):
        with pytest.raises(ValueError, match=r"\(3, H, W\)"):
            check_image(np.zeros((4, 4, 3)))


class TestResample:
    def test_identity_scale(self, rng):
        img = rng.random((3, 9, 7))
        np.testing.assert_array_equal(resample(img, 1), img)

    def test_output_size_floors(self, rng):
        assert bicubic_resample(rng.random((3, 10, 7)), 0.5).shape == (3, 5, 3)
        assert bicubic_resample(rng.random((3, 5, 3)), 4).shape == (3, 20, 12)

    def test_degenerate_output(self, rng):
        with pytest.raises(ValueError, match="degenerate"):
            resample(rng.random((3, 2, 2)), 0.25)

    def test_constant_preserved(self):
        img = np.full((3, 12, 12), 0.3)
        for scale in (0.25, 0.5, 2, 4):
            np.testing.assert_allclose(bicubic_resample(img, scale), 0.3, atol=1e-12)

    def test_matches_kernel_sum_on_ramp(self):
        n = 16
        ramp = np.tile(np.arange(n, dtype=np.float64) / n, (3, 1, 1))
        out = bicubic_resample(ramp, 0.5)[0, 0]

        expected = []
        for i in range(n // 2):
            center = (i + 0.5) * 2 - 0.5
            taps = np.arange(int(np.floor(center - 4)), int(np.ceil(center + 4)) + 1)
            w = _cubic((center - taps) * 0.5)
            w = w / w.sum()
            values = ramp[0, 0, reflect_index(taps, n)]
            expected.append(float(np.dot(w, values)))
        np.testing.assert_allclose(out, expected, atol=1e-6)

    def test_reflect_index(self):
        assert reflect_index(np.array([-2, -1, 0, 3, 4, 5]), 4).tolist() == [2, 1, 0, 3, 2, 1]
        assert reflect_index(np.array([-3, 5]), 1).tolist() == [0, 0]

    def test_nearest(self):
        img = np.arange(16, dtype=np.float64).reshape(1, 4, 4).repeat(3, axis=0)
        out = resample(img, 0.5, "nearest")
        assert out[0].tolist() == [[5.0, 7.0], [13.0, 15.0]]

    def test_unknown_method(self, rng):
        with pytest.raises(ValueError, match="Unknown resampling"):
            resample(rng.random((3, 4, 4)), 2, "lanczos")


class TestNormalize:
    def test_matches_reference_statistics(self, rng):
        img = rng.random((3, 20, 20)) * 0.2
        ref = rng.random((3, 20, 20)) * 0.7 + 0.1
        out = normalize_to_reference(img, ref)
        np.testing.assert_allclose(out.mean(axis=(1, 2)), ref.mean(axis=(1, 2)), atol=1e-9)
        np.testing.assert_allclose(out.std(axis=(1, 2)), ref.std(axis=(1, 2)), atol=1e-9)

    def test_constant_input_takes_reference_mean(self, rng):
        ref = rng.random((3, 8, 8))
        out = normalize_to_reference(np.full((3, 8, 8), 0.4), ref)
        np.testing.assert_allclose(out[1], ref[1].mean())

    def test_constant_reference_rejected(self, rng):
        with pytest.raises(ValueError, match="near-constant"):
            normalize_to_reference(rng.random((3, 8, 8)), np.full((3, 8, 8), 0.5))


class TestTensorInterop:
    def test_to_and_from_tensor(self, rng):
        img = rng.random((3, 5, 6))
        t = to_tensor(img)
        assert t.shape == (1, 3, 5, 6)
        assert t.dtype == torch.float32
        np.testing.assert_allclose(from_tensor(t), img, atol=1e-6)

    def test_from_tensor_rejects_batches(self):
        with pytest.raises(ValueError, match="single-image"):
            from_tensor(torch.zeros(2, 3, 4, 4))
