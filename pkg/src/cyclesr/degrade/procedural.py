"""Deterministic procedural HR images for desk-scale corpora."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from cyclesr.imaging.image import ImageTensor, save_image

logger = logging.getLogger(__name__)


def _gradient(rng: np.random.Generator, yy: np.ndarray, xx: np.ndarray) -> ImageTensor:
    angle = rng.uniform(0, 2 * np.pi)
    t = np.cos(angle) * xx + np.sin(angle) * yy
    t = (t - t.min()) / max(t.max() - t.min(), 1e-12)
    c0, c1 = rng.uniform(0, 1, size=(2, 3, 1, 1))
    return c0 + (c1 - c0) * t[None]


def _paint(canvas: ImageTensor, mask: np.ndarray, color: np.ndarray, alpha: float) -> None:
    canvas[:] = np.where(mask[None], (1 - alpha) * canvas + alpha * color[:, None, None], canvas)


def procedural_image(size: int, rng: np.random.Generator) -> ImageTensor:
    """One (3, size, size) image: gradient background, shapes, stripes and texture."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) / size
    img = _gradient(rng, yy, xx)

    for _ in range(rng.integers(2, 6)):
        color = rng.uniform(0, 1, size=3)
        alpha = rng.uniform(0.5, 1.0)
        if rng.random() < 0.5:
            y0, x0 = rng.uniform(0, 0.8, size=2)
            h, w = rng.uniform(0.1, 0.5, size=2)
            mask = (yy >= y0) & (yy < y0 + h) & (xx >= x0) & (xx < x0 + w)
        else:
            cy, cx = rng.uniform(0.1, 0.9, size=2)
            ry, rx = rng.uniform(0.05, 0.3, size=2)
            mask = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
        _paint(img, mask, color, alpha)

    if rng.random() < 0.6:
        freq = rng.uniform(4, 16)
        angle = rng.uniform(0, np.pi)
        phase = np.sin(2 * np.pi * freq * (np.cos(angle) * xx + np.sin(angle) * yy))
        stripes = phase > 0
        y0, x0 = rng.uniform(0, 0.5, size=2)
        region = (yy >= y0) & (yy < y0 + 0.5) & (xx >= x0) & (xx < x0 + 0.5)
        _paint(img, stripes & region, rng.uniform(0, 1, size=3), rng.uniform(0.3, 0.8))

    texture = gaussian_filter(rng.normal(0, 1, size=(size, size)), sigma=rng.uniform(0.5, 2.0))
    texture /= max(np.abs(texture).max(), 1e-12)
    img = img + rng.uniform(0.02, 0.08) * texture[None]
    return np.clip(img, 0.0, 1.0)


def generate_procedural_hr(out_dir: Path, count: int, size: int, seed: int) -> list[Path]:
    """Write ``count`` PNGs named img_0000.png ... into ``out_dir``."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if size < 8:
        raise ValueError(f"size must be >= 8, got {size}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    root = np.random.SeedSequence(seed)
    paths = []
    for index, child in enumerate(root.spawn(count)):
        path = out_dir / f"img_{index:04d}.png"
        save_image(procedural_image(size, np.random.default_rng(child)), path)
        paths.append(path)
    logger.info("Generated %d procedural %dx%d images in %s", count, size, size, out_dir)
    return paths
