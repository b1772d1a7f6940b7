"""Score a directory of super-resolved images against ground truth."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from cyclesr.core.config import EvalProtocol
from cyclesr.imaging.image import list_images, load_image
from cyclesr.imaging.metrics import EvalResult, shift_tolerant_score

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["image_id", "psnr_db", "ssim", "dx", "dy"]


def pair_by_stem(sr_dir: Path, hr_dir: Path) -> list[tuple[str, Path, Path]]:
    """Match files of the two directories by file stem."""
    sr_files = {p.stem: p for p in list_images(sr_dir)}
    hr_files = {p.stem: p for p in list_images(hr_dir)}
    missing = sorted(set(sr_files) - set(hr_files))
    if missing:
        raise ValueError(f"No ground truth for: {missing}")
    if not sr_files:
        raise ValueError(f"No images found in {sr_dir}")
    return [(stem, sr_files[stem], hr_files[stem]) for stem in sorted(sr_files)]


def score_pair(sr_path: Path, hr_path: Path, protocol: EvalProtocol) -> EvalResult:
    sr, hr = load_image(sr_path), load_image(hr_path)
    return shift_tolerant_score(sr, hr, protocol.max_shift, protocol.border, protocol.center_crop)


def evaluate_directories(
    sr_dir: Path,
    hr_dir: Path,
    protocol: EvalProtocol,
    workers: int = 4,
) -> list[tuple[str, EvalResult]]:
    """Per-image shift-tolerant scores, in image-id order."""
    pairs = pair_by_stem(sr_dir, hr_dir)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda p: score_pair(p[1], p[2], protocol), pairs))
    logger.info("Scored %d images from %s", len(results), sr_dir)
    return [(image_id, result) for (image_id, _, _), result in zip(pairs, results)]


def aggregate(results: list[tuple[str, EvalResult]]) -> tuple[float, float]:
    """Mean PSNR and SSIM."""
    if not results:
        raise ValueError("Nothing to aggregate")
    return (
        float(np.mean([r.psnr for _, r in results])),
        float(np.mean([r.ssim for _, r in results])),
    )


def write_csv(results: list[tuple[str, EvalResult]], path: Path) -> tuple[float, float]:
    """Write one row per image plus a final ``mean`` row; returns the means."""
    mean_psnr, mean_ssim = aggregate(results)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for image_id, result in results:
            writer.writerow(result.to_row(image_id))
        writer.writerow({"image_id": "mean", "psnr_db": mean_psnr, "ssim": mean_ssim, "dx": "", "dy": ""})
    return mean_psnr, mean_ssim


def plot_scores(results: list[tuple[str, EvalResult]], path: Path) -> None:
    """Static histogram figure of per-image PSNR and SSIM."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_psnr, ax_ssim) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_psnr.hist([r.psnr for _, r in results], bins=20, color="tab:blue")
    ax_psnr.set_xlabel("PSNR (dB)")
    ax_psnr.set_ylabel("images")
    ax_ssim.hist([r.ssim for _, r in results], bins=20, color="tab:orange")
    ax_ssim.set_xlabel("SSIM")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
