"""PSNR/SSIM and the misalignment-tolerant scoring protocol."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from cyclesr.imaging.image import ImageTensor

logger = logging.getLogger(__name__)

PSNR_CAP = 100.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
# gaussian_filter's radius is int(truncate * sigma + 0.5); 3.5 * 1.5 gives 5, i.e. an 11x11 window
_SSIM_TRUNCATE = 3.5


@dataclass(frozen=True)
class EvalResult:
    psnr: float
    ssim: float
    best_shift: tuple[int, int]  # (dx, dy)
    crop: int | None = None  # side actually compared when a center crop was requested
    border_ignored: int = 0

    def to_row(self, image_id: str) -> dict:
        dx, dy = self.best_shift
        return {"image_id": image_id, "psnr_db": self.psnr, "ssim": self.ssim, "dx": dx, "dy": dy}


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def psnr(a: ImageTensor, b: ImageTensor, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE), clamped to [0, PSNR_CAP]."""
    _check_pair(a, b)
    mse = float(np.mean((np.asarray(a, np.float64) - np.asarray(b, np.float64)) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    value = 10.0 * np.log10(peak * peak / mse)
    return float(min(max(value, 0.0), PSNR_CAP))


def _ssim_channel(x: np.ndarray, y: np.ndarray) -> float:
    blur = lambda z: gaussian_filter(z, SSIM_SIGMA, truncate=_SSIM_TRUNCATE)  # noqa: E731
    mu_x, mu_y = blur(x), blur(y)
    var_x = blur(x * x) - mu_x * mu_x
    var_y = blur(y * y) - mu_y * mu_y
    cov = blur(x * y) - mu_x * mu_y
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    pad = SSIM_WINDOW // 2
    # only positions whose whole window lies inside the image
    return float((num / den)[pad:-pad, pad:-pad].mean())


def ssim(a: ImageTensor, b: ImageTensor) -> float:
    """Mean local SSIM (11x11 Gaussian window, sigma 1.5), averaged over RGB."""
    _check_pair(a, b)
    if a.shape[-2] < SSIM_WINDOW or a.shape[-1] < SSIM_WINDOW:
        raise ValueError(f"image {a.shape[-2:]} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    return float(np.mean([_ssim_channel(a[c], b[c]) for c in range(a.shape[0])]))


def comparison_window(
    height: int,
    width: int,
    max_shift: int,
    border: int,
    center_crop: int | None,
) -> tuple[slice, slice]:
    """Rows/cols of ``sr`` compared under every shift in [0, max_shift]^2.

    The window drops ``border`` pixels, optionally keeps a centered square,
    and starts at least ``max_shift`` pixels in so each shifted hr window
    stays inside the image. A center crop that does not fit is shrunk, with
    a warning.
    """
    top, left = border, border
    bottom, right = height - border, width - border
    if center_crop is not None:
        top = max(top, (height - center_crop) // 2)
        left = max(left, (width - center_crop) // 2)
        bottom = min(bottom, (height - center_crop) // 2 + center_crop)
        right = min(right, (width - center_crop) // 2 + center_crop)
    top, left = max(top, max_shift), max(left, max_shift)
    if bottom <= top or right <= left:
        raise ValueError(
            f"empty comparison region for {height}x{width} image "
            f"(max_shift={max_shift}, border={border}, center_crop={center_crop})"
        )
    if center_crop is not None and min(bottom - top, right - left) < center_crop:
        logger.warning(
            "Center crop %d shrunk to %dx%d for a %dx%d image (max_shift=%d, border=%d)",
            center_crop, bottom - top, right - left, height, width, max_shift, border,
        )
    return slice(top, bottom), slice(left, right)


def shift_tolerant_score(
    sr: ImageTensor,
    hr: ImageTensor,
    max_shift: int,
    border: int = 0,
    center_crop: int | None = None,
) -> EvalResult:
    """Best PSNR over integer translations of ``hr``, SSIM reported at that shift.

    Shift (dx, dy) compares ``sr[y, x]`` with ``hr[y - dy, x - dx]``, so an
    ``sr`` equal to ``hr`` translated by (dx, dy) scores PSNR_CAP there.
    Shifts are visited dy-major; ties keep the first maximum.
    """
    _check_pair(sr, hr)
    if max_shift < 0:
        raise ValueError(f"max_shift must be >= 0, got {max_shift}")
    rows, cols = comparison_window(sr.shape[1], sr.shape[2], max_shift, border, center_crop)
    sr_win = sr[:, rows, cols]

    def hr_window(dx: int, dy: int) -> np.ndarray:
        return hr[:, rows.start - dy:rows.stop - dy, cols.start - dx:cols.stop - dx]

    best, best_shift = -1.0, (0, 0)
    for dy in range(max_shift + 1):
        for dx in range(max_shift + 1):
            score = psnr(sr_win, hr_window(dx, dy))
            if score > best:
                best, best_shift = score, (dx, dy)

    return EvalResult(
        psnr=best,
        ssim=ssim(sr_win, hr_window(*best_shift)),
        best_shift=best_shift,
        crop=None if center_crop is None else min(rows.stop - rows.start, cols.stop - cols.start),
        border_ignored=border,
    )
