"""Image representation, file I/O, resampling and statistics normalization.

Images are ``numpy`` float64 arrays of shape (3, H, W) in RGB order with a
nominal range of [0, 1]. Values are clamped only when written to disk.
"""

from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path
from typing import Callable

import cv2
import numpy as np
import torch
from PIL import Image

ImageTensor = np.ndarray

IMAGE_SUFFIXES = (".png", ".bmp", ".tif", ".tiff", ".jpg", ".jpeg")
_CONVERTIBLE_MODES = {"RGB", "RGBA", "P", "PA", "L", "LA", "CMYK"}
_SIXTEEN_BIT_MODES = {"I;16", "I;16B", "I;16L", "I;16N", "I"}
_STD_EPS = 1e-8
_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def check_image(img: ImageTensor, name: str = "image") -> ImageTensor:
    """Validate the ImageTensor invariants and return the array."""
    if not isinstance(img, np.ndarray) or img.ndim != 3 or img.shape[0] != 3:
        shape = getattr(img, "shape", None)
        raise ValueError(f"{name} must be an array of shape (3, H, W), got {shape}")
    if img.shape[1] < 1 or img.shape[2] < 1:
        raise ValueError(f"{name} has an empty spatial extent: {img.shape}")
    if not np.isfinite(img).all():
        raise ValueError(f"{name} contains NaN or Inf values")
    return img


def _is_16bit_color_png(path: Path) -> bool:
    """IHDR bit depth 16 with colour type 2 (RGB) or 6 (RGBA)."""
    with open(path, "rb") as f:
        header = f.read(26)
    return len(header) == 26 and header[:8] == _PNG_SIGNATURE and header[24] == 16 and header[25] in (2, 6)


def _load_16bit_color(path: Path) -> ImageTensor:
    # Pillow reduces 16-bit colour PNGs to 8 bits per channel
    bgr = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if bgr is None or bgr.dtype != np.uint16 or bgr.ndim != 3:
        raise ValueError(f"Cannot decode 16-bit image {path}")
    rgb = bgr[:, :, 2::-1].astype(np.float64) / 65535.0  # BGR(A) -> RGB
    return np.ascontiguousarray(rgb.transpose(2, 0, 1))


def load_image(path: str | Path) -> ImageTensor:
    """Read an 8- or 16-bit raster into a (3, H, W) float image in [0, 1]."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Image not found: {path}")
    if _is_16bit_color_png(path):
        return _load_16bit_color(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in _SIXTEEN_BIT_MODES:
                gray = np.asarray(im, dtype=np.float64) / 65535.0
                return np.repeat(gray[None], 3, axis=0)
            if mode not in _CONVERTIBLE_MODES:
                raise ValueError(f"Unsupported image mode '{mode}' in {path}")
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except (OSError, SyntaxError) as e:
        raise ValueError(f"Cannot decode image {path}: {e}") from e
    return np.ascontiguousarray(arr.transpose(2, 0, 1))


def quantize(img: ImageTensor) -> np.ndarray:
    """Clamp to [0, 1] and map to uint8 with round-half-up; returns (H, W, 3)."""
    clipped = np.clip(img, 0.0, 1.0)
    return np.floor(clipped * 255.0 + 0.5).astype(np.uint8).transpose(1, 2, 0)


def save_image(img: ImageTensor, path: str | Path) -> None:
    """Write an 8-bit RGB PNG."""
    check_image(img)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(quantize(img), mode="RGB").save(path, format="PNG")


def list_images(directory: str | Path) -> list[Path]:
    """Sorted image files directly inside ``directory``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"Directory not found: {directory}")
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------

def _cubic(x: np.ndarray, a: float = -0.5) -> np.ndarray:
    """Keys cubic convolution kernel."""
    ax = np.abs(x)
    ax2, ax3 = ax * ax, ax * ax * ax
    near = (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0
    far = a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a
    return np.where(ax <= 1.0, near, np.where(ax < 2.0, far, 0.0))


def _triangle(x: np.ndarray) -> np.ndarray:
    return np.clip(1.0 - np.abs(x), 0.0, None)


_KERNELS: dict[str, tuple[Callable[[np.ndarray], np.ndarray], float]] = {
    "bicubic": (_cubic, 2.0),
    "bilinear": (_triangle, 1.0),
}


def reflect_index(idx: np.ndarray, n: int) -> np.ndarray:
    """Map arbitrary indices into [0, n) by whole-sample reflection (d c b | a b c d)."""
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * (n - 1)
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - idx, idx)


def _as_fraction(scale: float | Fraction) -> Fraction:
    if isinstance(scale, Fraction):
        frac = scale
    else:
        frac = Fraction(scale).limit_denominator(1_000_000)
    if frac <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    return frac


def resample_weights(n_in: int, n_out: int, scale: float, method: str) -> np.ndarray:
    """(n_out, n_in) matrix of a separable resampling pass.

    Output sample ``i`` sits at input coordinate ``(i + 0.5) / scale - 0.5``.
    When shrinking, the kernel is widened by ``1 / scale`` (antialiasing).
    Taps falling outside the input are folded back by reflection.
    """
    kernel, support = _KERNELS[method]
    stretch = min(scale, 1.0)
    width = support / stretch
    weights = np.zeros((n_out, n_in))
    centers = (np.arange(n_out) + 0.5) / scale - 0.5
    for i, center in enumerate(centers):
        taps = np.arange(math.floor(center - width), math.ceil(center + width) + 1)
        w = kernel((center - taps) * stretch)
        w /= w.sum()
        np.add.at(weights[i], reflect_index(taps, n_in), w)
    return weights


def resample(img: ImageTensor, scale: float | Fraction, method: str = "bicubic") -> ImageTensor:
    """Resize by ``scale`` to (floor(h*scale), floor(w*scale))."""
    frac = _as_fraction(scale)
    _, h, w = img.shape
    out_h, out_w = math.floor(h * frac), math.floor(w * frac)
    if out_h < 1 or out_w < 1:
        raise ValueError(f"scale {frac} maps {h}x{w} to a degenerate {out_h}x{out_w} image")
    if frac == 1:
        return img.copy()

    if method == "nearest":
        rows = np.minimum(np.floor((np.arange(out_h) + 0.5) / frac).astype(int), h - 1)
        cols = np.minimum(np.floor((np.arange(out_w) + 0.5) / frac).astype(int), w - 1)
        return img[:, rows][:, :, cols].copy()
    if method not in _KERNELS:
        raise ValueError(f"Unknown resampling method: {method}")

    wh = resample_weights(h, out_h, float(frac), method)
    ww = resample_weights(w, out_w, float(frac), method)
    return wh @ img @ ww.T


def bicubic_resample(img: ImageTensor, scale: float | Fraction) -> ImageTensor:
    """Separable Keys (a = -0.5) bicubic resize with reflect boundaries."""
    return resample(img, scale, "bicubic")


# ---------------------------------------------------------------------------
# Statistics normalization
# ---------------------------------------------------------------------------

def normalize_to_reference(img: ImageTensor, ref: ImageTensor) -> ImageTensor:
    """Affinely match each channel's mean and standard deviation to ``ref``."""
    ref_mean = ref.mean(axis=(1, 2), keepdims=True)
    ref_std = ref.std(axis=(1, 2), keepdims=True)
    if (ref_std <= _STD_EPS).any():
        raise ValueError("reference image has a near-constant channel; cannot normalize")
    mean = img.mean(axis=(1, 2), keepdims=True)
    std = img.std(axis=(1, 2), keepdims=True)
    flat = std <= _STD_EPS
    safe_std = np.where(flat, 1.0, std)
    out = (img - mean) / safe_std * ref_std + ref_mean
    # A constant channel has no spread to rescale; it takes the reference mean.
    return np.where(flat, ref_mean, out)


# ---------------------------------------------------------------------------
# torch interop
# ---------------------------------------------------------------------------

def to_tensor(img: ImageTensor, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """(3, H, W) array -> (1, 3, H, W) tensor."""
    return torch.from_numpy(np.ascontiguousarray(img)).to(dtype).unsqueeze(0)


def from_tensor(t: torch.Tensor) -> ImageTensor:
    """(1, 3, H, W) or (3, H, W) tensor -> float64 array."""
    if t.dim() == 4:
        if t.shape[0] != 1:
            raise ValueError(f"expected a single-image batch, got {tuple(t.shape)}")
        t = t[0]
    return t.detach().cpu().to(torch.float64).numpy()
