"""Reference image quality metrics: PSNR and SSIM.

SSIM follows the original windowed definition: 11x11 Gaussian window with
sigma 1.5, stabilizers C1 = (0.01 * peak)^2 and C2 = (0.03 * peak)^2,
evaluated on luminance over all fully-contained windows and averaged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import correlate2d

__all__ = ["MetricReport", "psnr", "ssim", "LUMA_WEIGHTS"]

LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


@dataclass(frozen=True)
class MetricReport:
    psnr_db: float  # math.inf marks identical images
    ssim: float

    def __post_init__(self):
        if not -1.0 <= self.ssim <= 1.0 + 1e-12:
            raise ValueError(f"ssim {self.ssim} outside [-1, 1]")


def _to_luma(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 1:
        return img[:, :, 0]
    if img.ndim == 3 and img.shape[2] == 3:
        return img @ LUMA_WEIGHTS
    raise ValueError(f"unsupported image shape {img.shape}")


def psnr(ref, test, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE); identical images give +inf."""
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch {ref.shape} vs {test.shape}")
    if not peak > 0:
        raise ValueError("peak must be positive")
    mse = np.mean((ref - test) ** 2)
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(peak ** 2 / mse))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA):
    """Normalized 2-D Gaussian weight window."""
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2
    g = np.exp(-(ax ** 2) / (2 * sigma ** 2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(ref, test, peak: float = 1.0) -> float:
    """Mean local SSIM over all fully-contained 11x11 windows."""
    x = _to_luma(ref)
    y = _to_luma(test)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    if min(x.shape) < SSIM_WINDOW:
        raise ValueError(
            f"image sides must be >= {SSIM_WINDOW}, got {x.shape}")

    w = gaussian_window()
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2

    mu_x = correlate2d(x, w, mode="valid")
    mu_y = correlate2d(y, w, mode="valid")
    var_x = correlate2d(x * x, w, mode="valid") - mu_x ** 2
    var_y = correlate2d(y * y, w, mode="valid") - mu_y ** 2
    cov = correlate2d(x * y, w, mode="valid") - mu_x * mu_y

    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def report(ref, test, peak: float = 1.0) -> MetricReport:
    return MetricReport(psnr_db=psnr(ref, test, peak), ssim=ssim(ref, test, peak))
