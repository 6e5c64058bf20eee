"""Image-quality metrics and the latent / wavelet / pixel loss stack.

Every function accepts 2-D rasters (arrays or Images) or 4-D tensors laid out
as (batch, channels, height, width). Losses use mean reductions so the
default weights behave the same for any tensor size; ``reduction="sum"``
gives the squared-norm reading instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .analysis import decompose
from .dtcwt import ComplexPyramid, map_orientations_to_hvd
from .dwt import BANDS
from .filters import parse_selector, selector_label
from .imaging import as_array

__all__ = [
    "mse",
    "ssim",
    "psnr",
    "latent_loss",
    "wavelet_loss",
    "total_loss",
    "pixel_loss",
    "LossWeights",
    "LossBreakdown",
    "gaussian_window",
    "SSIM_WINDOW",
    "SSIM_SIGMA",
]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _tensor(x) -> np.ndarray:
    arr = as_array(x)
    if arr.ndim == 2:
        return arr[None, None]
    if arr.ndim == 4:
        return arr
    raise ValueError(f"expected a 2-D raster or (B, C, H, W) tensor, got shape {arr.shape}")


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = _tensor(a), _tensor(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("inputs must be finite")
    return a, b


def mse(a, b, reduction: str = "mean") -> float:
    """Mean (or sum) of squared differences."""
    a, b = _pair(a, b)
    sq = (a - b) ** 2
    if reduction == "mean":
        return float(np.mean(sq))
    if reduction == "sum":
        return float(np.sum(sq))
    raise ValueError(f"reduction must be 'mean' or 'sum', got {reduction!r}")


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalised 1-D Gaussian taps; the 2-D window is their outer product."""
    x = np.arange(size) - (size - 1) / 2
    w = np.exp(-(x ** 2) / (2 * sigma ** 2))
    return w / w.sum()


def _filter_valid(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Separable 'valid' filtering over the last two axes."""
    x = sliding_window_view(x, w.size, axis=-1) @ w
    x = sliding_window_view(x, w.size, axis=-2) @ w
    return x


def ssim_map(a, b, data_range: float = 1.0) -> np.ndarray:
    """Local SSIM for every valid window position, shape (B, C, H-10, W-10)."""
    a, b = _pair(a, b)
    if min(a.shape[-2:]) < SSIM_WINDOW:
        raise ValueError(
            f"image {a.shape[-2:]} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    w = gaussian_window()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu_a, mu_b = _filter_valid(a, w), _filter_valid(b, w)
    var_a = _filter_valid(a * a, w) - mu_a ** 2
    var_b = _filter_valid(b * b, w) - mu_b ** 2
    cov = _filter_valid(a * b, w) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return num / den


def ssim(a, b, data_range: float = 1.0) -> float:
    """Mean SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03.

    Multi-channel tensors average the per-map SSIM over batch and channels.
    """
    m = ssim_map(a, b, data_range)
    return float(np.mean(m.mean(axis=(-2, -1))))


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    err = mse(a, b)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(peak ** 2 / err)


def latent_loss(zhat, z, alpha: float = 1.0, reduction: str = "mean") -> float:
    """``mse(zhat, z) + alpha * (1 - ssim(zhat, z))``."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    base = mse(zhat, z, reduction)
    if alpha == 0:
        return base
    return base + alpha * (1.0 - ssim(zhat, z))


def _level_bands(pyr, j: int) -> dict[str, np.ndarray]:
    if isinstance(pyr, ComplexPyramid):
        return map_orientations_to_hvd(pyr)[j - 1]
    return pyr.details[j - 1]


def _wavelet_loss_2d(xhat: np.ndarray, x: np.ndarray, selector, j: int, all_levels: bool) -> float:
    ph = decompose(xhat, selector, j)
    px = decompose(x, selector, j)
    levels = range(1, j + 1) if all_levels else (j,)
    total = 0.0
    for lev in levels:
        bh, bx = _level_bands(ph, lev), _level_bands(px, lev)
        for key in BANDS:
            total += float(np.mean((bh[key] - bx[key]) ** 2))
    return total


def wavelet_loss(xhat, x, selector="bior4.4", j: int = 2, all_levels: bool = False) -> float:
    """Sum over h, v, d of the mean squared difference of level-``j`` bands.

    ``selector`` is a family string, a WaveletFamily or ``"dtcwt"``; for the
    dual tree the h/v/d bands are the grouped orientation magnitudes. With
    ``all_levels`` the sum also runs over levels ``1..j``. 4-D tensors give the
    mean over their (batch, channel) maps.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    if isinstance(selector, str):
        selector = parse_selector(selector)
    a, b = _pair(xhat, x)
    vals = [
        _wavelet_loss_2d(a[i, c], b[i, c], selector, j, all_levels)
        for i in range(a.shape[0])
        for c in range(a.shape[1])
    ]
    return float(np.mean(vals))


def pixel_loss(xhat, x, perceptual: Callable | None = None, weight: float = 1.0) -> float:
    """Pixel MSE plus an optional ``weight * perceptual(xhat, x)`` term.

    No perceptual term ships with the package; pass any callable returning a
    scalar distance to add one.
    """
    base = mse(xhat, x)
    if perceptual is None:
        return base
    return base + weight * float(perceptual(xhat, x))


@dataclass(frozen=True)
class LossWeights:
    """Weights of the combined loss: alpha on (1 - SSIM), beta on the wavelet term."""

    alpha: float = 1.0
    beta: float = 100.0
    j: int = 2
    selector: object = "bior4.4"
    all_levels: bool = False

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if self.j < 1:
            raise ValueError("j must be >= 1")
        sel = parse_selector(self.selector) if isinstance(self.selector, str) else self.selector
        object.__setattr__(self, "selector", sel)


@dataclass(frozen=True)
class LossBreakdown:
    """Total loss and the named components that produced it."""

    total: float
    latent: float
    mse: float
    ssim_loss: float
    wavelet: float
    weights: LossWeights = field(repr=False)

    @property
    def components(self) -> dict:
        """Loss terms; ``ssim_loss`` is ``1 - SSIM``."""
        return {
            "latent": self.latent,
            "mse": self.mse,
            "ssim_loss": self.ssim_loss,
            "wavelet": self.wavelet,
        }

    def to_record(self) -> dict:
        w = self.weights
        return {
            "name": "total_loss",
            "value": self.total,
            "components": self.components,
            "weights": {"alpha": w.alpha, "beta": w.beta, "j": w.j,
                        "selector": selector_label(w.selector), "all_levels": w.all_levels},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def total_loss(zhat, z, xhat, x, weights: LossWeights | None = None) -> LossBreakdown:
    """``latent_loss(zhat, z, alpha) + beta * wavelet_loss(xhat, x, j)``."""
    weights = weights or LossWeights()
    err = mse(zhat, z)
    dissim = 1.0 - ssim(zhat, z)
    latent = err + weights.alpha * dissim
    wav = wavelet_loss(xhat, x, weights.selector, weights.j, weights.all_levels)
    return LossBreakdown(latent + weights.beta * wav, latent, err, dissim, wav, weights)
