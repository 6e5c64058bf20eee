"""Wavelet-shrinkage denoising (universal and BayesShrink thresholds)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import dtcwt, dwt
from .dtcwt import ComplexPyramid
from .dwt import BANDS, SubbandPyramid
from .filters import DUALTREE, WaveletFamily, parse_family, parse_selector, selector_label
from .imaging import Image, as_array

__all__ = [
    "ShrinkSpec",
    "estimate_sigma",
    "soft_threshold",
    "hard_threshold",
    "band_thresholds",
    "shrink_pyramid",
    "shrink_array",
    "shrink_denoise",
    "MAD_SCALE",
]

# median(|N(0, 1)|)
MAD_SCALE = 0.6745
RULES = ("bayes", "universal")
MODES = ("soft", "hard")
_ORIENTATION_GROUP = {0: "h", 5: "h", 2: "v", 3: "v", 1: "d", 4: "d"}


@dataclass(frozen=True)
class ShrinkSpec:
    """How to threshold detail coefficients.

    ``threshold``, when set, replaces the rule-derived threshold for every
    band (0 keeps all coefficients, ``inf`` removes all details).
    """

    rule: str = "bayes"
    mode: str = "soft"
    selector: object = "db4"
    levels: int = 2
    threshold: float | None = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}, got {self.rule!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.threshold is not None and not self.threshold >= 0:
            raise ValueError("threshold override must be >= 0")
        sel = parse_selector(self.selector) if isinstance(self.selector, str) else self.selector
        object.__setattr__(self, "selector", sel)

    @property
    def label(self) -> str:
        return f"{self.rule}-{self.mode}-{selector_label(self.selector)}-j{self.levels}"


def estimate_sigma(pyramid: SubbandPyramid) -> float:
    """Robust noise level ``median(|Y^d_1|) / 0.6745`` from the finest diagonal band."""
    d1 = np.abs(np.asarray(pyramid.details[0]["d"]))
    return float(np.median(d1)) / MAD_SCALE


def soft_threshold(c: np.ndarray, t: float) -> np.ndarray:
    """``sign(c) * max(|c| - t, 0)``; complex input shrinks the magnitude and keeps the phase."""
    c = np.asarray(c)
    mag = np.abs(c)
    if np.iscomplexobj(c):
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(mag > 0, np.maximum(mag - t, 0.0) / np.where(mag > 0, mag, 1.0), 0.0)
        return c * scale
    return np.sign(c) * np.maximum(mag - t, 0.0)


def hard_threshold(c: np.ndarray, t: float) -> np.ndarray:
    """Zero every coefficient whose magnitude does not exceed ``t``."""
    c = np.asarray(c)
    return np.where(np.abs(c) > t, c, 0)


def _frob2(m) -> float:
    return math.fsum(np.asarray(m.multiply(m).sum(axis=1)).ravel())


@lru_cache(maxsize=64)
def _dwt_gains(name: str, order, shape: tuple[int, int], levels: int) -> dict:
    """Noise variance of each band per unit white pixel variance."""
    fam = WaveletFamily(name, order)
    rows = dwt.analysis_chains(fam, shape[0], levels)
    cols = dwt.analysis_chains(fam, shape[1], levels)
    gains = {}
    for lev, ((lr, hr), (lc, hc)) in enumerate(zip(rows, cols), start=1):
        ops = {"h": (hr, lc), "v": (lr, hc), "d": (hr, hc)}
        for key, (r, c) in ops.items():
            gains[lev, key] = _frob2(r) * _frob2(c) / (r.shape[0] * c.shape[0])
    return gains


@lru_cache(maxsize=64)
def _dtcwt_gains(shape: tuple[int, int], levels: int) -> dict:
    """Mean |z|^2 of each complex band per unit white pixel variance."""
    rows = dtcwt.analysis_chains(shape[0], levels)
    cols = dtcwt.analysis_chains(shape[1], levels)
    gains = {}
    for lev, ((lr, hr), (lc, hc)) in enumerate(zip(rows, cols), start=1):
        ops = {"h": (hr, lc), "v": (lr, hc), "d": (hr, hc)}
        for key, (r, c) in ops.items():
            # the four real tree combinations become two complex bands
            n_complex = r.shape[0] * c.shape[0] // 4
            gains[lev, key] = _frob2(r) * _frob2(c) / (2 * n_complex)
    return gains


def _rule_threshold(rule: str, band: np.ndarray, noise_var: float, n_pixels: int) -> float:
    if noise_var == 0:
        return 0.0
    if rule == "universal":
        return math.sqrt(noise_var) * math.sqrt(2.0 * math.log(n_pixels))
    signal_var = max(float(np.mean(np.abs(band) ** 2)) - noise_var, 0.0)
    if signal_var == 0:
        return math.inf
    return noise_var / math.sqrt(signal_var)


def _pixel_sigma(image: np.ndarray, spec: ShrinkSpec, pyramid) -> float:
    if isinstance(pyramid, ComplexPyramid):
        # the dual tree has no critically sampled diagonal band; use Haar's
        return estimate_sigma(dwt.dwt2_forward(image, parse_family("haar"), 1))
    sigma = estimate_sigma(pyramid)
    g = _dwt_gains(pyramid.family.name, pyramid.family.order, pyramid.original_shape,
                   pyramid.levels)[1, "d"]
    return sigma / math.sqrt(g)


def band_thresholds(image, spec: ShrinkSpec, pyramid=None) -> dict:
    """Threshold for every (level, band) of the decomposition of ``image``.

    DWT band keys are ``"h"``, ``"v"``, ``"d"``; dual-tree keys are the
    orientation angles. The pixel noise level comes from the finest diagonal
    band and is carried to every band through that band's exact noise gain,
    which is 1 for orthogonal wavelets.
    """
    x = as_array(image)
    if pyramid is None:
        pyramid = _forward(x, spec)
    sigma = _pixel_sigma(x, spec, pyramid)
    out = {}
    if isinstance(pyramid, ComplexPyramid):
        gains = _dtcwt_gains(pyramid.original_shape, pyramid.levels)
        for lev, stack in enumerate(pyramid.oriented, start=1):
            for i, angle in enumerate(pyramid.orientations):
                nv = sigma ** 2 * gains[lev, _ORIENTATION_GROUP[i]]
                out[lev, angle] = (spec.threshold if spec.threshold is not None
                                   else _rule_threshold(spec.rule, stack[i], nv, x.size))
    else:
        gains = _dwt_gains(pyramid.family.name, pyramid.family.order, pyramid.original_shape,
                           pyramid.levels)
        for lev, bands in enumerate(pyramid.details, start=1):
            for key in BANDS:
                nv = sigma ** 2 * gains[lev, key]
                out[lev, key] = (spec.threshold if spec.threshold is not None
                                 else _rule_threshold(spec.rule, bands[key], nv, x.size))
    return out


def _forward(x: np.ndarray, spec: ShrinkSpec):
    if spec.selector == DUALTREE:
        return dtcwt.dtcwt2_forward(x, spec.levels)
    return dwt.dwt2_forward(x, spec.selector, spec.levels)


def shrink_pyramid(pyramid, thresholds: dict, mode: str = "soft"):
    """Apply per-band thresholds to every detail band of a pyramid."""
    fn = soft_threshold if mode == "soft" else hard_threshold
    if isinstance(pyramid, ComplexPyramid):
        def shrink_stack(lev, stack):
            return np.stack([fn(stack[i], thresholds[lev, a])
                             for i, a in enumerate(pyramid.orientations)])
        return pyramid.map_oriented(shrink_stack)
    return pyramid.map_details(lambda lev, key, band: fn(band, thresholds[lev, key]))


def shrink_array(noisy, spec: ShrinkSpec) -> np.ndarray:
    """Denoise and return the raw reconstruction (not clamped)."""
    x = as_array(noisy)
    pyr = _forward(x, spec)
    shrunk = shrink_pyramid(pyr, band_thresholds(x, spec, pyr), spec.mode)
    if isinstance(shrunk, ComplexPyramid):
        return dtcwt.dtcwt2_inverse(shrunk)
    return dwt.dwt2_inverse(shrunk)


def shrink_denoise(noisy: Image, spec: ShrinkSpec | None = None) -> Image:
    """Decompose, threshold the details, reconstruct and clamp to [0, 1]."""
    spec = spec or ShrinkSpec()
    depth = noisy.source_depth if isinstance(noisy, Image) else 8
    return Image.clipped(shrink_array(noisy, spec), depth)
