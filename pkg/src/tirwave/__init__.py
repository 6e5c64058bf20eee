"""Wavelet analysis, denoising and loss evaluation for thermal-infrared images."""

__version__ = "0.1.0"

from .analysis import (
    EnergyReport,
    PairError,
    RatioReport,
    batch_energy_report,
    decompose,
    energy_ratio,
    render_report,
    subband_energy,
)
from .denoise import ShrinkSpec, estimate_sigma, shrink_denoise
from .dtcwt import ComplexPyramid, dtcwt2_forward, dtcwt2_inverse, map_orientations_to_hvd
from .dwt import SubbandPyramid, dwt2_forward, dwt2_inverse
from .filters import (
    DUALTREE,
    FilterBank,
    WaveletFamily,
    make_dualtree_filters,
    make_filterbank,
    parse_family,
    parse_selector,
)
from .imaging import (
    Image,
    ImageFormatError,
    NoiseSpec,
    add_noise,
    load_image,
    rescale_minmax,
    save_image,
    synthetic_scene,
)
from .losses import (
    LossBreakdown,
    LossWeights,
    latent_loss,
    mse,
    pixel_loss,
    psnr,
    ssim,
    total_loss,
    wavelet_loss,
)
from .pyramid_io import load_pyramid, save_pyramid

__all__ = [
    "ComplexPyramid", "DUALTREE", "EnergyReport", "FilterBank", "Image", "ImageFormatError",
    "LossBreakdown", "LossWeights", "NoiseSpec", "PairError", "RatioReport", "ShrinkSpec",
    "SubbandPyramid", "WaveletFamily", "add_noise", "batch_energy_report", "decompose",
    "dtcwt2_forward", "dtcwt2_inverse", "dwt2_forward", "dwt2_inverse", "energy_ratio",
    "estimate_sigma", "latent_loss", "load_image", "load_pyramid", "make_dualtree_filters",
    "make_filterbank", "map_orientations_to_hvd", "mse", "parse_family", "parse_selector",
    "pixel_loss", "psnr", "render_report", "rescale_minmax", "save_image", "save_pyramid",
    "shrink_denoise", "ssim", "subband_energy", "synthetic_scene", "total_loss", "wavelet_loss",
]
