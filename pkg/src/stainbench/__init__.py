"""stainbench: evaluation toolkit for virtual staining models."""

from .core import EvalTriplet, Her2Score, ImageTensor, MetricReport, MetricRow, validate_tensor
from .distribution import (
    GaussianMoments,
    KidEstimate,
    LpipsWeights,
    fid,
    fit_moments,
    kid,
    lpips,
    sqrtm_psd,
)
from .embeddings import EmbeddingSet, load_embeddings, save_embeddings
from .losses import CssLossConfig, css_loss, pyramid_l1_loss
from .pixel_metrics import (
    PyramidConfig,
    SsimConfig,
    WindowStats,
    css_metric,
    gaussian_pyramid,
    local_stats,
    ms_ssim,
    psnr,
    pyramid_l1,
    ssim,
)

__version__ = "0.1.0"

__all__ = [
    "CssLossConfig",
    "EmbeddingSet",
    "EvalTriplet",
    "GaussianMoments",
    "Her2Score",
    "ImageTensor",
    "KidEstimate",
    "LpipsWeights",
    "MetricReport",
    "MetricRow",
    "PyramidConfig",
    "SsimConfig",
    "WindowStats",
    "css_loss",
    "css_metric",
    "fid",
    "fit_moments",
    "gaussian_pyramid",
    "kid",
    "load_embeddings",
    "local_stats",
    "lpips",
    "ms_ssim",
    "psnr",
    "pyramid_l1",
    "pyramid_l1_loss",
    "save_embeddings",
    "sqrtm_psd",
    "ssim",
    "validate_tensor",
]
