"""Windowed-statistics image metrics.

SSIM, multi-scale SSIM, the contrast-structure similarity (CSS) metric,
PSNR, Gaussian pyramid construction and the pyramid L1 distance. Window
statistics are computed over the valid convolution region only (no
padding), so the moment maps are free of border bias; pyramid low-pass
uses reflection padding so levels keep their nominal sizes before
decimation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve

from .core import ImageTensor
from .errors import ShapeMismatch, TooSmall

# 5x5 binomial approximation to a Gaussian: outer product of (1,4,6,4,1)/16.
BINOMIAL5 = np.outer([1.0, 4.0, 6.0, 4.0, 1.0], [1.0, 4.0, 6.0, 4.0, 1.0]) / 256.0
BINOMIAL5.flags.writeable = False

# Standard five-scale exponent weights for MS-SSIM.
MSSSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)


@dataclass(frozen=True)
class SsimConfig:
    """Window and stabilization constants shared by all windowed metrics."""

    window_size: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 1.0

    def __post_init__(self) -> None:
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError(f"window_size must be odd and >= 3, got {self.window_size}")
        for name in ("window_sigma", "k1", "k2", "data_range"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def c1(self) -> float:
        return (self.k1 * self.data_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.data_range) ** 2


def _default_level_weights(levels: int) -> tuple[float, ...]:
    # One weight for the raw image plus one per pyramid level.
    return tuple([1.0] * (levels + 1))


@dataclass(frozen=True, eq=False)
class PyramidConfig:
    """Gaussian pyramid depth, low-pass kernel and per-level L1 weights.

    ``level_weights`` has ``levels + 1`` entries: index 0 weights the raw
    image, index i >= 1 weights pyramid level i.
    """

    levels: int = 4
    kernel: np.ndarray = field(default_factory=lambda: BINOMIAL5)
    level_weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        k = np.asarray(self.kernel, dtype=np.float64)
        if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] % 2 == 0:
            raise ValueError("kernel must be a square 2-D array with odd side length")
        if abs(float(k.sum()) - 1.0) > 1e-9:
            raise ValueError("kernel taps must sum to 1 within 1e-9")
        object.__setattr__(self, "kernel", k)
        if self.level_weights is None:
            object.__setattr__(self, "level_weights", _default_level_weights(self.levels))
        w = tuple(float(x) for x in self.level_weights)  # type: ignore[union-attr]
        if len(w) != self.levels + 1:
            raise ValueError(
                f"level_weights needs {self.levels + 1} entries (raw image + {self.levels} levels), got {len(w)}"
            )
        if any(x < 0 for x in w) or all(x == 0 for x in w):
            raise ValueError("level_weights must be >= 0 and not all zero")
        object.__setattr__(self, "level_weights", w)


@dataclass(frozen=True, eq=False)
class WindowStats:
    """Gaussian-windowed local moments of an image pair.

    All maps have shape (B, C, H', W') where H' = H - window + 1 and
    W' = W - window + 1 (valid convolution region). Variances are clamped
    at zero to absorb floating-point noise.
    """

    mu_x: np.ndarray
    mu_y: np.ndarray
    var_x: np.ndarray
    var_y: np.ndarray
    cov_xy: np.ndarray


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    """Normalized 2-D Gaussian window (sums to 1)."""
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(ax**2) / (2.0 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def _require_same_shape(x: ImageTensor, y: ImageTensor) -> None:
    if x.shape != y.shape:
        raise ShapeMismatch(f"shape mismatch: {x.shape} vs {y.shape}")


def _window_filter(plane: np.ndarray, window: np.ndarray) -> np.ndarray:
    # The window is symmetric, so convolution equals correlation.
    return convolve(plane, window, mode="valid", method="auto")


def local_stats(x: ImageTensor, y: ImageTensor, cfg: SsimConfig | None = None) -> WindowStats:
    """Windowed means, variances and covariance of two equal-shape images."""
    cfg = cfg or SsimConfig()
    _require_same_shape(x, y)
    if x.height < cfg.window_size or x.width < cfg.window_size:
        raise TooSmall(
            f"image {x.height}x{x.width} smaller than {cfg.window_size}x{cfg.window_size} window"
        )
    win = gaussian_window(cfg.window_size, cfg.window_sigma)
    b, c, h, w = x.shape
    oh, ow = h - cfg.window_size + 1, w - cfg.window_size + 1
    mu_x = np.empty((b, c, oh, ow))
    mu_y = np.empty((b, c, oh, ow))
    var_x = np.empty((b, c, oh, ow))
    var_y = np.empty((b, c, oh, ow))
    cov_xy = np.empty((b, c, oh, ow))
    for bi in range(b):
        for ci in range(c):
            xp = x.data[bi, ci]
            yp = y.data[bi, ci]
            ex = _window_filter(xp, win)
            ey = _window_filter(yp, win)
            exx = _window_filter(xp * xp, win)
            eyy = _window_filter(yp * yp, win)
            exy = _window_filter(xp * yp, win)
            mu_x[bi, ci] = ex
            mu_y[bi, ci] = ey
            var_x[bi, ci] = np.maximum(exx - ex * ex, 0.0)
            var_y[bi, ci] = np.maximum(eyy - ey * ey, 0.0)
            cov_xy[bi, ci] = exy - ex * ey
    return WindowStats(mu_x=mu_x, mu_y=mu_y, var_x=var_x, var_y=var_y, cov_xy=cov_xy)


def _cs_map(stats: WindowStats, c2: float) -> np.ndarray:
    return (2.0 * stats.cov_xy + c2) / (stats.var_x + stats.var_y + c2)


def _luminance_map(stats: WindowStats, c1: float) -> np.ndarray:
    return (2.0 * stats.mu_x * stats.mu_y + c1) / (stats.mu_x**2 + stats.mu_y**2 + c1)


def ssim(x: ImageTensor, y: ImageTensor, cfg: SsimConfig | None = None) -> float:
    """Mean structural similarity over channels and valid window positions."""
    cfg = cfg or SsimConfig()
    stats = local_stats(x, y, cfg)
    return float(np.mean(_luminance_map(stats, cfg.c1) * _cs_map(stats, cfg.c2)))


def css_metric(he: ImageTensor, gen: ImageTensor, cfg: SsimConfig | None = None) -> float:
    """Contrast-structure similarity: the mean CS term, luminance dropped.

    Used between the H&E input and the generated IHC to quantify how much
    of the input's structure survived translation; the function itself is
    pair-agnostic.
    """
    cfg = cfg or SsimConfig()
    stats = local_stats(he, gen, cfg)
    return float(np.mean(_cs_map(stats, cfg.c2)))


def _avg_pool2(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    plane = plane[: h - h % 2, : w - w % 2]
    return plane.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def _downsample(t: ImageTensor) -> ImageTensor:
    b, c = t.batch, t.channels
    pooled = np.stack(
        [np.stack([_avg_pool2(t.data[bi, ci]) for ci in range(c)]) for bi in range(b)]
    )
    return ImageTensor.from_array(np.clip(pooled, 0.0, 1.0), copy=False)


def msssim_scale_weights(scales: int) -> tuple[float, ...]:
    """Exponent weights for a given scale count.

    The standard five weights when scales == 5, otherwise the first
    ``scales`` of them renormalized to sum to 1.
    """
    if scales == len(MSSSIM_WEIGHTS):
        return MSSSIM_WEIGHTS
    if not 1 <= scales <= len(MSSSIM_WEIGHTS):
        raise ValueError(f"scales must be in [1, {len(MSSSIM_WEIGHTS)}], got {scales}")
    head = MSSSIM_WEIGHTS[:scales]
    total = sum(head)
    return tuple(w / total for w in head)


def ms_ssim(
    x: ImageTensor,
    y: ImageTensor,
    cfg: SsimConfig | None = None,
    scales: int = 5,
    scale_weights: tuple[float, ...] | None = None,
) -> float:
    """Multi-scale SSIM.

    CS terms at every scale, full SSIM only at the coarsest, combined as a
    weighted geometric product. Downsampling between scales is 2x2 average
    pooling. Negative factors are clamped at zero before the fractional
    exponents, and the result is clamped to [0, 1].
    """
    cfg = cfg or SsimConfig()
    _require_same_shape(x, y)
    weights = scale_weights if scale_weights is not None else msssim_scale_weights(scales)
    if len(weights) != scales:
        raise ValueError(f"need {scales} scale weights, got {len(weights)}")
    needed = cfg.window_size * 2 ** (scales - 1)
    if x.height < needed or x.width < needed:
        raise TooSmall(
            f"image {x.height}x{x.width} too small for {scales} scales with "
            f"window {cfg.window_size} (needs >= {needed})"
        )
    cur_x, cur_y = x, y
    value = 1.0
    for s in range(scales):
        stats = local_stats(cur_x, cur_y, cfg)
        if s < scales - 1:
            factor = float(np.mean(_cs_map(stats, cfg.c2)))
            cur_x = _downsample(cur_x)
            cur_y = _downsample(cur_y)
        else:
            factor = float(np.mean(_luminance_map(stats, cfg.c1) * _cs_map(stats, cfg.c2)))
        value *= max(factor, 0.0) ** weights[s]
    return float(min(max(value, 0.0), 1.0))


def psnr(x: ImageTensor, y: ImageTensor, data_range: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf when the images are identical."""
    _require_same_shape(x, y)
    mse = float(np.mean((x.data - y.data) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(data_range**2 / mse))


def _low_pass(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    pad = kernel.shape[0] // 2
    padded = np.pad(plane, pad, mode="reflect")
    return convolve(padded, kernel, mode="valid", method="auto")


def gaussian_pyramid(x: ImageTensor, cfg: PyramidConfig | None = None) -> list[ImageTensor]:
    """Low-pass-and-decimate pyramid; level i has spatial dims (H/2^i, W/2^i)."""
    cfg = cfg or PyramidConfig()
    factor = 2**cfg.levels
    if x.height % factor != 0 or x.width % factor != 0:
        raise TooSmall(
            f"spatial dims {x.height}x{x.width} not divisible by 2^{cfg.levels}"
        )
    out: list[ImageTensor] = []
    cur = x.data
    for _ in range(cfg.levels):
        b, c = cur.shape[0], cur.shape[1]
        blurred = np.stack(
            [np.stack([_low_pass(cur[bi, ci], cfg.kernel) for ci in range(c)]) for bi in range(b)]
        )
        cur = blurred[:, :, ::2, ::2]
        # Convex combination of in-range values; clip guards fp overshoot only.
        cur = np.clip(cur, 0.0, 1.0)
        out.append(ImageTensor.from_array(cur, copy=True))
    return out


def pyramid_l1(a: ImageTensor, b: ImageTensor, cfg: PyramidConfig | None = None) -> float:
    """Weighted mean-absolute difference accumulated over the raw image and pyramid levels."""
    cfg = cfg or PyramidConfig()
    _require_same_shape(a, b)
    pyr_a = gaussian_pyramid(a, cfg)
    pyr_b = gaussian_pyramid(b, cfg)
    total = cfg.level_weights[0] * float(np.mean(np.abs(a.data - b.data)))
    for i in range(cfg.levels):
        total += cfg.level_weights[i + 1] * float(np.mean(np.abs(pyr_a[i].data - pyr_b[i].data)))
    return total
