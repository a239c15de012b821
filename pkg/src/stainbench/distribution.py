"""Set-level distribution metrics and the layered perceptual distance.

FID works on Gaussian moment fits via a symmetric-PSD matrix square root;
KID is the unbiased polynomial-kernel MMD^2 averaged over disjoint blocks;
the LPIPS-style distance sums weighted, unit-normalized feature-map
differences across layers. All of it is plain numpy and deterministic for
a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingSet, LayerShape, require_samples
from .errors import (
    DimensionMismatch,
    NotSymmetric,
    NumericalFailure,
    ShapeMismatch,
    TooFewSamples,
)

# Guard for zero feature vectors during unit normalization.
_NORM_EPS = 1e-10


@dataclass(frozen=True, eq=False)
class GaussianMoments:
    """Mean vector and covariance matrix of an embedding distribution."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        cov = np.asarray(self.cov, dtype=np.float64)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise DimensionMismatch(f"covariance must be square, got {cov.shape}")
        if cov.shape[0] != mean.shape[0]:
            raise DimensionMismatch(
                f"mean has D={mean.shape[0]} but covariance is {cov.shape[0]}x{cov.shape[1]}"
            )
        _check_symmetric(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class KidEstimate:
    """Block-averaged unbiased MMD^2 with its spread across blocks.

    ``value`` is the raw estimate; ``display_scale`` (default 100) is only
    applied when rendering reports and is flagged there.
    """

    value: float
    std: float
    blocks: int
    block_size: int
    display_scale: float = 100.0


@dataclass(frozen=True, eq=False)
class LpipsWeights:
    """Per-layer, per-channel weights for the perceptual distance."""

    per_layer: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        weights = tuple(np.asarray(w, dtype=np.float64).reshape(-1) for w in self.per_layer)
        for i, w in enumerate(weights):
            if np.any(w < 0):
                raise ValueError(f"layer {i}: weights must be >= 0")
        object.__setattr__(self, "per_layer", weights)

    @property
    def layer_count(self) -> int:
        return len(self.per_layer)

    @classmethod
    def uniform(cls, layer_shapes: tuple[LayerShape, ...] | list[LayerShape]) -> "LpipsWeights":
        return cls(per_layer=tuple(np.ones(c) for c, _h, _w in layer_shapes))


def _check_symmetric(m: np.ndarray) -> None:
    tol = 1e-8 * max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > tol:
        raise NotSymmetric(f"matrix asymmetry {asym:.3e} exceeds tolerance {tol:.3e}")


def fit_moments(e: EmbeddingSet) -> GaussianMoments:
    """Column mean and unbiased (N-1) sample covariance of an embedding set."""
    require_samples(e, 2)
    x = e.vectors.astype(np.float64)
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (e.n - 1)
    cov = (cov + cov.T) / 2.0
    return GaussianMoments(mean=mean, cov=cov)


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix.

    Eigenvalues of the symmetrized input are clamped at zero before
    rooting, so slightly indefinite inputs (floating-point noise) are
    accepted.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {m.shape}")
    _check_symmetric(m)
    sym = (m + m.T) / 2.0
    try:
        eigvals, eigvecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    eigvals = np.maximum(eigvals, 0.0)
    root = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
    return (root + root.T) / 2.0


def fid(a: GaussianMoments, b: GaussianMoments) -> float:
    """Frechet distance between two Gaussian fits.

    Uses the symmetrized inner form sqrtm(Sa @ cov_b @ Sa) with
    Sa = cov_a^(1/2), which keeps everything inside symmetric-PSD
    eigendecompositions; the trace equals that of sqrtm(cov_a @ cov_b).
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"moment dimensions differ: {a.dim} vs {b.dim}")
    sa = sqrtm_psd(a.cov)
    inner = sa @ b.cov @ sa
    cross = sqrtm_psd((inner + inner.T) / 2.0)
    mean_term = float(np.sum((a.mean - b.mean) ** 2))
    trace_term = float(np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.trace(cross))
    return max(mean_term + trace_term, 0.0)


def polynomial_kernel(x: np.ndarray, y: np.ndarray, degree: int = 3) -> np.ndarray:
    """k(x, y) = (x.y / D + 1)^degree, the conventional KID kernel."""
    d = x.shape[1]
    return (x @ y.T / d + 1.0) ** degree


def mmd2_unbiased(x: np.ndarray, y: np.ndarray, degree: int = 3) -> float:
    """Unbiased squared MMD between two sample blocks (diagonals excluded)."""
    m, n = x.shape[0], y.shape[0]
    if m < 2 or n < 2:
        raise TooFewSamples(f"unbiased MMD^2 needs >= 2 samples per side, got {m} and {n}")
    kxx = polynomial_kernel(x, x, degree)
    kyy = polynomial_kernel(y, y, degree)
    kxy = polynomial_kernel(x, y, degree)
    sum_xx = (kxx.sum() - np.trace(kxx)) / (m * (m - 1))
    sum_yy = (kyy.sum() - np.trace(kyy)) / (n * (n - 1))
    return float(sum_xx + sum_yy - 2.0 * kxy.mean())


def kid_block_estimates(
    a: EmbeddingSet,
    b: EmbeddingSet,
    blocks: int = 10,
    seed: int = 0,
    degree: int = 3,
) -> list[float]:
    """Per-block unbiased MMD^2 estimates.

    Each set is shuffled with the given seed and split into ``blocks``
    disjoint equal blocks (remainders dropped). Deterministic for a fixed
    seed regardless of thread count: the computation is serial numpy.
    """
    if blocks < 2:
        raise ValueError(f"blocks must be >= 2, got {blocks}")
    if a.dim != b.dim:
        raise DimensionMismatch(f"embedding dims differ: {a.dim} vs {b.dim}")
    if a.n < blocks * 2 or b.n < blocks * 2:
        raise TooFewSamples(
            f"need >= {blocks * 2} samples per set for {blocks} blocks, got {a.n} and {b.n}"
        )
    rng = np.random.default_rng(seed)
    xa = a.vectors.astype(np.float64)[rng.permutation(a.n)]
    xb = b.vectors.astype(np.float64)[rng.permutation(b.n)]
    ma, mb = a.n // blocks, b.n // blocks
    return [
        mmd2_unbiased(xa[i * ma : (i + 1) * ma], xb[i * mb : (i + 1) * mb], degree)
        for i in range(blocks)
    ]


def kid(
    a: EmbeddingSet,
    b: EmbeddingSet,
    blocks: int = 10,
    seed: int = 0,
    degree: int = 3,
    display_scale: float = 100.0,
) -> KidEstimate:
    """Kernel distance as mean +/- std of per-block unbiased MMD^2 estimates."""
    estimates = kid_block_estimates(a, b, blocks=blocks, seed=seed, degree=degree)
    arr = np.asarray(estimates)
    return KidEstimate(
        value=float(arr.mean()),
        std=float(arr.std()),
        blocks=blocks,
        block_size=min(a.n // blocks, b.n // blocks),
        display_scale=display_scale,
    )


def _unit_normalize(feat: np.ndarray) -> np.ndarray:
    norm = np.sqrt(np.sum(feat**2, axis=0, keepdims=True))
    return feat / (norm + _NORM_EPS)


def lpips(
    f_x: list[np.ndarray],
    f_y: list[np.ndarray],
    w: LpipsWeights | None = None,
) -> float:
    """Perceptual distance over layered feature stacks.

    Per layer: unit-normalize each spatial position's channel vector,
    square the difference, weight per channel, average spatially; the
    layer contributions are summed. Weights default to all ones.
    """
    if len(f_x) != len(f_y):
        raise ShapeMismatch(f"layer counts differ: {len(f_x)} vs {len(f_y)}")
    if w is None:
        w = LpipsWeights(per_layer=tuple(np.ones(f.shape[0]) for f in f_x))
    if w.layer_count != len(f_x):
        raise ShapeMismatch(f"weights cover {w.layer_count} layers, features have {len(f_x)}")
    total = 0.0
    for li, (fx, fy) in enumerate(zip(f_x, f_y)):
        fx = np.asarray(fx, dtype=np.float64)
        fy = np.asarray(fy, dtype=np.float64)
        if fx.shape != fy.shape:
            raise ShapeMismatch(f"layer {li}: feature shapes differ: {fx.shape} vs {fy.shape}")
        if fx.ndim != 3:
            raise ShapeMismatch(f"layer {li}: expected (C, H, W) features, got {fx.shape}")
        wl = w.per_layer[li]
        if wl.shape[0] != fx.shape[0]:
            raise ShapeMismatch(
                f"layer {li}: {wl.shape[0]} channel weights for {fx.shape[0]} channels"
            )
        diff2 = (_unit_normalize(fx) - _unit_normalize(fy)) ** 2
        weighted = np.tensordot(wl, diff2, axes=(0, 0))
        total += float(weighted.mean())
    return total


def lpips_pairwise(
    gen: EmbeddingSet,
    real: EmbeddingSet,
    w: LpipsWeights | None = None,
) -> list[float]:
    """Row-aligned LPIPS values between two layered embedding sets."""
    if gen.layer_shapes is None or real.layer_shapes is None:
        raise ShapeMismatch("LPIPS needs layered feature sets (header 'layers' present)")
    if gen.layer_shapes != real.layer_shapes:
        raise ShapeMismatch("layer shapes of the two sets differ")
    if gen.n != real.n:
        raise ShapeMismatch(f"set sizes differ: {gen.n} vs {real.n}")
    if w is None:
        w = LpipsWeights.uniform(gen.layer_shapes)
    return [lpips(gen.feature_stack(i), real.feature_stack(i), w) for i in range(gen.n)]
