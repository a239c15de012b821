"""Value-only computation of the image-space training objectives.

These audit losses used by external training code; no gradients are
produced. The contrast-structure loss shares its windowed-statistics
kernel with the CSS metric so the two always agree on what "structure"
means.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ImageTensor
from .pixel_metrics import PyramidConfig, SsimConfig, local_stats
from .pixel_metrics import pyramid_l1 as _pyramid_l1


@dataclass(frozen=True)
class CssLossConfig:
    """Stabilization constants for the contrast-structure loss.

    ``epsilon`` stabilizes the CS ratio; ``log_floor`` clamps the log
    argument away from zero, bounding the loss at -log(log_floor).
    """

    epsilon: float = 1e-4
    log_floor: float = 1e-7
    window: SsimConfig = field(default_factory=SsimConfig)

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if not 0.0 < self.log_floor < 1.0:
            raise ValueError("log_floor must be in (0, 1)")


def css_loss(x: ImageTensor, y_hat: ImageTensor, cfg: CssLossConfig | None = None) -> float:
    """Negative-log contrast-structure loss between an input and a generated image.

    Per batch sample: map the windowed CS ratio (2*cov + eps)/(var_x + var_y + eps)
    through (r + 1)/2 into [0, 1], average over channels and window positions,
    clamp at ``log_floor``, take -log; the loss is the batch mean. Zero iff the
    images agree perfectly, and bounded above by -log(log_floor).
    """
    cfg = cfg or CssLossConfig()
    stats = local_stats(x, y_hat, cfg.window)
    ratio = (2.0 * stats.cov_xy + cfg.epsilon) / (stats.var_x + stats.var_y + cfg.epsilon)
    term = (ratio + 1.0) / 2.0
    per_sample = term.reshape(term.shape[0], -1).mean(axis=1)
    clamped = np.maximum(per_sample, cfg.log_floor)
    return float(-np.mean(np.log(clamped)))


def pyramid_l1_loss(a: ImageTensor, b: ImageTensor, cfg: PyramidConfig | None = None) -> float:
    """Pyramid L1 under its loss name; identical to the metric computation."""
    return _pyramid_l1(a, b, cfg)
