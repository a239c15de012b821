"""Shared domain types: image tensors, evaluation triplets and metric reports.

All containers are immutable after construction (arrays are marked
read-only), so instances can be shared freely across worker threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadShape, OutOfRange, ShapeMismatch

SUPPORTED_CHANNELS = (1, 3)


class Her2Score(str, enum.Enum):
    """Clinical HER2 score attached to every tile."""

    ZERO = "0"
    ONE_PLUS = "1+"
    TWO_PLUS = "2+"
    THREE_PLUS = "3+"

    def __str__(self) -> str:  # keeps f-strings printing "1+" not "Her2Score.ONE_PLUS"
        return self.value


HER2_SCORES = tuple(Her2Score)


@dataclass(frozen=True, eq=False)
class ImageTensor:
    """A (B, C, H, W) array of intensities in [0, 1].

    The single operand type of every image metric. Use :meth:`from_array`
    to build one; the constructor itself trusts its input.
    """

    data: np.ndarray

    @classmethod
    def from_array(cls, arr: np.ndarray | list, copy: bool = True) -> "ImageTensor":
        """Validate and wrap an array, promoting 2-D (H, W) and 3-D (C, H, W) input."""
        data = np.array(arr, dtype=np.float64, copy=copy)
        if data.ndim == 2:
            data = data[np.newaxis, np.newaxis]
        elif data.ndim == 3:
            data = data[np.newaxis]
        _check_tensor(data)
        data.flags.writeable = False
        return cls(data)

    @property
    def batch(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[2]

    @property
    def width(self) -> int:
        return self.data.shape[3]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape  # type: ignore[return-value]


def _check_tensor(data: np.ndarray) -> None:
    if data.ndim != 4:
        raise BadShape(f"expected 4 dims (B, C, H, W), got {data.ndim}")
    b, c, h, w = data.shape
    if b < 1 or h < 1 or w < 1:
        raise BadShape(f"zero-sized dimension in shape {data.shape}")
    if c not in SUPPORTED_CHANNELS:
        raise BadShape(f"unsupported channel count {c}, expected one of {SUPPORTED_CHANNELS}")
    if not np.all(np.isfinite(data)):
        raise OutOfRange("tensor contains non-finite values")
    lo = float(data.min())
    hi = float(data.max())
    if lo < 0.0 or hi > 1.0:
        raise OutOfRange(f"intensities outside [0, 1]: min={lo}, max={hi}")


def validate_tensor(t: ImageTensor) -> None:
    """Re-check all ImageTensor invariants; raises OutOfRange or BadShape."""
    if not isinstance(t.data, np.ndarray):
        raise BadShape("ImageTensor.data is not an ndarray")
    _check_tensor(np.asarray(t.data, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class EvalTriplet:
    """One evaluation unit: H&E input, real IHC, generated IHC, plus label."""

    he: ImageTensor
    real_ihc: ImageTensor
    gen_ihc: ImageTensor
    her2_score: Her2Score
    id: str

    def __post_init__(self) -> None:
        shapes = {self.he.shape, self.real_ihc.shape, self.gen_ihc.shape}
        if len(shapes) != 1:
            raise ShapeMismatch(
                f"triplet {self.id!r}: tensors disagree on shape: "
                f"{self.he.shape} / {self.real_ihc.shape} / {self.gen_ihc.shape}"
            )
        if self.he.batch != 1:
            raise BadShape(f"triplet {self.id!r}: expected batch size 1, got {self.he.batch}")


def aggregate(values: list[float] | tuple[float, ...], sample_std: bool = False) -> tuple[float, float]:
    """Mean and standard deviation of a value list.

    Population std by default; pass ``sample_std=True`` for the N-1 form.
    A constant list (including the all-inf PSNR case) gets std 0 exactly.
    """
    if len(values) == 0:
        raise ValueError("cannot aggregate an empty value list")
    arr = np.asarray(values, dtype=np.float64)
    if np.all(arr == arr[0]):
        return float(arr[0]), 0.0
    mean = float(np.mean(arr))
    if not np.all(np.isfinite(arr)):
        # A mix of finite and infinite values has no meaningful spread.
        return mean, float("nan")
    ddof = 1 if sample_std else 0
    if sample_std and len(values) < 2:
        return mean, 0.0
    return mean, float(np.std(arr, ddof=ddof))


@dataclass(frozen=True)
class MetricRow:
    """Per-image values for one (model, metric) pair plus their aggregates."""

    model_name: str
    metric_name: str
    per_image_values: tuple[float, ...]
    per_image_ids: tuple[str, ...] | None
    mean: float
    std: float

    @classmethod
    def build(
        cls,
        model_name: str,
        metric_name: str,
        values: list[float] | tuple[float, ...],
        ids: list[str] | tuple[str, ...] | None = None,
        sample_std: bool = False,
    ) -> "MetricRow":
        if ids is not None and len(ids) != len(values):
            raise ValueError("per_image_ids length must match per_image_values")
        mean, std = aggregate(values, sample_std=sample_std)
        return cls(
            model_name=model_name,
            metric_name=metric_name,
            per_image_values=tuple(float(v) for v in values),
            per_image_ids=tuple(ids) if ids is not None else None,
            mean=mean,
            std=std,
        )

    @property
    def n(self) -> int:
        return len(self.per_image_values)


@dataclass(frozen=True)
class MetricReport:
    """Ordered collection of metric rows with report-level metadata."""

    rows: tuple[MetricRow, ...]
    meta: dict = field(default_factory=dict)

    def row(self, metric_name: str, model_name: str | None = None) -> MetricRow:
        for r in self.rows:
            if r.metric_name == metric_name and (model_name is None or r.model_name == model_name):
                return r
        raise KeyError(f"no row for metric {metric_name!r}")

    def metric_names(self) -> list[str]:
        return [r.metric_name for r in self.rows]


def is_inf(value: float) -> bool:
    return math.isinf(value)
