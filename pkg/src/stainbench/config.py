"""Benchmark configuration: TOML file plus CLI-flag overrides (flags win)."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .losses import CssLossConfig
from .pixel_metrics import PyramidConfig, SsimConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SEED_ENV_VAR = "STAINBENCH_SEED"

PAIRWISE_METRICS = ("ssim", "ms_ssim", "css", "psnr")
PROVIDER_METRICS = ("lpips", "fid", "kid")
ALL_METRICS = ("lpips", "fid", "kid") + PAIRWISE_METRICS


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class EvalConfig:
    metrics: dict[str, bool] = field(default_factory=lambda: {m: True for m in ALL_METRICS})
    model_name: str = "model"
    ssim: SsimConfig = field(default_factory=SsimConfig)
    pyramid: PyramidConfig = field(default_factory=PyramidConfig)
    css_loss: CssLossConfig = field(default_factory=CssLossConfig)
    msssim_scales: int = 5
    embeddings_real: Path | None = None
    embeddings_gen: Path | None = None
    features_real: Path | None = None
    features_gen: Path | None = None
    kid_blocks: int = 10
    kid_display_scale: float = 100.0
    seed: int = 0
    workers: int = 1
    strict: bool = False
    sample_std: bool = False
    output_formats: tuple[str, ...] = ("csv", "json", "md")

    def enabled(self, metric: str) -> bool:
        return bool(self.metrics.get(metric, False))

    def validate(self) -> None:
        unknown = set(self.metrics) - set(ALL_METRICS)
        if unknown:
            raise ConfigError(f"unknown metric toggle(s): {sorted(unknown)}")
        if not any(self.metrics.get(m, False) for m in ALL_METRICS):
            raise ConfigError("at least one metric must be enabled")
        if (self.enabled("fid") or self.enabled("kid")) and (
            self.embeddings_real is None or self.embeddings_gen is None
        ):
            raise ConfigError(
                "fid/kid enabled but embeddings_real/embeddings_gen provider paths missing"
            )
        if self.enabled("lpips") and (self.features_real is None or self.features_gen is None):
            raise ConfigError("lpips enabled but features_real/features_gen provider paths missing")
        if not (self.enabled("fid") or self.enabled("kid")) and (
            self.embeddings_real or self.embeddings_gen
        ):
            raise ConfigError("embedding provider paths given but fid/kid are disabled")
        if not self.enabled("lpips") and (self.features_real or self.features_gen):
            raise ConfigError("feature provider paths given but lpips is disabled")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.kid_blocks < 2:
            raise ConfigError(f"kid blocks must be >= 2, got {self.kid_blocks}")
        bad = set(self.output_formats) - {"csv", "json", "md"}
        if bad:
            raise ConfigError(f"unknown output format(s): {sorted(bad)}")


def _section(data: dict, name: str) -> dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"config section [{name}] must be a table")
    return value


def load_config(path: str | Path | None) -> EvalConfig:
    """Build an EvalConfig from a TOML file; None yields the defaults."""
    if path is None:
        return EvalConfig(seed=default_seed())
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    try:
        metrics = {m: True for m in ALL_METRICS}
        metrics.update({k: bool(v) for k, v in _section(data, "metrics").items()})
        ssim_cfg = SsimConfig(**_section(data, "ssim"))
        pyr_raw = dict(_section(data, "pyramid"))
        if "level_weights" in pyr_raw:
            pyr_raw["level_weights"] = tuple(float(x) for x in pyr_raw["level_weights"])
        pyramid_cfg = PyramidConfig(**pyr_raw)
        loss_raw = dict(_section(data, "css_loss"))
        css_cfg = CssLossConfig(window=ssim_cfg, **loss_raw)
        providers = _section(data, "providers")
        kid_section = _section(data, "kid")
        msssim_section = _section(data, "ms_ssim")
        cfg = EvalConfig(
            metrics=metrics,
            model_name=str(data.get("model_name", "model")),
            ssim=ssim_cfg,
            pyramid=pyramid_cfg,
            css_loss=css_cfg,
            msssim_scales=int(msssim_section.get("scales", 5)),
            embeddings_real=_opt_path(providers.get("embeddings_real")),
            embeddings_gen=_opt_path(providers.get("embeddings_gen")),
            features_real=_opt_path(providers.get("features_real")),
            features_gen=_opt_path(providers.get("features_gen")),
            kid_blocks=int(kid_section.get("blocks", 10)),
            kid_display_scale=float(kid_section.get("display_scale", 100.0)),
            seed=int(data.get("seed", default_seed())),
            workers=int(data.get("workers", 1)),
            strict=bool(data.get("strict", False)),
            sample_std=bool(data.get("sample_std", False)),
            output_formats=tuple(data.get("output_formats", ("csv", "json", "md"))),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value in config {path}: {exc}") from exc
    return cfg


def _opt_path(value) -> Path | None:
    return Path(value) if value else None


def apply_overrides(
    cfg: EvalConfig,
    workers: int | None = None,
    seed: int | None = None,
    strict: bool | None = None,
    model_name: str | None = None,
) -> EvalConfig:
    updates = {}
    if workers is not None:
        updates["workers"] = workers
    if seed is not None:
        updates["seed"] = seed
    if strict is not None:
        updates["strict"] = strict
    if model_name is not None:
        updates["model_name"] = model_name
    return replace(cfg, **updates) if updates else cfg
