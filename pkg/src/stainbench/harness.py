"""Metric battery over triplet datasets, loss audits and checkpoint selection.

Work is parallelized across triplets with a deterministic index-ordered
merge, so the emitted reports are byte-identical regardless of worker
count. Tile-level failures are excluded from aggregates and surfaced in
the report metadata.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import distribution, pixel_metrics
from .config import EvalConfig, PAIRWISE_METRICS
from .core import EvalTriplet, Her2Score, MetricReport, MetricRow
from .dataset import (
    DatasetManifest,
    load_manifest,
    load_tile,
    pair_by_stem,
)
from .embeddings import load_embeddings
from .errors import DataError, IoError, MetricUnavailable, NoRuns, StainbenchError
from .losses import css_loss, pyramid_l1_loss
from .report import METRIC_COLUMNS

EXPECTED_TILE_SIDE = 1024


@dataclass(frozen=True)
class TileFailure:
    id: str
    error: str


@dataclass(frozen=True)
class TripletSpec:
    """Paths of one evaluation unit, loaded lazily inside the worker."""

    id: str
    he_path: Path
    real_path: Path
    gen_path: Path
    her2_score: Her2Score = Her2Score.ZERO


def _specs_from_manifest(manifest: DatasetManifest) -> list[TripletSpec]:
    specs = []
    for e in manifest.entries:
        if e.gen_ihc_path is None:
            raise DataError(f"manifest entry {e.id!r} lacks gen_ihc_path; cannot evaluate")
        specs.append(TripletSpec(e.id, e.he_path, e.real_ihc_path, e.gen_ihc_path, e.her2_score))
    return specs


def _specs_from_dirs(he_dir: Path, real_dir: Path, gen_dir: Path) -> list[TripletSpec]:
    pairing = pair_by_stem(he_dir, real_dir, gen_dir)
    return [
        TripletSpec(p.id, p.he_path, p.real_ihc_path, p.gen_ihc_path) for p in pairing.pairs
    ]


def _load_checked(spec: TripletSpec, strict: bool) -> EvalTriplet:
    triplet = EvalTriplet(
        he=load_tile(spec.he_path),
        real_ihc=load_tile(spec.real_path),
        gen_ihc=load_tile(spec.gen_path),
        her2_score=spec.her2_score,
        id=spec.id,
    )
    if strict and (triplet.he.height != EXPECTED_TILE_SIDE or triplet.he.width != EXPECTED_TILE_SIDE):
        raise DataError(
            f"tile {spec.id!r} is {triplet.he.height}x{triplet.he.width}, "
            f"expected {EXPECTED_TILE_SIDE}x{EXPECTED_TILE_SIDE} under --strict"
        )
    return triplet


def _pairwise_metrics(triplet: EvalTriplet, cfg: EvalConfig) -> dict[str, float]:
    values: dict[str, float] = {}
    if cfg.enabled("ssim"):
        values["ssim"] = pixel_metrics.ssim(triplet.gen_ihc, triplet.real_ihc, cfg.ssim)
    if cfg.enabled("ms_ssim"):
        values["ms_ssim"] = pixel_metrics.ms_ssim(
            triplet.gen_ihc, triplet.real_ihc, cfg.ssim, scales=cfg.msssim_scales
        )
    if cfg.enabled("css"):
        values["css"] = pixel_metrics.css_metric(triplet.he, triplet.gen_ihc, cfg.ssim)
    if cfg.enabled("psnr"):
        values["psnr"] = pixel_metrics.psnr(
            triplet.gen_ihc, triplet.real_ihc, cfg.ssim.data_range
        )
    return values


def _run_indexed(
    specs: list[TripletSpec],
    cfg: EvalConfig,
    work,
) -> tuple[list[tuple[int, dict[str, float]]], list[TileFailure]]:
    """Run per-triplet work across a thread pool; merge results by index."""

    def task(idx: int):
        try:
            return idx, work(specs[idx]), None
        except DataError as exc:
            if cfg.strict:
                raise
            return idx, None, TileFailure(specs[idx].id, f"{type(exc).__name__}: {exc}")

    results: list[tuple[int, dict[str, float]]] = []
    failures: list[TileFailure] = []
    if cfg.workers == 1:
        raw = [task(i) for i in range(len(specs))]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            raw = list(pool.map(task, range(len(specs))))
    for idx, values, failure in sorted(raw, key=lambda r: r[0]):
        if failure is not None:
            failures.append(failure)
        else:
            results.append((idx, values))
    return results, failures


def evaluate(
    cfg: EvalConfig,
    manifest: DatasetManifest | None = None,
    he_dir: Path | None = None,
    real_dir: Path | None = None,
    gen_dir: Path | None = None,
) -> MetricReport:
    """Run the full configured metric battery and assemble a report."""
    cfg.validate()
    if manifest is not None:
        specs = _specs_from_manifest(manifest)
    elif he_dir and real_dir and gen_dir:
        specs = _specs_from_dirs(he_dir, real_dir, gen_dir)
    else:
        raise DataError("either a manifest or all three of he/real/gen directories are required")
    if not specs:
        raise DataError("no evaluation units found")

    needs_tiles = any(cfg.enabled(m) for m in PAIRWISE_METRICS) or cfg.strict
    if needs_tiles:
        results, failures = _run_indexed(
            specs, cfg, lambda s: _pairwise_metrics(_load_checked(s, cfg.strict), cfg)
        )
    else:
        results, failures = [(i, {}) for i in range(len(specs))], []
    if not results:
        raise DataError(
            f"all {len(specs)} evaluation units failed; first error: {failures[0].error}"
        )
    ok_indices = [idx for idx, _ in results]
    ok_ids = [specs[idx].id for idx in ok_indices]

    rows: list[MetricRow] = []
    per_metric: dict[str, list[float]] = {}
    for _, values in results:
        for name, value in values.items():
            per_metric.setdefault(name, []).append(value)

    if cfg.enabled("lpips"):
        gen_feats = load_embeddings(cfg.features_gen)
        real_feats = load_embeddings(cfg.features_real)
        if gen_feats.n != len(specs) or real_feats.n != len(specs):
            raise DataError(
                f"feature providers carry {gen_feats.n}/{real_feats.n} rows for "
                f"{len(specs)} evaluation units; rows must align with the manifest order"
            )
        all_lpips = distribution.lpips_pairwise(gen_feats, real_feats)
        per_metric["lpips"] = [all_lpips[idx] for idx in ok_indices]

    for name in ("lpips",) + PAIRWISE_METRICS:
        if name in per_metric:
            rows.append(
                MetricRow.build(cfg.model_name, name, per_metric[name], ids=ok_ids, sample_std=cfg.sample_std)
            )

    if cfg.enabled("fid") or cfg.enabled("kid"):
        gen_emb = load_embeddings(cfg.embeddings_gen)
        real_emb = load_embeddings(cfg.embeddings_real)
        if cfg.enabled("fid"):
            value = distribution.fid(
                distribution.fit_moments(gen_emb), distribution.fit_moments(real_emb)
            )
            rows.append(MetricRow.build(cfg.model_name, "fid", [value], ids=["set"]))
        if cfg.enabled("kid"):
            block_values = distribution.kid_block_estimates(
                gen_emb, real_emb, blocks=cfg.kid_blocks, seed=cfg.seed
            )
            rows.append(
                MetricRow.build(
                    cfg.model_name,
                    "kid",
                    block_values,
                    ids=[f"block-{i}" for i in range(cfg.kid_blocks)],
                )
            )

    ordered = sorted(rows, key=lambda r: METRIC_COLUMNS.index(r.metric_name))
    meta = {
        "title": f"Evaluation results: {cfg.model_name}",
        "n_items": len(ok_indices),
        "n_failures": len(failures),
        "failures": [{"id": f.id, "error": f.error} for f in failures],
        "seed": cfg.seed,
        "kid_display_scale": cfg.kid_display_scale,
        "std_kind": "sample" if cfg.sample_std else "population",
    }
    return MetricReport(rows=tuple(ordered), meta=meta)


def audit_losses(he_dir: Path, gen_dir: Path, cfg: EvalConfig) -> MetricReport:
    """Per-image CSS loss and pyramid L1 loss between paired directories.

    Pairing is strict: any stem present on only one side aborts with the
    offending stems named.
    """
    from .dataset import _stem_index  # shared directory indexing

    for label, d in (("he", he_dir), ("gen", gen_dir)):
        if not Path(d).is_dir():
            raise IoError(f"{label} directory does not exist: {d}")
    he_index = _stem_index(Path(he_dir))
    gen_index = _stem_index(Path(gen_dir))
    only_he = sorted(set(he_index) - set(gen_index))
    only_gen = sorted(set(gen_index) - set(he_index))
    if only_he or only_gen:
        missing = ", ".join(only_he[:5] + only_gen[:5])
        raise DataError(f"unpaired stems between {he_dir} and {gen_dir}: {missing}")
    stems = sorted(he_index)
    if not stems:
        raise DataError(f"no tiles found in {he_dir}")

    def work(spec: TripletSpec) -> dict[str, float]:
        he = load_tile(spec.he_path)
        gen = load_tile(spec.gen_path)
        return {
            "css_loss": css_loss(he, gen, cfg.css_loss),
            "pyramid_l1": pyramid_l1_loss(he, gen, cfg.pyramid),
        }

    specs = [TripletSpec(s, he_index[s], he_index[s], gen_index[s]) for s in stems]
    results, failures = _run_indexed(specs, cfg, work)
    ok_ids = [specs[idx].id for idx, _ in results]
    if not results:
        raise DataError("every tile pair failed; nothing to aggregate")
    rows = tuple(
        MetricRow.build(
            cfg.model_name,
            name,
            [values[name] for _, values in results],
            ids=ok_ids,
            sample_std=cfg.sample_std,
        )
        for name in ("css_loss", "pyramid_l1")
    )
    meta = {
        "title": f"Loss audit: {cfg.model_name}",
        "n_items": len(ok_ids),
        "n_failures": len(failures),
        "failures": [{"id": f.id, "error": f.error} for f in failures],
        "seed": cfg.seed,
    }
    return MetricReport(rows=rows, meta=meta)


@dataclass(frozen=True)
class RunSpec:
    """One checkpoint run: a tag plus its paired feature providers."""

    tag: str
    features_gen: Path
    features_real: Path


def load_runs(path: str | Path) -> list[RunSpec]:
    """Parse a runs JSONL file: {"tag", "features_gen", "features_real"} per line."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read runs file {path}: {exc}") from exc
    runs = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if "tag" not in rec:
            raise DataError(f"{path}:{lineno}: missing 'tag'")
        if "features_gen" not in rec or "features_real" not in rec:
            raise MetricUnavailable(
                f"{path}:{lineno}: run {rec.get('tag')!r} lacks feature providers for LPIPS"
            )
        runs.append(RunSpec(str(rec["tag"]), Path(rec["features_gen"]), Path(rec["features_real"])))
    return runs


def select_checkpoint(runs: list[RunSpec]) -> tuple[str, dict[str, float]]:
    """Tag with the minimum mean LPIPS; ties broken by earliest input order."""
    if not runs:
        raise NoRuns("no runs provided")
    means: dict[str, float] = {}
    best_tag: str | None = None
    best_value = float("inf")
    for run in runs:
        try:
            gen = load_embeddings(run.features_gen)
            real = load_embeddings(run.features_real)
        except IoError as exc:
            raise MetricUnavailable(f"run {run.tag!r}: {exc}") from exc
        values = distribution.lpips_pairwise(gen, real)
        mean = sum(values) / len(values)
        means[run.tag] = mean
        if mean < best_value:
            best_value = mean
            best_tag = run.tag
    assert best_tag is not None
    return best_tag, means


def format_diagnostic(exc: StainbenchError) -> str:
    return f"{type(exc).__name__}: {exc}"
