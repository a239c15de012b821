"""The ``stainbench`` command line.

    stainbench evaluate --manifest M.jsonl --out report/ [--config C.toml]
    stainbench select-checkpoint --runs runs.jsonl
    stainbench audit-loss --he DIR --gen DIR [--out report/]
    stainbench review build-session | serve | report | demo

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure; every failure prints a one-line diagnostic to stderr. The env
var STAINBENCH_SEED supplies the default seed.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import harness
from .config import SEED_ENV_VAR, apply_overrides, load_config
from .core import Her2Score
from .dataset import DatasetManifest, ManifestEntry, load_manifest, save_tile, write_manifest
from .errors import ConfigError, DataError, NumericError, StainbenchError
from .report import write_csv, write_json, write_markdown, write_per_image_csv

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _exit_code(exc: StainbenchError) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_DATA


def diagnose(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StainbenchError as exc:
            click.echo(f"stainbench: {harness.format_diagnostic(exc)}", err=True)
            sys.exit(_exit_code(exc))

    return wrapper


@click.group()
def main() -> None:
    """Virtual-staining evaluation toolkit."""


def _write_reports(report, out_dir: Path, formats: tuple[str, ...]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if "csv" in formats:
        write_csv(report, out_dir / "report.csv")
        write_per_image_csv(report, out_dir / "per_image.csv")
    if "json" in formats:
        write_json(report, out_dir / "report.json")
    if "md" in formats:
        write_markdown(report, out_dir / "report.md")


@main.command()
@click.option("--manifest", "manifest_path", type=click.Path(path_type=Path), default=None)
@click.option("--he", "he_dir", type=click.Path(path_type=Path), default=None)
@click.option("--real", "real_dir", type=click.Path(path_type=Path), default=None)
@click.option("--gen", "gen_dir", type=click.Path(path_type=Path), default=None)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
@click.option("--workers", type=int, default=None)
@click.option("--seed", type=int, default=None, help=f"overrides {SEED_ENV_VAR}")
@click.option("--model-name", type=str, default=None)
@click.option("--strict", is_flag=True, default=None)
@diagnose
def evaluate(manifest_path, he_dir, real_dir, gen_dir, out_dir, config_path, workers, seed, model_name, strict):
    """Run the metric battery over a triplet dataset and write reports."""
    cfg = apply_overrides(
        load_config(config_path), workers=workers, seed=seed, strict=strict, model_name=model_name
    )
    manifest = load_manifest(manifest_path) if manifest_path else None
    report = harness.evaluate(cfg, manifest=manifest, he_dir=he_dir, real_dir=real_dir, gen_dir=gen_dir)
    _write_reports(report, out_dir, cfg.output_formats)
    click.echo(f"evaluated {report.meta['n_items']} image(s); reports in {out_dir}")


@main.command("select-checkpoint")
@click.option("--runs", "runs_path", type=click.Path(path_type=Path), required=True)
@diagnose
def select_checkpoint(runs_path):
    """Pick the checkpoint with the lowest mean LPIPS from a runs JSONL file."""
    runs = harness.load_runs(runs_path)
    tag, means = harness.select_checkpoint(runs)
    for run in runs:
        click.echo(f"{run.tag}: mean lpips {means[run.tag]:.6f}", err=True)
    click.echo(tag)


@main.command("audit-loss")
@click.option("--he", "he_dir", type=click.Path(path_type=Path), required=True)
@click.option("--gen", "gen_dir", type=click.Path(path_type=Path), required=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None)
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
@click.option("--workers", type=int, default=None)
@diagnose
def audit_loss(he_dir, gen_dir, out_dir, config_path, workers):
    """Report per-image structure and pyramid losses between paired directories."""
    cfg = apply_overrides(load_config(config_path), workers=workers)
    report = harness.audit_losses(he_dir, gen_dir, cfg)
    if out_dir is not None:
        _write_reports(report, out_dir, cfg.output_formats)
    for row in report.rows:
        click.echo(f"{row.metric_name}: {row.mean:.6f} ± {row.std:.6f} (n={row.n})")


@main.group()
def review() -> None:
    """Blinded pathologist-review sessions."""


@review.command("build-session")
@click.option("--manifest", "manifest_path", type=click.Path(path_type=Path), required=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--n", type=int, default=500, show_default=True)
@click.option("--dup-rate", type=float, default=0.01, show_default=True)
@click.option("--raters", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@diagnose
def review_build_session(manifest_path, out_dir, n, dup_rate, raters, seed):
    """Create a session directory with items, tokens and an empty answer log."""
    from .review import build_session
    from .review.store import SessionStore

    manifest = load_manifest(manifest_path)
    session = build_session(manifest, n=n, dup_rate=dup_rate, seed=seed)
    store = SessionStore.create(session, [f"rater{i + 1}" for i in range(raters)], out_dir)
    click.echo(f"session with {len(session.items)} items written to {out_dir}")
    for token, rater in store.raters.items():
        click.echo(f"  {rater}: token {token}")
    click.echo(f"  admin token: {store.admin_token}")


@review.command("serve")
@click.option("--session", "session_dir", type=click.Path(path_type=Path), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(path_type=Path), default=None)
@diagnose
def review_serve(session_dir, host, port, ui_dir):
    """Serve the review API (and the UI, if a built frontend dir is given)."""
    import uvicorn

    from .review.service import create_app
    from .review.store import SessionStore

    store = SessionStore.load(session_dir)
    app = create_app(store, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@review.command("report")
@click.option("--session", "session_dir", type=click.Path(path_type=Path), required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "md"]), default="md", show_default=True)
@diagnose
def review_report(session_dir, fmt):
    """Compute the consensus report offline from a session directory."""
    from .review import consensus, render_consensus_table
    from .review.store import SessionStore

    store = SessionStore.load(session_dir)
    report = consensus(store.answers(), list(store.session.items), sorted(set(store.raters.values())))
    if fmt == "json":
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        click.echo(render_consensus_table(report), nl=False)


@review.command("demo")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--n", type=int, default=10, show_default=True)
@click.option("--dup-rate", type=float, default=0.1, show_default=True)
@click.option("--raters", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tile-size", type=int, default=64, show_default=True)
@diagnose
def review_demo(out_dir, n, dup_rate, raters, seed, tile_size):
    """Generate a synthetic dataset plus a ready-to-serve session (for trying the UI)."""
    from .core import ImageTensor
    from .review import build_session
    from .review.store import SessionStore

    out_dir = Path(out_dir)
    tiles_dir = out_dir / "tiles"
    tiles_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    scores = list(Her2Score)
    per_class = max(1, -(-n // len(scores)))  # ceil division
    entries = []
    for si, score in enumerate(scores):
        for j in range(per_class):
            stem = f"tile_{score.value.replace('+', 'p')}_{j:03d}"
            paths = {}
            for kind in ("he", "real", "gen"):
                img = ImageTensor.from_array(rng.random((1, 3, tile_size, tile_size)))
                path = tiles_dir / f"{stem}_{kind}.png"
                save_tile(img, path)
                paths[kind] = path
            entries.append(
                ManifestEntry(stem, paths["he"], paths["real"], paths["gen"], score)
            )
    manifest = DatasetManifest(entries=tuple(entries))
    write_manifest(manifest, out_dir / "manifest.jsonl")
    session = build_session(manifest, n=n, dup_rate=dup_rate, seed=seed)
    store = SessionStore.create(session, [f"rater{i + 1}" for i in range(raters)], out_dir)
    click.echo(f"demo session with {len(session.items)} items in {out_dir}")
    for token, rater in store.raters.items():
        click.echo(f"  {rater}: token {token}")
    click.echo(f"  admin token: {store.admin_token}")


if __name__ == "__main__":
    main()
