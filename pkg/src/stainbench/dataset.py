"""Tile loading, manifest parsing, stem pairing and stratified sampling.

Tiles are PNG or TIFF, 8- or 16-bit, 1 or 3 channels, normalized to [0, 1]
on load (8-bit by 255, 16-bit by 65535). Manifests are JSON lines, one
record per evaluation unit, so large tile sets stream without loading
everything up front.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .core import EvalTriplet, Her2Score, ImageTensor
from .errors import (
    DataError,
    EmptyIntersection,
    InsufficientClass,
    IoError,
    ShapeMismatch,
    UnsupportedFormat,
)

TILE_SUFFIXES = (".png", ".tif", ".tiff")

_8BIT_MODES = {"L", "RGB"}
_16BIT_MODES = {"I", "I;16", "I;16L", "I;16B"}


def load_tile(path: str | Path) -> ImageTensor:
    """Read one tile into a normalized (1, C, H, W) tensor."""
    path = Path(path)
    if path.suffix.lower() not in TILE_SUFFIXES:
        raise UnsupportedFormat(f"{path}: expected one of {TILE_SUFFIXES}")
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            arr = np.asarray(img)
    except FileNotFoundError as exc:
        raise IoError(f"tile not found: {path}") from exc
    except OSError as exc:
        raise IoError(f"cannot read tile {path}: {exc}") from exc
    if mode in _8BIT_MODES:
        scale = 255.0
    elif mode in _16BIT_MODES:
        scale = 65535.0
    else:
        raise UnsupportedFormat(f"{path}: unsupported image mode {mode!r}")
    data = arr.astype(np.float64) / scale
    if data.ndim == 2:
        data = data[np.newaxis]
    else:
        data = np.moveaxis(data, -1, 0)
    return ImageTensor.from_array(data, copy=False)


def save_tile(t: ImageTensor, path: str | Path) -> None:
    """Write a batch-1 tensor as an 8-bit PNG/TIFF (round-trips 8-bit data exactly)."""
    path = Path(path)
    if t.batch != 1:
        raise ShapeMismatch(f"save_tile expects batch size 1, got {t.batch}")
    arr = np.round(t.data[0] * 255.0).astype(np.uint8)
    if t.channels == 1:
        img = Image.fromarray(arr[0], mode="L")
    else:
        img = Image.fromarray(np.moveaxis(arr, 0, -1), mode="RGB")
    try:
        img.save(path)
    except OSError as exc:
        raise IoError(f"cannot write tile {path}: {exc}") from exc


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    he_path: Path
    real_ihc_path: Path
    gen_ihc_path: Path | None
    her2_score: Her2Score


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    split: str | None = None

    def by_score(self) -> dict[Her2Score, list[ManifestEntry]]:
        groups: dict[Her2Score, list[ManifestEntry]] = {s: [] for s in Her2Score}
        for e in self.entries:
            groups[e.her2_score].append(e)
        return groups

    def entry(self, entry_id: str) -> ManifestEntry:
        for e in self.entries:
            if e.id == entry_id:
                return e
        raise KeyError(entry_id)


_SPLITS = {"train", "val", "test"}


def load_manifest(path: str | Path, check_files: bool = True) -> DatasetManifest:
    """Parse a JSON-lines manifest; optionally verify every referenced file exists."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read manifest {path}: {exc}") from exc
    entries: list[ManifestEntry] = []
    ids: set[str] = set()
    splits: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        try:
            entry_id = str(rec["id"])
            he = Path(rec["he_path"])
            real = Path(rec["real_ihc_path"])
            gen = Path(rec["gen_ihc_path"]) if rec.get("gen_ihc_path") else None
            score = Her2Score(str(rec["her2_score"]))
        except KeyError as exc:
            raise DataError(f"{path}:{lineno}: missing field {exc}") from exc
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad her2_score: {exc}") from exc
        if entry_id in ids:
            raise DataError(f"{path}:{lineno}: duplicate id {entry_id!r}")
        ids.add(entry_id)
        if "split" in rec:
            split = str(rec["split"])
            if split not in _SPLITS:
                raise DataError(f"{path}:{lineno}: split must be one of {sorted(_SPLITS)}")
            splits.add(split)
        entries.append(ManifestEntry(entry_id, he, real, gen, score))
    if len(splits) > 1:
        raise DataError(f"{path}: mixed split tags {sorted(splits)}")
    if check_files:
        missing = []
        for e in entries:
            for p in (e.he_path, e.real_ihc_path, e.gen_ihc_path):
                if p is not None and not p.exists():
                    missing.append(str(p))
        if missing:
            preview = ", ".join(missing[:5])
            raise IoError(f"{path}: {len(missing)} referenced file(s) missing: {preview}")
    return DatasetManifest(entries=tuple(entries), split=splits.pop() if splits else None)


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            rec = {
                "id": e.id,
                "he_path": str(e.he_path),
                "real_ihc_path": str(e.real_ihc_path),
                "gen_ihc_path": str(e.gen_ihc_path) if e.gen_ihc_path else None,
                "her2_score": e.her2_score.value,
            }
            if manifest.split:
                rec["split"] = manifest.split
            fh.write(json.dumps(rec) + "\n")


@dataclass(frozen=True)
class TripletPaths:
    """Stem-matched file locations; images are loaded lazily per triplet."""

    id: str
    he_path: Path
    real_ihc_path: Path
    gen_ihc_path: Path


@dataclass(frozen=True)
class PairingResult:
    pairs: tuple[TripletPaths, ...]
    unpaired: dict[str, tuple[str, ...]]  # directory label -> stems missing elsewhere

    def unpaired_report(self) -> str:
        lines = []
        for label, stems in self.unpaired.items():
            for stem in stems:
                lines.append(f"unpaired: {stem} (only reachable via {label})")
        return "\n".join(lines)


def _stem_index(directory: Path) -> dict[str, Path]:
    index: dict[str, Path] = {}
    for p in sorted(directory.iterdir()):
        if p.is_file() and p.suffix.lower() in TILE_SUFFIXES:
            if p.stem in index:
                raise DataError(f"{directory}: ambiguous stem {p.stem!r} ({index[p.stem].name} vs {p.name})")
            index[p.stem] = p
    return index


def pair_by_stem(he_dir: str | Path, real_dir: str | Path, gen_dir: str | Path) -> PairingResult:
    """Match tiles across three directories by filename stem (case-sensitive)."""
    dirs = {"he": Path(he_dir), "real": Path(real_dir), "gen": Path(gen_dir)}
    for label, d in dirs.items():
        if not d.is_dir():
            raise IoError(f"{label} directory does not exist: {d}")
    indexes = {label: _stem_index(d) for label, d in dirs.items()}
    common = sorted(set.intersection(*(set(ix) for ix in indexes.values())))
    if not common:
        raise EmptyIntersection(
            "no filename stems common to all three directories: "
            + ", ".join(str(d) for d in dirs.values())
        )
    pairs = tuple(
        TripletPaths(
            id=stem,
            he_path=indexes["he"][stem],
            real_ihc_path=indexes["real"][stem],
            gen_ihc_path=indexes["gen"][stem],
        )
        for stem in common
    )
    common_set = set(common)
    unpaired = {
        label: tuple(sorted(set(ix) - common_set))
        for label, ix in indexes.items()
        if set(ix) - common_set
    }
    return PairingResult(pairs=pairs, unpaired=unpaired)


def load_triplet(paths: TripletPaths, her2_score: Her2Score = Her2Score.ZERO) -> EvalTriplet:
    return EvalTriplet(
        he=load_tile(paths.he_path),
        real_ihc=load_tile(paths.real_ihc_path),
        gen_ihc=load_tile(paths.gen_ihc_path),
        her2_score=her2_score,
        id=paths.id,
    )


def stratified_sample(manifest: DatasetManifest, n: int, seed: int) -> list[str]:
    """Draw n ids evenly across the four HER2 scores, deterministically.

    Per-class counts differ by at most one; when n is not divisible by 4
    the largest classes receive the extras, ties broken by seeded order.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    groups = manifest.by_score()
    need = math.ceil(n / len(Her2Score))
    for score, entries in groups.items():
        if len(entries) < need:
            raise InsufficientClass(
                f"HER2 score {score} has {len(entries)} entries, need >= {need} for n={n}"
            )
    rng = np.random.default_rng(seed)
    scores = list(Her2Score)
    tie_break = rng.permutation(len(scores))
    order = sorted(range(len(scores)), key=lambda i: (-len(groups[scores[i]]), tie_break[i]))
    base, extra = divmod(n, len(scores))
    counts = {scores[i]: base for i in range(len(scores))}
    for i in order[:extra]:
        counts[scores[i]] += 1
    sampled: list[str] = []
    for score in scores:
        ids = [e.id for e in groups[score]]
        perm = rng.permutation(len(ids))
        sampled.extend(ids[j] for j in perm[: counts[score]])
    return sampled
