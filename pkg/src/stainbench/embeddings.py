"""Embedding sets and their on-disk format.

No embedding network ships with the toolkit; FID/KID/LPIPS consume files
produced by any external extractor. The format is deliberately trivial to
write from any ecosystem:

    magic   5 bytes           b"STEM1"
    hlen    uint32 LE         byte length of the JSON header
    header  hlen bytes UTF-8  {"n": N, "d": D, "layers": [[c, h, w], ...] | null,
                               "dtype": "f32le"}
    payload N * D float32 LE  row-major; for layered sets D is the summed
                              layer size c*h*w and each row is one image's
                              concatenated per-layer feature maps

An extractor executable can also be invoked directly: it receives one
image path per stdin line, must write the embedding file to the path
given by ``--out`` and exit 0.
"""

from __future__ import annotations

import json
import struct
import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadMagic, IoError, ShapeMismatch, TooFewSamples

MAGIC = b"STEM1"
_HLEN = struct.Struct("<I")

LayerShape = tuple[int, int, int]


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """N x D matrix of feature vectors, optionally structured into layers."""

    vectors: np.ndarray
    layer_shapes: tuple[LayerShape, ...] | None = None
    source_tag: str = ""

    def __post_init__(self) -> None:
        v = np.asarray(self.vectors, dtype=np.float32)
        if v.ndim != 2:
            raise ShapeMismatch(f"vectors must be 2-D (N, D), got {v.ndim} dims")
        if not np.all(np.isfinite(v)):
            raise ShapeMismatch("embedding vectors contain non-finite values")
        if self.layer_shapes is not None:
            total = sum(c * h * w for c, h, w in self.layer_shapes)
            if total != v.shape[1]:
                raise ShapeMismatch(
                    f"layer shapes sum to {total} features but vectors have D={v.shape[1]}"
                )
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def feature_stack(self, index: int) -> list[np.ndarray]:
        """Row ``index`` unpacked into per-layer (C, H, W) feature maps."""
        if self.layer_shapes is None:
            raise ShapeMismatch("embedding set has no layer structure")
        row = self.vectors[index].astype(np.float64)
        out: list[np.ndarray] = []
        offset = 0
        for c, h, w in self.layer_shapes:
            size = c * h * w
            out.append(row[offset : offset + size].reshape(c, h, w))
            offset += size
        return out


def save_embeddings(es: EmbeddingSet, path: str | Path) -> None:
    path = Path(path)
    header = {
        "n": es.n,
        "d": es.dim,
        "layers": [list(s) for s in es.layer_shapes] if es.layer_shapes is not None else None,
        "dtype": "f32le",
    }
    header_bytes = json.dumps(header, separators=(",", ":")).encode("utf-8")
    payload = np.ascontiguousarray(es.vectors, dtype="<f4").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(_HLEN.pack(len(header_bytes)))
            fh.write(header_bytes)
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write embedding file {path}: {exc}") from exc


def load_embeddings(path: str | Path) -> EmbeddingSet:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read embedding file {path}: {exc}") from exc
    if len(raw) < len(MAGIC) + _HLEN.size:
        raise BadMagic(f"{path}: file shorter than the fixed header")
    if raw[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"{path}: bad magic bytes {raw[:len(MAGIC)]!r}")
    (hlen,) = _HLEN.unpack_from(raw, len(MAGIC))
    header_end = len(MAGIC) + _HLEN.size + hlen
    if len(raw) < header_end:
        raise ShapeMismatch(f"{path}: truncated header")
    try:
        header = json.loads(raw[len(MAGIC) + _HLEN.size : header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ShapeMismatch(f"{path}: unparseable header: {exc}") from exc
    if header.get("dtype") != "f32le":
        raise ShapeMismatch(f"{path}: unsupported dtype {header.get('dtype')!r}")
    n, d = int(header["n"]), int(header["d"])
    expected = n * d * 4
    payload = raw[header_end:]
    if len(payload) != expected:
        raise ShapeMismatch(
            f"{path}: payload is {len(payload)} bytes, header promises {expected}"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(n, d)
    layers = header.get("layers")
    layer_shapes = tuple(tuple(int(x) for x in s) for s in layers) if layers else None
    return EmbeddingSet(vectors=vectors, layer_shapes=layer_shapes, source_tag=path.stem)


def require_samples(es: EmbeddingSet, minimum: int = 2) -> None:
    if es.n < minimum:
        raise TooFewSamples(f"need at least {minimum} embeddings, got {es.n}")


def run_extractor(
    exe: str | Path,
    image_paths: list[str | Path],
    out_path: str | Path,
    timeout: float | None = None,
) -> EmbeddingSet:
    """Invoke an external embedding extractor over its stdin/stdout contract."""
    stdin = "".join(f"{p}\n" for p in image_paths)
    try:
        proc = subprocess.run(
            [str(exe), "--out", str(out_path)],
            input=stdin.encode("utf-8"),
            capture_output=True,
            timeout=timeout,
        )
    except OSError as exc:
        raise IoError(f"cannot launch extractor {exe}: {exc}") from exc
    except subprocess.TimeoutExpired as exc:
        raise IoError(f"extractor {exe} timed out") from exc
    if proc.returncode != 0:
        tail = proc.stderr.decode("utf-8", "replace")[-500:]
        raise IoError(f"extractor {exe} exited with {proc.returncode}: {tail}")
    return load_embeddings(out_path)
