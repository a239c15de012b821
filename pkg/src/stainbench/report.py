"""MetricReport serialization: CSV, JSON and a benchmark-style Markdown table.

CSV and JSON store values at full precision (Python float repr, which
round-trips exactly). Markdown applies the display conventions of the
benchmark tables: two decimals for unit-scale metrics, integers for FID
and PSNR, one decimal for KID at its display scale.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .core import MetricReport, MetricRow

CSV_HEADER = "model,metric,mean,std,n"
PER_IMAGE_CSV_HEADER = "model,metric,id,value"

# Benchmark-table column order; lower-is-better metrics first.
METRIC_COLUMNS = ("lpips", "fid", "kid", "ssim", "ms_ssim", "css", "psnr")

_ARROWS = {
    "lpips": "↓",
    "fid": "↓",
    "kid": "↓",
    "ssim": "↑",
    "ms_ssim": "↑",
    "css": "↑",
    "psnr": "↑",
    "css_loss": "↓",
    "pyramid_l1": "↓",
}

_DISPLAY_NAMES = {
    "lpips": "LPIPS",
    "fid": "FID",
    "kid": "KID",
    "ssim": "SSIM",
    "ms_ssim": "MS-SSIM",
    "css": "CSS",
    "psnr": "PSNR",
    "css_loss": "CSS loss",
    "pyramid_l1": "Pyramid L1",
}


def _fmt(value: float) -> str:
    return repr(float(value))


def write_csv(report: MetricReport, path: str | Path) -> None:
    lines = [CSV_HEADER]
    for row in report.rows:
        lines.append(f"{row.model_name},{row.metric_name},{_fmt(row.mean)},{_fmt(row.std)},{row.n}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_per_image_csv(report: MetricReport, path: str | Path) -> None:
    lines = [PER_IMAGE_CSV_HEADER]
    for row in report.rows:
        ids = row.per_image_ids or tuple(str(i) for i in range(row.n))
        for item_id, value in zip(ids, row.per_image_values):
            lines.append(f"{row.model_name},{row.metric_name},{item_id},{_fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def report_to_dict(report: MetricReport) -> dict:
    return {
        "rows": [
            {
                "model_name": row.model_name,
                "metric_name": row.metric_name,
                "per_image_values": list(row.per_image_values),
                "per_image_ids": list(row.per_image_ids) if row.per_image_ids else None,
                "aggregates": {"mean": row.mean, "std": row.std},
            }
            for row in report.rows
        ],
        "meta": report.meta,
    }


def write_json(report: MetricReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")


def read_json(path: str | Path) -> MetricReport:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    rows = tuple(
        MetricRow(
            model_name=rec["model_name"],
            metric_name=rec["metric_name"],
            per_image_values=tuple(rec["per_image_values"]),
            per_image_ids=tuple(rec["per_image_ids"]) if rec.get("per_image_ids") else None,
            mean=rec["aggregates"]["mean"],
            std=rec["aggregates"]["std"],
        )
        for rec in payload["rows"]
    )
    return MetricReport(rows=rows, meta=payload.get("meta", {}))


def format_cell(metric: str, mean: float, std: float, kid_scale: float = 100.0) -> str:
    if math.isinf(mean):
        return "inf"
    if metric == "fid":
        return f"{mean:.0f}"
    if metric == "kid":
        return f"{mean * kid_scale:.1f} ± {std * kid_scale:.1f}"
    if metric == "psnr":
        return f"{mean:.0f} ± {std:.0f}"
    if metric in ("css_loss", "pyramid_l1"):
        return f"{mean:.3f} ± {std:.3f}"
    return f"{mean:.2f} ± {std:.2f}"


def _column_label(metric: str) -> str:
    name = _DISPLAY_NAMES.get(metric, metric)
    arrow = _ARROWS.get(metric)
    return f"{name} {arrow}" if arrow else name


def render_markdown(report: MetricReport, columns: tuple[str, ...] | None = None) -> str:
    """One table row per model, metric columns in benchmark order."""
    meta = report.meta
    kid_scale = float(meta.get("kid_display_scale", 100.0))
    present = {row.metric_name for row in report.rows}
    if columns is None:
        ordered = [m for m in METRIC_COLUMNS if m in present]
        ordered += [m for m in dict.fromkeys(r.metric_name for r in report.rows) if m not in ordered]
    else:
        ordered = [m for m in columns if m in present]
    models = list(dict.fromkeys(row.model_name for row in report.rows))
    lines = []
    title = meta.get("title", "Evaluation results")
    lines.append(f"## {title}")
    lines.append("")
    if "n_items" in meta:
        lines.append(f"Images evaluated: {meta['n_items']}.")
    if meta.get("n_failures"):
        lines.append(
            f"Excluded {meta['n_failures']} failed tile(s); see the JSON report for details."
        )
    if "kid" in present:
        lines.append(f"KID column shown at ×{kid_scale:g} scale; raw values in CSV/JSON.")
    lines.append("")
    header = "| Model | " + " | ".join(_column_label(m) for m in ordered) + " |"
    sep = "|" + "---|" * (len(ordered) + 1)
    lines.append(header)
    lines.append(sep)
    by_key = {(row.model_name, row.metric_name): row for row in report.rows}
    for model in models:
        cells = []
        for metric in ordered:
            row = by_key.get((model, metric))
            cells.append(format_cell(metric, row.mean, row.std, kid_scale) if row else "-")
        lines.append(f"| {model} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_markdown(report: MetricReport, path: str | Path) -> None:
    Path(path).write_text(render_markdown(report), encoding="utf-8")
