from __future__ import annotations

import math

from stainbench.core import MetricReport, MetricRow
from stainbench.report import (
    CSV_HEADER,
    format_cell,
    render_markdown,
    write_csv,
    write_per_image_csv,
)

from .oracles import aggregate_csv_rows


def sample_report() -> MetricReport:
    rows = (
        MetricRow.build("candidate", "lpips", [0.451, 0.449], ids=["a", "b"]),
        MetricRow.build("candidate", "fid", [44.2], ids=["set"]),
        MetricRow.build("candidate", "kid", [0.027, 0.025, 0.029], ids=["block-0", "block-1", "block-2"]),
        MetricRow.build("candidate", "ssim", [0.49, 0.50], ids=["a", "b"]),
        MetricRow.build("candidate", "ms_ssim", [0.48, 0.47], ids=["a", "b"]),
        MetricRow.build("candidate", "css", [0.41, 0.40], ids=["a", "b"]),
        MetricRow.build("candidate", "psnr", [20.1, 19.7], ids=["a", "b"]),
    )
    return MetricReport(rows=rows, meta={"n_items": 2, "kid_display_scale": 100.0})


def test_csv_header_and_rows(tmp_path):
    path = tmp_path / "report.csv"
    write_csv(sample_report(), path)
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("candidate,lpips,")
    assert len(lines) == 8


def test_markdown_column_order():
    md = render_markdown(sample_report())
    header = next(line for line in md.splitlines() if line.startswith("| Model"))
    positions = [header.index(name) for name in ("LPIPS", "FID", "KID", "SSIM", "MS-SSIM", "CSS", "PSNR")]
    assert positions == sorted(positions)


def test_markdown_kid_scale_flagged():
    md = render_markdown(sample_report())
    assert "×100" in md
    # 0.027 mean at x100 scale -> 2.7
    assert "2.7" in md


def test_format_cells():
    assert format_cell("fid", 44.2, 0.0) == "44"
    assert format_cell("kid", 0.025, 0.007) == "2.5 ± 0.7"
    assert format_cell("ssim", 0.494, 0.121) == "0.49 ± 0.12"
    assert format_cell("psnr", 19.6, 3.6) == "20 ± 4"
    assert format_cell("psnr", math.inf, 0.0) == "inf"


def test_per_image_csv_aggregation_oracle(tmp_path):
    report = sample_report()
    path = tmp_path / "per_image.csv"
    write_per_image_csv(report, path)
    recomputed = aggregate_csv_rows(path.read_text())
    for row in report.rows:
        mean, std, n = recomputed[(row.model_name, row.metric_name)]
        assert abs(mean - row.mean) <= 1e-9 * max(1.0, abs(row.mean))
        assert abs(std - row.std) <= 1e-9
        assert n == row.n
