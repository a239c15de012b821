"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each criterion prints a PASS/FAIL line via the hook in conftest.py and
enforces its runtime budget where one is stated.
"""

from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from stainbench import (
    CssLossConfig,
    EmbeddingSet,
    GaussianMoments,
    ImageTensor,
    css_loss,
    css_metric,
    fid,
    fit_moments,
    gaussian_pyramid,
    kid,
    lpips,
    ms_ssim,
    psnr,
    pyramid_l1,
    sqrtm_psd,
    ssim,
)
from stainbench.cli import main as cli_main
from stainbench.core import Her2Score
from stainbench.dataset import DatasetManifest, ManifestEntry
from stainbench.pixel_metrics import msssim_scale_weights
from stainbench.review import build_session, consensus
from stainbench.review.service import create_app
from stainbench.review.store import SessionStore

from .oracles import cs_mean_ref, ms_ssim_ref, ssim_ref
from .test_cli import build_dataset
from .test_review import assert_blinded, make_items, answer, memory_manifest


def img(arr) -> ImageTensor:
    return ImageTensor.from_array(np.asarray(arr, dtype=np.float64))


def test_brute_force_equivalence():
    """SSIM/MS-SSIM/CSS match a naive sliding-window reference on 200 pairs."""
    start = time.monotonic()
    rng = np.random.default_rng(2024)
    for trial in range(200):
        h = int(rng.integers(22, 33))
        w = int(rng.integers(22, 33))
        c = 3 if trial % 10 == 0 else 1
        xa = rng.random((c, h, w))
        ya = rng.random((c, h, w))
        x, y = img(xa), img(ya)
        assert abs(ssim(x, y) - ssim_ref(xa, ya)) <= 1e-7
        assert abs(css_metric(x, y) - cs_mean_ref(xa, ya)) <= 1e-7
        weights = msssim_scale_weights(2)
        assert abs(ms_ssim(x, y, scales=2) - ms_ssim_ref(xa, ya, 2, weights)) <= 1e-7
    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"brute-force equivalence took {elapsed:.1f}s"


def test_identity_suite():
    """Every metric hits its fixed point on identical inputs."""
    start = time.monotonic()
    rng = np.random.default_rng(7)
    shapes = [(1, 1, 64, 64), (1, 3, 32, 32), (1, 1, 48, 32), (1, 3, 64, 64)]
    for shape in shapes:
        x = img(rng.random(shape))
        assert ssim(x, x) == pytest.approx(1.0, abs=1e-9)
        assert css_metric(x, x) == pytest.approx(1.0, abs=1e-9)
        assert math.isinf(psnr(x, x))
        assert css_loss(x, x) == pytest.approx(0.0, abs=1e-6)
        if shape[2] % 16 == 0 and shape[3] % 16 == 0:
            assert pyramid_l1(x, x) == pytest.approx(0.0, abs=1e-12)
    small = img(rng.random((1, 1, 64, 64)))
    assert ms_ssim(small, small, scales=2) == pytest.approx(1.0, abs=1e-9)
    big = img(rng.random((1, 1, 192, 192)))
    assert ms_ssim(big, big, scales=5) == pytest.approx(1.0, abs=1e-9)
    feats = [rng.random((4, 3, 3)), rng.random((8, 2, 2))]
    assert lpips(feats, [f.copy() for f in feats]) == pytest.approx(0.0, abs=1e-12)
    moments = fit_moments(EmbeddingSet(rng.random((64, 8)).astype(np.float32)))
    assert fid(moments, moments) == pytest.approx(0.0, abs=1e-6)
    elapsed = time.monotonic() - start
    assert elapsed < 5.0, f"identity suite took {elapsed:.1f}s"


def test_fid_analytic_oracle():
    """Closed-form 1-D distances and square-root reconstruction up to D=256."""
    start = time.monotonic()
    a = GaussianMoments(np.array([0.0]), np.array([[1.0]]))
    b = GaussianMoments(np.array([3.0]), np.array([[1.0]]))
    assert fid(a, b) == pytest.approx(9.0, abs=1e-9)
    c = GaussianMoments(np.array([0.0]), np.array([[4.0]]))
    assert fid(a, c) == pytest.approx(1.0, abs=1e-9)
    rng = np.random.default_rng(11)
    for d in (4, 32, 128, 256):
        m0 = rng.standard_normal((d, d))
        spd = m0.T @ m0
        s = sqrtm_psd(spd)
        assert np.linalg.norm(s @ s - spd) <= 1e-6 * np.linalg.norm(spd)
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"fid analytic oracle took {elapsed:.1f}s"


def test_kid_estimator_calibration():
    """Same-distribution estimates center on zero; shifted case matches Monte Carlo."""
    start = time.monotonic()
    values, stds = [], []
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        a = EmbeddingSet(rng.standard_normal((500, 16)).astype(np.float32))
        b = EmbeddingSet(rng.standard_normal((500, 16)).astype(np.float32))
        est = kid(a, b, blocks=10, seed=seed)
        values.append(est.value)
        stds.append(est.std)
    grand_mean = float(np.mean(values))
    assert abs(grand_mean) <= 3.0 * (float(np.mean(stds)) / math.sqrt(10))
    assert abs(grand_mean) <= 3.0 * (float(np.std(values)) / math.sqrt(50))

    rng = np.random.default_rng(77)
    g1 = EmbeddingSet(rng.standard_normal((1000, 1)).astype(np.float32))
    g2 = EmbeddingSet((rng.standard_normal((1000, 1)) + 1.0).astype(np.float32))
    est = kid(g1, g2, blocks=10, seed=7)
    mc_rng = np.random.default_rng(123)
    n = 100_000
    xs = mc_rng.standard_normal(n)
    ys = mc_rng.standard_normal(n) + 1.0

    def k(u, v):
        return (u * v + 1.0) ** 3

    mc = float(k(xs, np.roll(xs, 1)).mean() + k(ys, np.roll(ys, 1)).mean() - 2 * k(xs, ys).mean())
    assert abs(est.value - mc) <= 0.10 * mc
    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"kid calibration took {elapsed:.1f}s"


def test_css_loss_equation_checks():
    """Batch decomposition, independent-noise expectation and the log clamp."""
    start = time.monotonic()
    rng = np.random.default_rng(3)
    x = rng.random((2, 1, 24, 24))
    y = rng.random((2, 1, 24, 24))
    batched = css_loss(img(x), img(y))
    singles = [css_loss(img(x[i : i + 1]), img(y[i : i + 1])) for i in range(2)]
    assert abs(batched - sum(singles) / 2.0) <= 1e-9

    noise_rng = np.random.default_rng(7)
    losses = [
        css_loss(img(noise_rng.random((1, 1, 32, 32))), img(noise_rng.random((1, 1, 32, 32))))
        for _ in range(100)
    ]
    assert abs(float(np.mean(losses)) - (-math.log(0.5))) <= 0.05

    pat = (np.indices((32, 32)).sum(axis=0) % 2) * 0.8 + 0.1
    cfg = CssLossConfig(epsilon=1e-12)
    clamped = css_loss(img(pat), img(1.0 - pat), cfg)
    assert clamped == -math.log(cfg.log_floor)
    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"css loss checks took {elapsed:.1f}s"


def test_pyramid_arithmetic():
    """A 1024x1024 tile yields exactly four halving levels; constants survive."""
    tile = img(np.full((1, 1, 1024, 1024), 0.5))
    levels = gaussian_pyramid(tile)
    assert [lvl.shape[2:] for lvl in levels] == [(512, 512), (256, 256), (128, 128), (64, 64)]
    const = img(np.full((1, 1, 1024, 1024), 0.37))
    for lvl in gaussian_pyramid(const):
        assert np.max(np.abs(lvl.data - 0.37)) <= 1e-9


def test_protocol_arithmetic(tmp_path, rng):
    """Session construction counts, hand-computed consensus and endpoint blinding."""
    session = build_session(memory_manifest(130), n=500, dup_rate=0.01, seed=21)
    assert len(session.items) == 505
    assert len(session.duplicates()) == 5
    per_class = {s: 0 for s in Her2Score}
    for item in session.originals():
        per_class[item.her2_score] += 1
    assert all(v == 125 for v in per_class.values())

    # Hand-computed consensus: 8 items, majorities engineered per question.
    scores = [s for s in Her2Score for _ in range(2)]
    truths = ["left", "right"] * 4
    items = make_items(truths, scores)
    answers = []
    for idx, item in enumerate(items):
        q1 = "yes" if idx % 2 == 0 else "no"
        q2 = "generated" if idx < 2 else "real"
        q3 = "generated" if idx % 4 == 0 else "real"
        answers.append(answer(item, "r1", q1, q2, q3))
        answers.append(answer(item, "r2", q1, q2, q3))
        answers.append(
            answer(
                item,
                "r3",
                "no" if q1 == "yes" else "yes",
                "real" if q2 == "generated" else "generated",
                "real" if q3 == "generated" else "generated",
            )
        )
    report = consensus(answers, items, ["r1", "r2", "r3"])
    assert report.overall.q1_yes == 0.5
    assert report.overall.q2_generated == 0.25
    assert report.overall.q3_generated == 0.25
    for score, expect_q1 in zip(Her2Score, (0.5, 0.5, 0.5, 0.5)):
        assert report.per_score[score.value].q1_yes == expect_q1

    # Blinding over every endpoint of a live app.
    from PIL import Image

    tiles = tmp_path / "tiles"
    tiles.mkdir()
    entries = []
    for score in Her2Score:
        for i in range(2):
            stem = f"{score.value.replace('+', 'p')}_{i}"
            paths = {}
            for kind in ("he", "real", "gen"):
                arr = (rng.random((8, 8, 3)) * 255).astype(np.uint8)
                p = tiles / f"{stem}_{kind}.png"
                Image.fromarray(arr).save(p)
                paths[kind] = p
            entries.append(ManifestEntry(stem, paths["he"], paths["real"], paths["gen"], score))
    live = build_session(DatasetManifest(entries=tuple(entries)), n=8, dup_rate=0.125, seed=2)
    store = SessionStore.create(live, ["rater1", "rater2", "rater3"], tmp_path / "session")
    client = TestClient(create_app(store))
    token = next(tok for tok, rid in store.raters.items() if rid == "rater1")
    collected = [
        client.get("/healthz"),
        client.get(f"/session/{token}/next"),
        client.get("/session/unknown/next"),
        client.get("/images/deadbeef"),
        client.get("/admin/report?token=wrong"),
    ]
    payload = client.get(f"/session/{token}/next").json()
    body = {
        "item_id": payload["item_id"],
        "q1_similar_pattern": "yes",
        "q2_better_quality": "left",
        "q3_which_real": "right",
    }
    collected.append(client.post(f"/session/{token}/answer", json=body))
    collected.append(client.post(f"/session/{token}/answer", json=body))
    for resp in collected:
        assert_blinded(resp.json())


def test_cli_determinism(tmp_path):
    """Byte-identical CSV across worker counts, benchmark column order preserved."""
    data = build_dataset(tmp_path / "data")
    outputs = []
    for workers in (1, 8):
        out = tmp_path / f"out{workers}"
        result = CliRunner().invoke(
            cli_main,
            [
                "evaluate",
                "--manifest",
                str(data["manifest"]),
                "--config",
                str(data["config"]),
                "--workers",
                str(workers),
                "--out",
                str(out),
            ],
            catch_exceptions=False,
        )
        assert result.exit_code == 0, result.output
        outputs.append(((out / "report.csv").read_bytes(), (out / "per_image.csv").read_bytes()))
    assert outputs[0] == outputs[1]
    header = next(
        line
        for line in (tmp_path / "out1" / "report.md").read_text().splitlines()
        if line.startswith("| Model")
    )
    names = ["LPIPS", "FID", "KID", "SSIM", "MS-SSIM", "CSS", "PSNR"]
    positions = [header.index(n) for n in names]
    assert positions == sorted(positions)


def test_checkpoint_rule(tmp_path):
    """select-checkpoint returns the minimum-mean-LPIPS tag on a 3-run fixture."""
    from stainbench.embeddings import save_embeddings

    layer_shapes = ((2, 2, 2), (3, 1, 1))
    dim = sum(c * h * w for c, h, w in layer_shapes)
    rng = np.random.default_rng(5)
    base = rng.random((6, dim))
    real_path = tmp_path / "real.stem"
    save_embeddings(EmbeddingSet(base.astype(np.float32), layer_shapes=layer_shapes), real_path)
    records = []
    for i, scale in enumerate((0.5, 0.05, 0.2)):
        gen = base + scale * np.random.default_rng(i).standard_normal(base.shape)
        gen_path = tmp_path / f"gen{i}.stem"
        save_embeddings(EmbeddingSet(gen.astype(np.float32), layer_shapes=layer_shapes), gen_path)
        records.append(
            {"tag": f"epoch-{i:02d}", "features_gen": str(gen_path), "features_real": str(real_path)}
        )
    runs = tmp_path / "runs.jsonl"
    runs.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    result = CliRunner().invoke(cli_main, ["select-checkpoint", "--runs", str(runs)], catch_exceptions=False)
    assert result.exit_code == 0, result.output
    assert result.output.strip().splitlines()[-1] == "epoch-01"
