from __future__ import annotations

import math

import numpy as np
import pytest

from stainbench import CssLossConfig, ImageTensor, css_loss, pyramid_l1, pyramid_l1_loss
from stainbench.pixel_metrics import PyramidConfig


def img(arr) -> ImageTensor:
    return ImageTensor.from_array(np.asarray(arr, dtype=np.float64))


def checkerboard(side: int = 32) -> np.ndarray:
    return (np.indices((side, side)).sum(axis=0) % 2) * 0.8 + 0.1


def test_identity_loss_is_zero(rng):
    x = img(rng.random((1, 3, 24, 24)))
    assert css_loss(x, x) == pytest.approx(0.0, abs=1e-6)


def test_anti_correlated_hits_log_floor():
    pat = checkerboard()
    cfg = CssLossConfig(epsilon=1e-12)
    value = css_loss(img(pat), img(1.0 - pat), cfg)
    assert value == pytest.approx(-math.log(cfg.log_floor), abs=1e-12)


def test_independent_noise_expectation():
    rng = np.random.default_rng(7)
    losses = [
        css_loss(img(rng.random((1, 1, 32, 32))), img(rng.random((1, 1, 32, 32))))
        for _ in range(100)
    ]
    assert float(np.mean(losses)) == pytest.approx(-math.log(0.5), abs=0.05)


def test_batch_decomposition(rng):
    x = rng.random((2, 1, 20, 20))
    y = rng.random((2, 1, 20, 20))
    batched = css_loss(img(x), img(y))
    singles = [css_loss(img(x[i : i + 1]), img(y[i : i + 1])) for i in range(2)]
    assert batched == pytest.approx(sum(singles) / 2.0, abs=1e-9)


def test_nonnegativity_fuzz(rng):
    for _ in range(25):
        x = img(rng.random((1, 1, 16, 16)))
        y = img(rng.random((1, 1, 16, 16)))
        assert css_loss(x, y) >= 0.0


def test_minimum_at_identity(rng):
    x = img(rng.random((1, 1, 16, 16)))
    base = css_loss(x, x)
    for _ in range(25):
        y = img(rng.random((1, 1, 16, 16)))
        assert base <= css_loss(x, y) + 1e-6


def test_epsilon_invariant_on_constant_images():
    a = img(np.full((1, 1, 16, 16), 0.3))
    b = img(np.full((1, 1, 16, 16), 0.3))
    for eps in (1e-8, 1e-4, 1e-1):
        assert css_loss(a, b, CssLossConfig(epsilon=eps)) == pytest.approx(0.0, abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        CssLossConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        CssLossConfig(log_floor=1.5)


def test_pyramid_loss_alias_identity(rng):
    a = img(rng.random((1, 1, 64, 64)))
    assert pyramid_l1_loss(a, a) == 0.0


def test_pyramid_loss_constant_closed_form():
    a = img(np.full((1, 1, 64, 64), 0.2))
    b = img(np.full((1, 1, 64, 64), 0.7))
    assert pyramid_l1_loss(a, b) == pytest.approx(2.5, abs=1e-9)


def test_pyramid_loss_bit_exact_alias(rng):
    a = img(rng.random((1, 1, 64, 64)))
    b = img(rng.random((1, 1, 64, 64)))
    cfg = PyramidConfig(levels=3, level_weights=(1.0, 0.5, 0.25, 0.125))
    assert pyramid_l1_loss(a, b, cfg) == pyramid_l1(a, b, cfg)
