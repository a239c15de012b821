from __future__ import annotations

import sys

import numpy as np
import pytest

from stainbench import ImageTensor


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if "test_acceptance" not in report.nodeid or report.when != "call":
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    sys.stderr.write(f"\nACCEPTANCE {name}: {status}\n")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240901)


@pytest.fixture
def random_image(rng):
    def make(shape=(1, 1, 32, 32)) -> ImageTensor:
        return ImageTensor.from_array(rng.random(shape))

    return make
