"""Shared fixtures: small deterministic scenes used across test modules."""

import numpy as np
import pytest

import layersplit as ls
from layersplit.core import CropWindow

ACCEPTANCE_LINES: list[tuple[int, str]] = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(num, name): acceptance criterion identity"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call":
        return
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, name = mark.args
    status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
    ACCEPTANCE_LINES.append(
        (num, f"criterion {num} ({name}): {status} [{rep.duration:.2f}s]")
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def constant_scene():
    """Noise-free constant-texture scene with a 64x64 overlap."""
    spec = ls.SceneSpec(
        width=160,
        height=160,
        tissue1=CropWindow(x0=16, y0=16, width=96, height=96),
        tissue2=CropWindow(x0=48, y0=48, width=96, height=96),
        texture1=ls.Constant(0.4),
        texture2=ls.Constant(0.6),
        noise_sigma=0.0,
        rng_seed=5,
    )
    return ls.simulate_overlap(spec)


@pytest.fixture(scope="session")
def textured_scene():
    """Vertical stripes over a checkerboard, 48x48 overlap.

    tissue1 sits above the overlap so its exclusive band is a single
    strip; tissue2 wraps around the overlap on three sides, which the
    checker needs to lock its phase.
    """
    spec = ls.SceneSpec(
        width=160,
        height=160,
        tissue1=CropWindow(x0=56, y0=8, width=48, height=96),
        tissue2=CropWindow(x0=8, y0=56, width=144, height=96),
        texture1=ls.Stripes(period=8, lo=0.2, hi=0.8, orientation="vertical"),
        texture2=ls.Checker(cell=8, lo=0.3, hi=0.7),
        noise_sigma=0.0,
        rng_seed=11,
        neighborhood_margin=44,
    )
    return ls.simulate_overlap(spec)


def smooth_field(height, width, seed, lo=0.15, hi=0.85):
    """Band-limited random field: bilinear upsample of a coarse grid."""
    rng = np.random.default_rng(seed)
    base = rng.random((height // 4 + 1, width // 4 + 1))
    ys = np.linspace(0, base.shape[0] - 1.001, height)
    xs = np.linspace(0, base.shape[1] - 1.001, width)
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    img = (
        (1 - fy) * (1 - fx) * base[y0][:, x0]
        + (1 - fy) * fx * base[y0][:, x0 + 1]
        + fy * (1 - fx) * base[y0 + 1][:, x0]
        + fy * fx * base[y0 + 1][:, x0 + 1]
    )
    return lo + (hi - lo) * img
