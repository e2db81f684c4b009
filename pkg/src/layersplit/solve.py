"""Projected gradient descent on the two-layer imaging objective, plus
the end-to-end separation pipeline (fill, calibrate, descend)."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .calibrate import (
    IDENTITY_WEIGHTS,
    ErrorSurface,
    WeightPair,
    apply_weights,
    best_weights,
    error_surface,
)
from .core import Image, RegionSpec, as_image, bounding_window, crop, validate_regions
from .errors import ConfigError, DimensionMismatch
from .inpaint import InpaintConfig, initialize_layers
from .model import LayerPair, _compose_raw, _masked_operands, compose_field


class StopReason(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"


# halvings tried before a step is abandoned as a no-op
_MAX_BACKTRACKS = 30


@dataclass(frozen=True)
class SolveConfig:
    """Descent parameters.

    alpha: initial step size, re-tried from scratch each iteration and
        halved while the objective would increase.
    epsilon: stop once successive objective values differ by less than
        this.
    max_iterations: hard cap on descent steps.
    clamp: project both layers onto [0, 1] after every step.
    """

    alpha: float = 0.1
    epsilon: float = 1e-10
    max_iterations: int = 10_000
    clamp: bool = True

    def __post_init__(self) -> None:
        if not self.alpha > 0.0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.epsilon > 0.0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iterations < 1:
            raise ConfigError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )


@dataclass(frozen=True)
class SolveReport:
    """What the descent did.

    objective_trace holds the objective before any step followed by one
    value per accepted step; it never increases.  objective_evaluations
    counts every objective computation, including the initial one and
    rejected backtracking trials.
    """

    iterations_run: int
    objective_trace: tuple[float, ...]
    stop_reason: StopReason
    final_objective: float
    weights: WeightPair
    objective_evaluations: int

    @property
    def converged(self) -> bool:
        return self.stop_reason is StopReason.CONVERGED


def _objective_1d(t: np.ndarray, b: np.ndarray, obs: np.ndarray) -> float:
    r = _compose_raw(t, b) - obs
    return float(np.mean(r * r))


def _gradients_1d(t: np.ndarray, b: np.ndarray, obs: np.ndarray):
    resid = _compose_raw(t, b) - obs
    scale = 2.0 / t.size
    u = 1.0 - t
    g_t = scale * resid * (1.0 - 2.0 * u * b - 2.0 * t * u * b * b + u * u * b * b)
    g_b = scale * resid * (u * u + 2.0 * t * u * u * b)
    return g_t, g_b


def descend(
    layers: LayerPair, observed: Image, config: SolveConfig | None = None
) -> tuple[LayerPair, SolveReport]:
    """Minimize the masked mean squared error by simultaneous updates of
    both layers from the same iterate.

    Each iteration starts from the configured step size and halves it up
    to 30 times while the objective would rise; if every trial rises the
    iterate is kept unchanged, which keeps the trace monotone and
    triggers the convergence test on the next comparison.
    """
    cfg = config if config is not None else SolveConfig()
    t0, b0, obs = _masked_operands(layers, as_image(observed, copy=False))
    t = t0.copy()
    b = b0.copy()
    g_cur = _objective_1d(t, b, obs)
    evals = 1
    trace = [g_cur]
    stop = StopReason.MAX_ITERATIONS
    iterations = 0
    for _ in range(cfg.max_iterations):
        g_t, g_b = _gradients_1d(t, b, obs)
        step = cfg.alpha
        accepted = False
        for _try in range(_MAX_BACKTRACKS + 1):
            t_new = t - step * g_t
            b_new = b - step * g_b
            if cfg.clamp:
                np.clip(t_new, 0.0, 1.0, out=t_new)
                np.clip(b_new, 0.0, 1.0, out=b_new)
            g_new = _objective_1d(t_new, b_new, obs)
            evals += 1
            if g_new <= g_cur:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            t_new, b_new, g_new = t, b, g_cur
        g_prev = g_cur
        t, b, g_cur = t_new, b_new, g_new
        trace.append(g_cur)
        iterations += 1
        if abs(g_cur - g_prev) < cfg.epsilon:
            stop = StopReason.CONVERGED
            break
    top = np.array(layers.top)
    bottom = np.array(layers.bottom)
    v = layers.valid
    top[v] = t
    bottom[v] = b
    refined = LayerPair(top=top, bottom=bottom, valid=v)
    report = SolveReport(
        iterations_run=iterations,
        objective_trace=tuple(trace),
        stop_reason=stop,
        final_objective=g_cur,
        weights=IDENTITY_WEIGHTS,
        objective_evaluations=evals,
    )
    return refined, report


def separate(
    image: Image,
    regions: RegionSpec,
    *,
    inpaint_config: InpaintConfig | None = None,
    solve_config: SolveConfig | None = None,
    grid_step: float = 0.01,
    workers: int | None = None,
) -> tuple[LayerPair, SolveReport, ErrorSurface]:
    """Full pipeline on one overlap region.

    Fills the overlap from each exclusive neighborhood, sweeps the
    weight grid to pick the best global scaling of the two guesses, then
    refines per pixel by projected gradient descent.
    """
    img = as_image(image)
    validate_regions(
        img,
        regions,
        patch_size=(inpaint_config or InpaintConfig()).patch_size,
    )
    guess = initialize_layers(img, regions, inpaint_config)
    win = bounding_window(regions.overlap)
    observed = crop(img, win)
    surface = error_surface(guess, observed, grid_step=grid_step, workers=workers)
    w = best_weights(surface)
    weighted = apply_weights(guess, w)
    refined, report = descend(weighted, observed, solve_config)
    return refined, replace(report, weights=w), surface


def render_layers(
    image: Image, regions: RegionSpec, layers: LayerPair
) -> tuple[Image, Image]:
    """Two full-size views of the input with the overlap replaced by one
    recovered layer each: (top-only, bottom-only).

    With an empty overlap both outputs are unmodified copies.
    """
    img = as_image(image)
    if not regions.overlap.any():
        return img, img
    win = bounding_window(regions.overlap)
    if layers.shape != win.shape:
        raise DimensionMismatch(
            f"layer window {layers.shape} does not match overlap window {win.shape}"
        )
    inside = regions.overlap[win.y0 : win.y1, win.x0 : win.x1]
    top_view = np.array(img)
    bottom_view = np.array(img)
    sub_t = top_view[win.y0 : win.y1, win.x0 : win.x1]
    sub_b = bottom_view[win.y0 : win.y1, win.x0 : win.x1]
    sub_t[inside] = layers.top[inside]
    sub_b[inside] = layers.bottom[inside]
    top_view.flags.writeable = False
    bottom_view.flags.writeable = False
    return top_view, bottom_view


def virtual_overlap(image: Image, regions: RegionSpec, layers: LayerPair) -> Image:
    """Full-size view with the overlap replaced by the composed model
    output, for eyeballing how well the recovered stack explains the
    observation."""
    img = as_image(image)
    if not regions.overlap.any():
        return img
    win = bounding_window(regions.overlap)
    if layers.shape != win.shape:
        raise DimensionMismatch(
            f"layer window {layers.shape} does not match overlap window {win.shape}"
        )
    composed = compose_field(layers)
    inside = regions.overlap[win.y0 : win.y1, win.x0 : win.x1]
    out = np.array(img)
    sub = out[win.y0 : win.y1, win.x0 : win.x1]
    sub[inside] = np.clip(composed[inside], 0.0, 1.0)
    out.flags.writeable = False
    return out
