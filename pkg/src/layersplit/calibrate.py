"""Global weight calibration for an initialized layer pair.

Sweeps a scalar weight per layer over a regular grid on [0, 1]^2,
evaluating the recomposition error for every pair, and picks the
minimizing pair to rescale the layers before per-pixel refinement.
The weights are global scalars, not per-pixel fields.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionMismatch, DomainError, EmptyRegion
from .model import LayerPair, _compose_raw
from .core import Image
from .threads import effective_workers


@dataclass(frozen=True)
class WeightPair:
    """Scalar scale factors: w1 applies to the top layer, w2 to the bottom."""

    w1: float
    w2: float

    def __post_init__(self):
        for name, v in (("w1", self.w1), ("w2", self.w2)):
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {v}")


IDENTITY_WEIGHTS = WeightPair(1.0, 1.0)


@dataclass(frozen=True)
class ErrorSurface:
    """Grid of objective values: values[i, j] is the error at
    (w1 = i*grid_step, w2 = j*grid_step), both weights capped at 1."""

    grid_step: float
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def weight_at(self, i: int, j: int) -> WeightPair:
        step = self.grid_step
        return WeightPair(min(i * step, 1.0), min(j * step, 1.0))


def grid_size(grid_step: float) -> int:
    """Number of samples per axis: floor(1/step) + 1."""
    if not (0.0 < grid_step <= 0.5):
        raise ConfigError(f"grid_step must lie in (0, 0.5], got {grid_step}")
    return int(np.floor(1.0 / grid_step + 1e-9)) + 1


def apply_weights(layers: LayerPair, w: WeightPair) -> LayerPair:
    """Scale the top layer by w1 and the bottom layer by w2."""
    return LayerPair(top=layers.top * w.w1, bottom=layers.bottom * w.w2, valid=layers.valid)


def error_surface(
    layers: LayerPair,
    observed: Image,
    grid_step: float = 0.01,
    *,
    workers: int | None = None,
) -> ErrorSurface:
    """Evaluate the recomposition objective at every grid weight pair.

    Grid evaluations are independent; rows may be computed on a thread
    pool (capped by LAYERSPLIT_THREADS) and are written into the result
    by position, so worker count never changes the output.
    """
    n = grid_size(grid_step)
    if observed.shape != layers.shape:
        raise DimensionMismatch(
            f"observed crop shape {observed.shape} does not match layers {layers.shape}"
        )
    v = layers.valid
    if not v.any():
        raise EmptyRegion("validity mask is empty")
    t = layers.top[v]
    b = layers.bottom[v]
    z_obs = np.asarray(observed, dtype=np.float64)[v]
    weights = np.minimum(np.arange(n) * grid_step, 1.0)
    values = np.empty((n, n), dtype=np.float64)

    def fill_row(i: int) -> None:
        ti = weights[i] * t
        for j in range(n):
            r = _compose_raw(ti, weights[j] * b) - z_obs
            values[i, j] = np.mean(r * r)

    n_workers = effective_workers(workers)
    if n_workers <= 1 or n == 1:
        for i in range(n):
            fill_row(i)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(fill_row, range(n)))
    return ErrorSurface(grid_step=grid_step, values=values)


def best_weights(surface: ErrorSurface) -> WeightPair:
    """Grid point of minimum error; ties break to the smallest w1, then w2.

    Row-major argmin returns the first minimum, which is exactly that
    tie-break order.
    """
    if surface.values.size == 0:
        raise EmptyRegion("error surface is empty")
    flat = int(np.argmin(surface.values))
    i, j = divmod(flat, surface.values.shape[1])
    return surface.weight_at(i, j)
