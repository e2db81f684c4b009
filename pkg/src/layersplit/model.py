"""Two-bounce forward imaging model for a stacked pair of reflective layers.

With unit source light and zero absorption, a pixel covered by a top
layer of reflectance ``top`` over a bottom layer of reflectance
``bottom`` returns

    z = top + bottom*(1-top)^2 + top*bottom^2*(1-top)^2

i.e. the direct reflection off the top layer, the reflection off the
bottom layer attenuated twice by the top layer's transmittance, and one
inter-reflection path; higher-order bounces are neglected.  Where only
one layer is present the observed intensity equals that layer's
reflectance, so single-layer pixels can be read as reflectance directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import INTENSITY_TOL, Image
from .errors import DimensionMismatch, DomainError, EmptyRegion


@dataclass(frozen=True)
class ModelConstants:
    """Fixed model assumptions, exposed for reporting only."""

    source_intensity: float = 1.0
    absorption: float = 0.0
    bounce_paths: int = 2


MODEL_CONSTANTS = ModelConstants()


def _checked(v, name: str):
    """Validate reflectance input against [0, 1] (1e-9 slack) and clip."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.size and (
        not np.all(np.isfinite(arr))
        or float(arr.min()) < -INTENSITY_TOL
        or float(arr.max()) > 1.0 + INTENSITY_TOL
    ):
        raise DomainError(f"{name} must lie in [0, 1] (tolerance {INTENSITY_TOL})")
    return np.clip(arr, 0.0, 1.0)


def _maybe_scalar(out: np.ndarray):
    return float(out) if out.ndim == 0 else out


def compose(top, bottom):
    """Total light returned by the layer stack; z in [top, 1].

    Accepts scalars or arrays of matching shape.
    """
    t = _checked(top, "top")
    b = _checked(bottom, "bottom")
    return _maybe_scalar(_compose_raw(t, b))


def _compose_raw(t, b):
    s = (1.0 - t) ** 2
    return t + b * s + t * b * b * s


def dcompose_dtop(top, bottom):
    """Partial derivative of compose with respect to the top reflectance."""
    t = _checked(top, "top")
    b = _checked(bottom, "bottom")
    u = 1.0 - t
    out = 1.0 - 2.0 * u * b - 2.0 * t * u * b * b + u * u * b * b
    return _maybe_scalar(out)


def dcompose_dbottom(top, bottom):
    """Partial derivative of compose with respect to the bottom reflectance.

    Non-negative on [0, 1]^2, so compose is monotone in the bottom layer.
    """
    t = _checked(top, "top")
    b = _checked(bottom, "bottom")
    u2 = (1.0 - t) ** 2
    return _maybe_scalar(u2 + 2.0 * t * u2 * b)


@dataclass(frozen=True)
class LayerPair:
    """Per-pixel reflectances of the two layers over one crop window.

    `top` is the layer the light reaches first, `bottom` the layer
    beneath it.  `valid` restricts all arithmetic to overlap pixels;
    entries outside it are carried but never interpreted.
    """

    top: np.ndarray
    bottom: np.ndarray
    valid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        top = np.asarray(self.top, dtype=np.float64)
        bottom = np.asarray(self.bottom, dtype=np.float64)
        if top.ndim != 2 or top.shape != bottom.shape:
            raise DimensionMismatch(
                f"layer shapes differ or are not 2-D: {top.shape} vs {bottom.shape}"
            )
        valid = self.valid
        if valid is None:
            valid = np.ones(top.shape, dtype=bool)
        else:
            valid = np.asarray(valid)
            if valid.shape != top.shape:
                raise DimensionMismatch(
                    f"validity mask shape {valid.shape} does not match layers {top.shape}"
                )
            valid = valid != 0
        top = _checked(top, "top")
        bottom = _checked(bottom, "bottom")
        for name, arr in (("top", top), ("bottom", bottom), ("valid", valid)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.top.shape

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())


def compose_field(layers: LayerPair) -> Image:
    """Pixelwise compose over the validity mask; zero elsewhere.

    Rendering onto an original image is left to callers (overlay the
    valid pixels; do not use the zero background).
    """
    out = np.zeros(layers.shape, dtype=np.float64)
    v = layers.valid
    if v.any():
        out[v] = _compose_raw(layers.top[v], layers.bottom[v])
    out.flags.writeable = False
    return out


def _masked_operands(layers: LayerPair, observed: Image):
    if observed.shape != layers.shape:
        raise DimensionMismatch(
            f"observed crop shape {observed.shape} does not match layers {layers.shape}"
        )
    v = layers.valid
    if not v.any():
        raise EmptyRegion("validity mask is empty")
    return layers.top[v], layers.bottom[v], np.asarray(observed, dtype=np.float64)[v]


def objective(layers: LayerPair, observed: Image) -> float:
    """Mean squared error between the composed stack and the observed crop.

    Averaged over the validity mask so the value is independent of the
    region's pixel count; summation is numpy's fixed-order pairwise
    reduction, so the result does not depend on scheduling.
    """
    t, b, z_obs = _masked_operands(layers, observed)
    r = _compose_raw(t, b) - z_obs
    return float(np.mean(r * r))


def gradient(layers: LayerPair, observed: Image) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of `objective` w.r.t. the two layers.

    Chain rule per valid pixel: (2/n) * (z - z_obs) * dz/dlayer;
    zero outside the validity mask.
    """
    t, b, z_obs = _masked_operands(layers, observed)
    resid = _compose_raw(t, b) - z_obs
    scale = 2.0 / t.size
    u = 1.0 - t
    g_top = np.zeros(layers.shape, dtype=np.float64)
    g_bottom = np.zeros(layers.shape, dtype=np.float64)
    v = layers.valid
    g_top[v] = scale * resid * (1.0 - 2.0 * u * b - 2.0 * t * u * b * b + u * u * b * b)
    g_bottom[v] = scale * resid * (u * u + 2.0 * t * u * u * b)
    return g_top, g_bottom
