"""Synthetic two-tissue scenes with known per-layer ground truth.

Two textured rectangles are composed through the imaging model wherever
they overlap, so the separation pipeline can be scored quantitatively.
Textures are rendered in canvas coordinates, which keeps their pattern
continuous across the overlap boundary the same way a real specimen
would be.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CropWindow, Image, RegionSpec, as_image, bounding_window
from .errors import ConfigError, DimensionMismatch, EmptyRegion, GeometryError
from .model import LayerPair, _compose_raw


def _check_level(value: float, name: str) -> float:
    v = float(value)
    if not 0.0 <= v <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value}")
    return v


@dataclass(frozen=True)
class Constant:
    """Uniform reflectance."""

    value: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", _check_level(self.value, "value"))

    def render(self, height: int, width: int) -> np.ndarray:
        return np.full((height, width), self.value, dtype=np.float64)

    def to_dict(self) -> dict:
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class Stripes:
    """Square-wave bands.  `horizontal` stripes vary along y (bands
    stacked top to bottom), `vertical` ones along x."""

    period: int = 8
    lo: float = 0.2
    hi: float = 0.8
    orientation: str = "horizontal"

    def __post_init__(self) -> None:
        if self.period < 2:
            raise ConfigError(f"period must be >= 2, got {self.period}")
        if self.orientation not in ("horizontal", "vertical"):
            raise ConfigError(
                f"orientation must be 'horizontal' or 'vertical', got {self.orientation!r}"
            )
        object.__setattr__(self, "lo", _check_level(self.lo, "lo"))
        object.__setattr__(self, "hi", _check_level(self.hi, "hi"))

    def render(self, height: int, width: int) -> np.ndarray:
        axis = np.arange(height if self.orientation == "horizontal" else width)
        band = (axis % self.period) * 2 < self.period
        line = np.where(band, self.lo, self.hi)
        if self.orientation == "horizontal":
            return np.broadcast_to(line[:, None], (height, width)).astype(np.float64)
        return np.broadcast_to(line[None, :], (height, width)).astype(np.float64)

    def to_dict(self) -> dict:
        return {
            "kind": "stripes",
            "period": self.period,
            "lo": self.lo,
            "hi": self.hi,
            "orientation": self.orientation,
        }


@dataclass(frozen=True)
class Checker:
    """Checkerboard of `cell` x `cell` squares."""

    cell: int = 8
    lo: float = 0.2
    hi: float = 0.8

    def __post_init__(self) -> None:
        if self.cell < 1:
            raise ConfigError(f"cell must be >= 1, got {self.cell}")
        object.__setattr__(self, "lo", _check_level(self.lo, "lo"))
        object.__setattr__(self, "hi", _check_level(self.hi, "hi"))

    def render(self, height: int, width: int) -> np.ndarray:
        yy = np.arange(height)[:, None] // self.cell
        xx = np.arange(width)[None, :] // self.cell
        return np.where((yy + xx) % 2 == 0, self.lo, self.hi).astype(np.float64)

    def to_dict(self) -> dict:
        return {"kind": "checker", "cell": self.cell, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class FromImage:
    """A reflectance patch tiled over the canvas."""

    pixels: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pixels", as_image(self.pixels))

    def render(self, height: int, width: int) -> np.ndarray:
        ph, pw = self.pixels.shape
        reps = (math.ceil(height / ph), math.ceil(width / pw))
        return np.tile(self.pixels, reps)[:height, :width].astype(np.float64)

    def to_dict(self) -> dict:
        return {"kind": "from_image", "pixels": self.pixels.tolist()}


Texture = Constant | Stripes | Checker | FromImage


def texture_from_dict(d: dict) -> Texture:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError(f"texture spec must be a dict with a 'kind', got {d!r}")
    kind = d["kind"]
    rest = {k: v for k, v in d.items() if k != "kind"}
    try:
        if kind == "constant":
            return Constant(**rest)
        if kind == "stripes":
            return Stripes(**rest)
        if kind == "checker":
            return Checker(**rest)
        if kind == "from_image":
            return FromImage(pixels=np.asarray(rest.pop("pixels"), dtype=np.float64))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for texture kind {kind!r}: {exc}") from exc
    raise ConfigError(f"unknown texture kind {kind!r}")


@dataclass(frozen=True)
class SceneSpec:
    """Everything needed to reproduce one synthetic scene.

    tissue1 is the top layer (the one light meets first), tissue2 the
    bottom.  The exclusive neighborhoods keep only pixels within
    `neighborhood_margin` of the overlap's bounding box, mirroring how
    much context an annotator would mark around a real overlap.
    """

    width: int
    height: int
    tissue1: CropWindow
    tissue2: CropWindow
    texture1: Texture
    texture2: Texture
    noise_sigma: float = 0.0
    rng_seed: int = 0
    neighborhood_margin: int = 16

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise GeometryError(
                f"canvas must be at least 1x1, got {self.width}x{self.height}"
            )
        shape = (self.height, self.width)
        for name, win in (("tissue1", self.tissue1), ("tissue2", self.tissue2)):
            if not isinstance(win, CropWindow):
                raise ConfigError(f"{name} must be a CropWindow, got {win!r}")
            if not win.fits_within(shape):
                raise GeometryError(
                    f"{name} window {win} does not fit the {self.width}x{self.height} canvas"
                )
        ix0 = max(self.tissue1.x0, self.tissue2.x0)
        iy0 = max(self.tissue1.y0, self.tissue2.y0)
        ix1 = min(self.tissue1.x1, self.tissue2.x1)
        iy1 = min(self.tissue1.y1, self.tissue2.y1)
        if ix0 >= ix1 or iy0 >= iy1:
            raise GeometryError("tissue rectangles do not overlap")
        if not self.noise_sigma >= 0.0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.neighborhood_margin < 1:
            raise ConfigError(
                f"neighborhood_margin must be >= 1, got {self.neighborhood_margin}"
            )

    @property
    def overlap_window(self) -> CropWindow:
        x0 = max(self.tissue1.x0, self.tissue2.x0)
        y0 = max(self.tissue1.y0, self.tissue2.y0)
        x1 = min(self.tissue1.x1, self.tissue2.x1)
        y1 = min(self.tissue1.y1, self.tissue2.y1)
        return CropWindow(x0=x0, y0=y0, width=x1 - x0, height=y1 - y0)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "tissue1": _window_to_dict(self.tissue1),
            "tissue2": _window_to_dict(self.tissue2),
            "texture1": self.texture1.to_dict(),
            "texture2": self.texture2.to_dict(),
            "noise_sigma": self.noise_sigma,
            "rng_seed": self.rng_seed,
            "neighborhood_margin": self.neighborhood_margin,
        }

    @staticmethod
    def from_dict(d: dict) -> "SceneSpec":
        try:
            return SceneSpec(
                width=int(d["width"]),
                height=int(d["height"]),
                tissue1=_window_from_dict(d["tissue1"]),
                tissue2=_window_from_dict(d["tissue2"]),
                texture1=texture_from_dict(d["texture1"]),
                texture2=texture_from_dict(d["texture2"]),
                noise_sigma=float(d.get("noise_sigma", 0.0)),
                rng_seed=int(d.get("rng_seed", 0)),
                neighborhood_margin=int(d.get("neighborhood_margin", 16)),
            )
        except KeyError as exc:
            raise ConfigError(f"scene spec is missing key {exc}") from exc


def _window_to_dict(w: CropWindow) -> dict:
    return {"x0": w.x0, "y0": w.y0, "width": w.width, "height": w.height}


def _window_from_dict(d: dict) -> CropWindow:
    try:
        return CropWindow(
            x0=int(d["x0"]), y0=int(d["y0"]),
            width=int(d["width"]), height=int(d["height"]),
        )
    except KeyError as exc:
        raise ConfigError(f"window spec is missing key {exc}") from exc


@dataclass(frozen=True)
class SyntheticCase:
    """A rendered scene: what the pipeline sees plus what it should find.

    truth_top / truth_bottom are reflectances over the overlap bounding
    window, zero outside the overlap mask, and are noise-free even when
    the composite is noisy.
    """

    spec: SceneSpec
    composite: Image
    regions: RegionSpec
    truth_top: np.ndarray
    truth_bottom: np.ndarray

    def __post_init__(self) -> None:
        self.truth_top.flags.writeable = False
        self.truth_bottom.flags.writeable = False

    @property
    def window(self) -> CropWindow:
        return bounding_window(self.regions.overlap)

    def truth_layers(self) -> LayerPair:
        inside = self.regions.overlap[
            self.window.y0 : self.window.y1, self.window.x0 : self.window.x1
        ]
        return LayerPair(
            top=self.truth_top, bottom=self.truth_bottom, valid=inside
        )


def simulate_overlap(spec: SceneSpec) -> SyntheticCase:
    """Render a scene: each tissue alone shows its own reflectance, the
    overlap shows the two-bounce composition, the background is dark.

    Gaussian noise (when requested) is added to the composite only and
    the result clipped back to [0, 1]; the returned truth stays exact.
    """
    shape = (spec.height, spec.width)
    r1 = spec.texture1.render(*shape)
    r2 = spec.texture2.render(*shape)
    in1 = np.zeros(shape, dtype=bool)
    in2 = np.zeros(shape, dtype=bool)
    w1, w2 = spec.tissue1, spec.tissue2
    in1[w1.y0 : w1.y1, w1.x0 : w1.x1] = True
    in2[w2.y0 : w2.y1, w2.x0 : w2.x1] = True
    overlap = in1 & in2

    composite = np.zeros(shape, dtype=np.float64)
    only1 = in1 & ~in2
    only2 = in2 & ~in1
    composite[only1] = r1[only1]
    composite[only2] = r2[only2]
    composite[overlap] = _compose_raw(r1[overlap], r2[overlap])

    if spec.noise_sigma > 0.0:
        rng = np.random.default_rng(spec.rng_seed)
        composite = composite + rng.normal(0.0, spec.noise_sigma, shape)
    np.clip(composite, 0.0, 1.0, out=composite)

    ow = spec.overlap_window
    m = spec.neighborhood_margin
    near = np.zeros(shape, dtype=bool)
    near[
        max(0, ow.y0 - m) : min(spec.height, ow.y1 + m),
        max(0, ow.x0 - m) : min(spec.width, ow.x1 + m),
    ] = True
    regions = RegionSpec(overlap=overlap, n1=only1 & near, n2=only2 & near)

    inside = overlap[ow.y0 : ow.y1, ow.x0 : ow.x1]
    truth_top = np.where(inside, r1[ow.y0 : ow.y1, ow.x0 : ow.x1], 0.0)
    truth_bottom = np.where(inside, r2[ow.y0 : ow.y1, ow.x0 : ow.x1], 0.0)

    return SyntheticCase(
        spec=spec,
        composite=as_image(composite, copy=False),
        regions=regions,
        truth_top=truth_top,
        truth_bottom=truth_bottom,
    )


@dataclass(frozen=True)
class Metrics:
    """Agreement between an estimated raster and its ground truth.

    psnr is math.inf when the mean squared error is zero; file writers
    are expected to serialize that as null.
    """

    mse: float
    psnr: float
    max_abs_error: float

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "psnr": None if math.isinf(self.psnr) else self.psnr,
            "max_abs_error": self.max_abs_error,
        }


def metrics_between(estimate: np.ndarray, truth: np.ndarray, valid=None) -> Metrics:
    """Score one raster against another over `valid` (everywhere when
    omitted).  Peak signal is 1.0, the top of the reflectance range."""
    a = np.asarray(estimate, dtype=np.float64)
    b = np.asarray(truth, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(
            f"estimate shape {a.shape} does not match truth shape {b.shape}"
        )
    if valid is None:
        valid = np.ones(a.shape, dtype=bool)
    else:
        valid = np.asarray(valid) != 0
        if valid.shape != a.shape:
            raise DimensionMismatch(
                f"validity mask shape {valid.shape} does not match rasters {a.shape}"
            )
    if not valid.any():
        raise EmptyRegion("validity mask is empty")
    diff = a[valid] - b[valid]
    mse = float(np.mean(diff * diff))
    psnr = math.inf if mse == 0.0 else float(10.0 * math.log10(1.0 / mse))
    return Metrics(mse=mse, psnr=psnr, max_abs_error=float(np.max(np.abs(diff))))


def evaluate_layers(estimate: LayerPair, truth: LayerPair) -> dict[str, Metrics]:
    """Per-layer scores of an estimate against ground truth over the
    shared validity mask."""
    if estimate.shape != truth.shape:
        raise DimensionMismatch(
            f"estimate window {estimate.shape} does not match truth {truth.shape}"
        )
    if not np.array_equal(estimate.valid, truth.valid):
        raise DimensionMismatch("estimate and truth disagree on the validity mask")
    v = estimate.valid
    return {
        "top": metrics_between(estimate.top, truth.top, v),
        "bottom": metrics_between(estimate.bottom, truth.bottom, v),
    }
