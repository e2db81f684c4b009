"""Raster and region geometry foundation.

Images are 2-D float64 arrays with intensities normalized to [0, 1]
(8-bit inputs map via v/255, 16-bit via v/65535; color inputs are reduced
to BT.601 luminance before they reach this layer).  Masks are 2-D boolean
arrays of the same shape as the image they annotate.  Arrays returned by
this module are marked read-only: every downstream operation treats them
as immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    EmptyRegion,
    InsufficientNeighborhood,
    OutOfBounds,
    OverlappingMasks,
)

# Universal raster types: float64 (H, W) in [0, 1] and bool (H, W).
Image = np.ndarray
Mask = np.ndarray

# Absorbs float drift from upstream clamping when validating [0, 1] data.
INTENSITY_TOL = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def as_image(data, *, copy: bool = True) -> Image:
    """Validate `data` as a normalized grayscale image and return it read-only.

    Accepts anything array-like of shape (H, W); values must lie in
    [0, 1] up to a 1e-9 tolerance and are clipped onto the exact range.
    """
    arr = np.array(data, dtype=np.float64, copy=copy)
    if arr.ndim != 2:
        raise DimensionMismatch(f"image must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"image must be at least 1x1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("image contains non-finite values")
    lo, hi = float(arr.min()), float(arr.max())
    if lo < -INTENSITY_TOL or hi > 1.0 + INTENSITY_TOL:
        raise DomainError(f"image intensities must lie in [0, 1], got range [{lo}, {hi}]")
    if lo < 0.0 or hi > 1.0:
        # tolerated drift only; copy first when reusing a frozen input
        if not arr.flags.writeable:
            arr = arr.copy()
        np.clip(arr, 0.0, 1.0, out=arr)
    return _frozen(arr)


def as_mask(bits, *, copy: bool = True) -> Mask:
    """Validate `bits` as a 2-D boolean mask and return it read-only."""
    arr = np.array(bits, copy=copy)
    if arr.ndim != 2:
        raise DimensionMismatch(f"mask must be 2-D, got shape {arr.shape}")
    if arr.dtype != np.bool_:
        arr = arr != 0
    return _frozen(arr)


@dataclass(frozen=True)
class CropWindow:
    """Axis-aligned pixel rectangle: offsets (x0, y0) plus width x height."""

    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise OutOfBounds(f"window must be at least 1x1, got {self.width}x{self.height}")
        if self.x0 < 0 or self.y0 < 0:
            raise OutOfBounds(f"window offset must be non-negative, got ({self.x0}, {self.y0})")

    @property
    def x1(self) -> int:
        """One past the rightmost column."""
        return self.x0 + self.width

    @property
    def y1(self) -> int:
        """One past the bottom row."""
        return self.y0 + self.height

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def fits_within(self, shape: tuple[int, int]) -> bool:
        return self.y1 <= shape[0] and self.x1 <= shape[1]


@dataclass(frozen=True)
class RegionSpec:
    """Three disjoint masks on one image: the overlap region and the two
    single-tissue neighborhoods that supply exemplar material for it."""

    overlap: Mask
    n1: Mask
    n2: Mask

    def __post_init__(self):
        object.__setattr__(self, "overlap", as_mask(self.overlap))
        object.__setattr__(self, "n1", as_mask(self.n1))
        object.__setattr__(self, "n2", as_mask(self.n2))


def validate_regions(image: Image, regions: RegionSpec, *, patch_size: int = 7) -> RegionSpec:
    """Check every RegionSpec invariant against `image` and return `regions`.

    Raises DimensionMismatch, OverlappingMasks, EmptyRegion, or
    InsufficientNeighborhood naming the violated invariant.  `patch_size`
    sets the minimum neighborhood size of patch_size**2 pixels.
    """
    shape = image.shape
    for name, mask in (("overlap", regions.overlap), ("n1", regions.n1), ("n2", regions.n2)):
        if mask.shape != shape:
            raise DimensionMismatch(
                f"mask '{name}' has shape {mask.shape}, image has shape {shape}"
            )
        if not mask.any():
            raise EmptyRegion(f"mask '{name}' is empty")
    if np.logical_and(regions.overlap, regions.n1).any():
        raise OverlappingMasks("overlap and n1 masks intersect")
    if np.logical_and(regions.overlap, regions.n2).any():
        raise OverlappingMasks("overlap and n2 masks intersect")
    if np.logical_and(regions.n1, regions.n2).any():
        raise OverlappingMasks("n1 and n2 masks intersect")
    need = patch_size * patch_size
    for name, mask in (("n1", regions.n1), ("n2", regions.n2)):
        have = int(mask.sum())
        if have < need:
            raise InsufficientNeighborhood(
                f"mask '{name}' has {have} pixels, need at least {need} "
                f"(patch_size {patch_size})"
            )
    return regions


def bounding_window(mask: Mask) -> CropWindow:
    """Smallest CropWindow containing every set pixel of `mask`."""
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise EmptyRegion("cannot bound an empty mask")
    y0, y1 = int(ys.min()), int(ys.max())
    x0, x1 = int(xs.min()), int(xs.max())
    return CropWindow(x0=x0, y0=y0, width=x1 - x0 + 1, height=y1 - y0 + 1)


def crop(image: Image, window: CropWindow) -> Image:
    """Extract the pixels of `window` from `image` as a new read-only raster."""
    if not window.fits_within(image.shape):
        raise OutOfBounds(
            f"window {window} does not fit inside raster of shape {image.shape}"
        )
    return _frozen(image[window.y0 : window.y1, window.x0 : window.x1].copy())


def paste(sub: np.ndarray, image: np.ndarray, window: CropWindow) -> np.ndarray:
    """Return a copy of `image` with `window` replaced by `sub`.

    Inverse of crop: crop(paste(sub, image, w), w) == sub.
    """
    if not window.fits_within(image.shape):
        raise OutOfBounds(
            f"window {window} does not fit inside raster of shape {image.shape}"
        )
    if sub.shape != window.shape:
        raise DimensionMismatch(
            f"sub-raster shape {sub.shape} does not match window shape {window.shape}"
        )
    out = image.copy()
    out[window.y0 : window.y1, window.x0 : window.x1] = sub
    return _frozen(out)
