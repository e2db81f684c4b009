"""Raster and report I/O.

Grayscale PNG in, 16-bit grayscale PNG out.  8-bit input maps v/255 and
16-bit maps v/65535 onto [0, 1]; color input is collapsed to luma by
Pillow's "L" conversion (ITU-R 601 weights).  Writers are byte
deterministic: no timestamps, sorted JSON keys, fixed PNG encoder
settings, so identical runs produce identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .calibrate import ErrorSurface, WeightPair
from .core import Image, Mask, as_image, as_mask
from .errors import ConfigError


def read_image(path: str | Path) -> Image:
    """Load a grayscale reflectance raster from PNG (or any Pillow
    format) as float64 in [0, 1]."""
    with PILImage.open(path) as im:
        if im.mode in ("I;16", "I;16B", "I;16L"):
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        elif im.mode == "I":
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        elif im.mode == "F":
            arr = np.asarray(im, dtype=np.float64)
        elif im.mode == "L":
            arr = np.asarray(im, dtype=np.float64) / 255.0
        else:
            arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
    return as_image(arr, copy=False)


def write_image(path: str | Path, image: np.ndarray) -> None:
    """Write [0, 1] floats as 16-bit grayscale PNG, rounding half up."""
    arr = np.asarray(image, dtype=np.float64)
    scaled = np.floor(np.clip(arr, 0.0, 1.0) * 65535.0 + 0.5).astype(np.uint16)
    PILImage.fromarray(scaled).save(Path(path), format="PNG")


def read_mask(path: str | Path) -> Mask:
    """Load a mask PNG; any nonzero sample is a set pixel."""
    with PILImage.open(path) as im:
        if im.mode not in ("1", "L", "I", "I;16"):
            im = im.convert("L")
        arr = np.asarray(im)
    return as_mask(arr != 0, copy=False)


def write_mask(path: str | Path, mask: np.ndarray) -> None:
    arr = (np.asarray(mask) != 0).astype(np.uint8) * np.uint8(255)
    PILImage.fromarray(arr, mode="L").save(Path(path), format="PNG")


def write_json(path: str | Path, payload: dict) -> None:
    """Sorted keys, two-space indent, trailing newline; rejects NaN and
    infinity so reports stay valid JSON (callers map those to null)."""
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_json(path: str | Path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise OSError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: expected a JSON object at top level")
    return payload


def write_surface_csv(path: str | Path, surface: ErrorSurface) -> None:
    """One row per grid node, row-major, full float precision via repr."""
    lines = ["w1,w2,error"]
    n = surface.n
    vals = surface.values
    for i in range(n):
        for j in range(n):
            w = surface.weight_at(i, j)
            lines.append(f"{w.w1!r},{w.w2!r},{float(vals[i, j])!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def weights_to_dict(w: WeightPair) -> dict:
    return {"w1": w.w1, "w2": w.w2}


def json_float(x: float):
    """JSON-safe float: infinities become null."""
    return None if math.isinf(x) else x
