"""Two-layer reflectance separation for overlapping tissue regions.

The public surface re-exports the pieces of the pipeline: raster types
and region geometry (`core`), the two-bounce imaging model (`model`),
exemplar hole filling (`inpaint`), weight calibration (`calibrate`),
descent and end-to-end separation (`solve`), and synthetic ground-truth
scenes (`simulate`).
"""

from .calibrate import (
    IDENTITY_WEIGHTS,
    ErrorSurface,
    WeightPair,
    apply_weights,
    best_weights,
    error_surface,
    grid_size,
)
from .core import (
    CropWindow,
    Image,
    Mask,
    RegionSpec,
    as_image,
    as_mask,
    bounding_window,
    crop,
    paste,
    validate_regions,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    DomainError,
    EmptyRegion,
    GeometryError,
    InsufficientNeighborhood,
    LayerSplitError,
    OutOfBounds,
    OverlappingMasks,
)
from .inpaint import (
    InpaintConfig,
    NearestNeighborField,
    build_nnf,
    fill_hole,
    initialize_layers,
)
from .model import (
    MODEL_CONSTANTS,
    LayerPair,
    ModelConstants,
    compose,
    compose_field,
    dcompose_dbottom,
    dcompose_dtop,
    gradient,
    objective,
)
from .simulate import (
    Checker,
    Constant,
    FromImage,
    Metrics,
    SceneSpec,
    Stripes,
    SyntheticCase,
    evaluate_layers,
    metrics_between,
    simulate_overlap,
    texture_from_dict,
)
from .solve import (
    SolveConfig,
    SolveReport,
    StopReason,
    descend,
    render_layers,
    separate,
    virtual_overlap,
)
from .threads import effective_workers, thread_cap

__version__ = "0.1.0"

__all__ = [
    "CropWindow", "Image", "Mask", "RegionSpec",
    "as_image", "as_mask", "bounding_window", "crop", "paste",
    "validate_regions",
    "LayerSplitError", "ConfigError", "DimensionMismatch", "DomainError",
    "EmptyRegion", "GeometryError", "InsufficientNeighborhood",
    "OutOfBounds", "OverlappingMasks",
    "ModelConstants", "MODEL_CONSTANTS", "LayerPair",
    "compose", "compose_field", "dcompose_dtop", "dcompose_dbottom",
    "objective", "gradient",
    "InpaintConfig", "NearestNeighborField",
    "build_nnf", "fill_hole", "initialize_layers",
    "WeightPair", "IDENTITY_WEIGHTS", "ErrorSurface",
    "grid_size", "apply_weights", "error_surface", "best_weights",
    "SolveConfig", "SolveReport", "StopReason",
    "descend", "separate", "render_layers", "virtual_overlap",
    "SceneSpec", "SyntheticCase", "Constant", "Stripes", "Checker",
    "FromImage", "Metrics", "simulate_overlap", "metrics_between",
    "evaluate_layers", "texture_from_dict",
    "effective_workers", "thread_cap",
    "__version__",
]
