"""Exception hierarchy shared by all layersplit modules."""


class LayerSplitError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(LayerSplitError):
    """Two rasters that must share dimensions do not."""


class OverlappingMasks(LayerSplitError):
    """Region masks that must be pairwise disjoint intersect."""


class EmptyRegion(LayerSplitError):
    """A mask that must contain at least one pixel is empty."""


class InsufficientNeighborhood(LayerSplitError):
    """A source neighborhood is too small to supply exemplar patches."""


class OutOfBounds(LayerSplitError):
    """A crop window or coordinate lies outside its parent raster."""


class DomainError(LayerSplitError):
    """A value lies outside its permitted numeric domain."""


class ConfigError(LayerSplitError):
    """A configuration parameter is outside its permitted range."""


class GeometryError(LayerSplitError):
    """Scene geometry is inconsistent (e.g. rectangles that never meet)."""
