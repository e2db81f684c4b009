"""Exemplar-based hole filling.

The overlap region is treated as a hole and rebuilt from each tissue's
exclusive neighborhood: a randomized nearest-neighbor field over patches
(random init, alternating raster/reverse-raster propagation, decaying
random search) feeds a uniform voting step that rewrites the hole, and
the two alternate inside a coarse-to-fine pyramid.  Runs are fully
deterministic for a fixed seed regardless of thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as K
from .core import (
    Image,
    Mask,
    RegionSpec,
    as_image,
    as_mask,
    bounding_window,
    crop,
    validate_regions,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    EmptyRegion,
    InsufficientNeighborhood,
    OverlappingMasks,
)
from .model import LayerPair

_U64_MASK = (1 << 64) - 1

# stage tags keep random streams for distinct uses disjoint
_STAGE_FILL_INIT = 0
_STAGE_FILL_SWEEP = 1
_STAGE_NNF_INIT = 2
_STAGE_NNF_SWEEP = 3


@dataclass(frozen=True)
class InpaintConfig:
    """Knobs for the exemplar fill.

    patch_size: odd square patch edge, >= 3.
    em_iterations: match/vote rounds per pyramid level.
    nnf_iterations: search sweeps per round; even sweeps scan in raster
        order, odd ones in reverse.
    pyramid_levels: None picks the deepest pyramid whose coarsest hole
        bounding box still spans at least two patches per axis; an
        explicit count is an upper bound on the same rule.
    rng_seed: any int, reduced to 64 bits.
    random_search_decay: geometric factor applied to the search radius,
        strictly between 0 and 1.
    """

    patch_size: int = 7
    em_iterations: int = 10
    nnf_iterations: int = 5
    pyramid_levels: int | None = None
    rng_seed: int = 0
    random_search_decay: float = 0.5

    def __post_init__(self) -> None:
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ConfigError(
                f"patch_size must be odd and >= 3, got {self.patch_size}"
            )
        if self.em_iterations < 1:
            raise ConfigError(
                f"em_iterations must be >= 1, got {self.em_iterations}"
            )
        if self.nnf_iterations < 1:
            raise ConfigError(
                f"nnf_iterations must be >= 1, got {self.nnf_iterations}"
            )
        if self.pyramid_levels is not None and self.pyramid_levels < 1:
            raise ConfigError(
                f"pyramid_levels must be >= 1 or None, got {self.pyramid_levels}"
            )
        if not isinstance(self.rng_seed, int):
            raise ConfigError(f"rng_seed must be an int, got {self.rng_seed!r}")
        if not 0.0 < self.random_search_decay < 1.0:
            raise ConfigError(
                "random_search_decay must lie strictly inside (0, 1), "
                f"got {self.random_search_decay}"
            )


@dataclass(frozen=True)
class NearestNeighborField:
    """Per-center best match of a randomized patch search.

    Centers are listed in raster order.  `distance` is the mean squared
    difference over mutually valid patch pixels; `init_distance`
    snapshots the state right after random initialization, so
    `distance <= init_distance` holds everywhere by construction.
    """

    patch_size: int
    center_y: np.ndarray
    center_x: np.ndarray
    offset_y: np.ndarray
    offset_x: np.ndarray
    distance: np.ndarray
    init_distance: np.ndarray

    def __post_init__(self) -> None:
        for f in (
            self.center_y, self.center_x, self.offset_y,
            self.offset_x, self.distance, self.init_distance,
        ):
            f.flags.writeable = False

    @property
    def n_centers(self) -> int:
        return int(self.center_y.size)

    def match_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Absolute (y, x) of each center's matched source center."""
        return self.center_y + self.offset_y, self.center_x + self.offset_x


def _seed64(seed: int) -> int:
    return seed & _U64_MASK


def _mix64_py(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _U64_MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64_MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64_MASK
    return z ^ (z >> 31)


def _split_seed(seed: int, tag: int) -> int:
    """Derive an independent 64-bit stream key, e.g. one per layer."""
    return _mix64_py(_seed64(seed) ^ _mix64_py(tag))


def _phase(stage: int, level: int, em: int, sweep: int) -> np.uint64:
    packed = ((stage * 1_000_003 + level) * 1_000_003 + em) * 1_000_003 + sweep
    return np.uint64(packed & _U64_MASK)


def _dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Chebyshev dilation by `radius`, separable along axes."""
    out = mask.copy()
    for axis in (0, 1):
        grown = out.copy()
        for s in range(1, radius + 1):
            sl_a = [slice(None)] * 2
            sl_b = [slice(None)] * 2
            sl_a[axis] = slice(s, None)
            sl_b[axis] = slice(None, -s)
            grown[tuple(sl_a)] |= out[tuple(sl_b)]
            grown[tuple(sl_b)] |= out[tuple(sl_a)]
        out = grown
    return out


def _allowed_centers(
    source_mask: np.ndarray, patch_size: int, *, require_full: bool = False
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Source patch centers, as (grid, ys, xs) in raster order.

    Candidate patches sit fully inside the source bounding box and cover
    at least one source pixel; with require_full they must consist of
    source pixels only.  Hole filling demands full patches — otherwise a
    patch straddling the hole could "match" itself at distance zero over
    its few known pixels and anchor nothing.
    """
    r = patch_size // 2
    h, w = source_mask.shape
    allowed = np.zeros((h, w), dtype=bool)
    if not source_mask.any():
        return allowed, np.empty(0, np.int64), np.empty(0, np.int64)
    win = bounding_window(source_mask)
    y_lo, y_hi = win.y0 + r, win.y1 - r
    x_lo, x_hi = win.x0 + r, win.x1 - r
    if y_lo >= y_hi or x_lo >= x_hi:
        return allowed, np.empty(0, np.int64), np.empty(0, np.int64)
    ii = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(source_mask, axis=0), axis=1, out=ii[1:, 1:])
    ys, xs = np.mgrid[y_lo:y_hi, x_lo:x_hi]
    counts = (
        ii[ys + r + 1, xs + r + 1]
        - ii[ys - r, xs + r + 1]
        - ii[ys + r + 1, xs - r]
        + ii[ys - r, xs - r]
    )
    needed = patch_size * patch_size if require_full else 1
    allowed[y_lo:y_hi, x_lo:x_hi] = counts >= needed
    ay, ax = np.nonzero(allowed)
    return allowed, ay.astype(np.int64), ax.astype(np.int64)


def _down2_mean(img: np.ndarray) -> np.ndarray:
    p = np.pad(img, ((0, img.shape[0] & 1), (0, img.shape[1] & 1)), mode="edge")
    return p.reshape(p.shape[0] // 2, 2, p.shape[1] // 2, 2).mean(axis=(1, 3))


def _down2_mask(mask: np.ndarray, keep_any: bool) -> np.ndarray:
    p = np.pad(mask, ((0, mask.shape[0] & 1), (0, mask.shape[1] & 1)), mode="edge")
    q = p.reshape(p.shape[0] // 2, 2, p.shape[1] // 2, 2)
    return q.any(axis=(1, 3)) if keep_any else q.all(axis=(1, 3))


def _build_pyramid(
    img: np.ndarray, hole: np.ndarray, source: np.ndarray, cfg: InpaintConfig
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Finest level first.  Holes coarsen with ANY so no hole pixel is
    dropped; sources coarsen with ALL so no hole value leaks into a
    coarse source patch."""
    levels = [(img.copy(), hole.copy(), source.copy())]
    limit = cfg.pyramid_levels if cfg.pyramid_levels is not None else 10_000
    while len(levels) < limit:
        c_img, c_hole, c_src = levels[-1]
        if min(c_img.shape) < 2 * cfg.patch_size:
            break
        n_img = _down2_mean(c_img)
        n_hole = _down2_mask(c_hole, keep_any=True)
        n_src = _down2_mask(c_src, keep_any=False)
        if not n_hole.any() or not n_src.any():
            break
        hw = bounding_window(n_hole)
        if min(hw.height, hw.width) < 2 * cfg.patch_size:
            break
        _, ay, _ = _allowed_centers(n_src, cfg.patch_size, require_full=True)
        if ay.size == 0:
            break
        levels.append((n_img, n_hole, n_src))
    return levels


def _run_level(
    img: np.ndarray,
    hole: np.ndarray,
    source: np.ndarray,
    cfg: InpaintConfig,
    level: int,
    seed: int,
    trust_hole_at_start: bool,
    inherit: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Alternate patch search and voting at one scale, in place.

    At the coarsest level the provisional diffusion values are excluded
    from the patch distance: a hole pixel only becomes valid context
    once voting has actually rewritten it, so the fill grows inward
    anchored on real content instead of locking onto the init.
    Upsampled levels trust the whole hole immediately and inherit the
    coarser level's match offsets (doubled), which keeps the field
    coherent instead of rebreaking it with a fresh random start.
    Returns (center index grid, offset_y, offset_x) for the next level.
    """
    r = cfg.patch_size // 2
    ctx = (hole | source) if trust_hole_at_start else source.copy()
    centers_mask = _dilate(hole, r)
    cy, cx = np.nonzero(centers_mask)
    cy = cy.astype(np.int64)
    cx = cx.astype(np.int64)
    cidx = np.full(img.shape, -1, dtype=np.int64)
    cidx[cy, cx] = np.arange(cy.size, dtype=np.int64)
    allowed, ay, ax = _allowed_centers(source, cfg.patch_size, require_full=True)
    sw = bounding_window(source)
    radius0 = float(np.hypot(sw.height, sw.width))
    hy, hx = np.nonzero(hole)
    hy = hy.astype(np.int64)
    hx = hx.astype(np.int64)
    off_y = np.zeros(cy.size, dtype=np.int64)
    off_x = np.zeros(cx.size, dtype=np.int64)
    dist = np.empty(cy.size, dtype=np.float64)
    votes = np.empty(hy.size, dtype=np.float64)
    counts = np.empty(hy.size, dtype=np.int64)
    seed_u = np.uint64(_seed64(seed))
    K.nnf_random_init(
        img, ctx, img, source, ay, ax, cy, cx, r,
        seed_u, _phase(_STAGE_FILL_INIT, level, 0, 0), off_y, off_x, dist,
    )
    if inherit is not None:
        p_cidx, p_off_y, p_off_x = inherit
        parent = p_cidx[
            np.minimum(cy // 2, p_cidx.shape[0] - 1),
            np.minimum(cx // 2, p_cidx.shape[1] - 1),
        ]
        have = parent >= 0
        my = cy + 2 * np.where(have, p_off_y[parent], 0)
        mx = cx + 2 * np.where(have, p_off_x[parent], 0)
        inb = have & (my >= 0) & (my < img.shape[0]) & (mx >= 0) & (mx < img.shape[1])
        usable = inb.copy()
        usable[inb] = allowed[my[inb], mx[inb]]
        off_y[usable] = my[usable] - cy[usable]
        off_x[usable] = mx[usable] - cx[usable]
        K.nnf_refresh_distances(
            img, ctx, img, source, cy, cx, r, off_y, off_x, dist
        )
    for em in range(cfg.em_iterations):
        for it in range(cfg.nnf_iterations):
            K.nnf_sweep(
                img, ctx, img, source, allowed, cy, cx, cidx, r,
                it % 2, seed_u, _phase(_STAGE_FILL_SWEEP, level, em, it),
                radius0, cfg.random_search_decay, off_y, off_x, dist,
            )
        K.vote_fill(
            img, source, cidx, off_y, off_x, dist, hy, hx, r, votes, counts
        )
        img[hy, hx] = votes
        voted = counts > 0
        if voted.any():
            ctx[hy[voted], hx[voted]] = True
        if em < cfg.em_iterations - 1:
            K.nnf_refresh_distances(
                img, ctx, img, source, cy, cx, r, off_y, off_x, dist
            )
    return cidx, off_y, off_x


def build_nnf(
    image: Image,
    target_mask: Mask,
    source_mask: Mask,
    config: InpaintConfig | None = None,
) -> NearestNeighborField:
    """Match every target-mask patch to its best source patch.

    Random init is followed by `nnf_iterations` propagation/search
    sweeps; replacement is strictly improving, so rerunning with more
    sweeps never worsens any center's distance.
    """
    cfg = config if config is not None else InpaintConfig()
    img = as_image(image)
    tgt = as_mask(target_mask)
    src = as_mask(source_mask)
    for name, m in (("target_mask", tgt), ("source_mask", src)):
        if m.shape != img.shape:
            raise DimensionMismatch(
                f"{name} shape {m.shape} does not match image shape {img.shape}"
            )
    allowed, ay, ax = _allowed_centers(src, cfg.patch_size)
    if ay.size == 0:
        raise InsufficientNeighborhood(
            "source_mask admits no patch window inside its bounding box "
            f"with a valid source pixel (patch_size={cfg.patch_size})"
        )
    cy, cx = np.nonzero(tgt)
    cy = cy.astype(np.int64)
    cx = cx.astype(np.int64)
    r = cfg.patch_size // 2
    ctx = np.ones(img.shape, dtype=bool)
    cidx = np.full(img.shape, -1, dtype=np.int64)
    cidx[cy, cx] = np.arange(cy.size, dtype=np.int64)
    sw = bounding_window(src)
    radius0 = float(np.hypot(sw.height, sw.width))
    off_y = np.zeros(cy.size, dtype=np.int64)
    off_x = np.zeros(cx.size, dtype=np.int64)
    dist = np.empty(cy.size, dtype=np.float64)
    work = np.ascontiguousarray(img)
    seed_u = np.uint64(_seed64(cfg.rng_seed))
    K.nnf_random_init(
        work, ctx, work, src, ay, ax, cy, cx, r,
        seed_u, _phase(_STAGE_NNF_INIT, 0, 0, 0), off_y, off_x, dist,
    )
    init_dist = dist.copy()
    for it in range(cfg.nnf_iterations):
        K.nnf_sweep(
            work, ctx, work, src, allowed, cy, cx, cidx, r,
            it % 2, seed_u, _phase(_STAGE_NNF_SWEEP, 0, 0, it),
            radius0, cfg.random_search_decay, off_y, off_x, dist,
        )
    return NearestNeighborField(
        patch_size=cfg.patch_size,
        center_y=cy, center_x=cx,
        offset_y=off_y, offset_x=off_x,
        distance=dist, init_distance=init_dist,
    )


def fill_hole(
    image: Image,
    hole_mask: Mask,
    source_mask: Mask,
    config: InpaintConfig | None = None,
) -> Image:
    """Rewrite the hole with content synthesized from the source region.

    Pixels outside the hole are returned bit-exactly; an empty hole
    returns the input unchanged.
    """
    cfg = config if config is not None else InpaintConfig()
    img = as_image(image)
    hole = as_mask(hole_mask)
    src = as_mask(source_mask)
    for name, m in (("hole_mask", hole), ("source_mask", src)):
        if m.shape != img.shape:
            raise DimensionMismatch(
                f"{name} shape {m.shape} does not match image shape {img.shape}"
            )
    if not hole.any():
        return img
    if (hole & src).any():
        raise OverlappingMasks("hole_mask and source_mask must be disjoint")
    if not src.any():
        raise EmptyRegion("source_mask has no set pixels")
    _, ay0, _ = _allowed_centers(src, cfg.patch_size, require_full=True)
    if ay0.size == 0:
        raise InsufficientNeighborhood(
            "source_mask admits no full patch inside its bounding box "
            f"(patch_size={cfg.patch_size})"
        )

    # work on the joint bounding box plus a patch of context; align the
    # origin to the coarsest pyramid block so downsampling cells sit on
    # the full image's grid at every level
    hole_win = bounding_window(hole)
    depth = 1
    d = min(hole_win.shape)
    while d // 2 >= 2 * cfg.patch_size:
        depth += 1
        d //= 2
    if cfg.pyramid_levels is not None:
        depth = min(depth, cfg.pyramid_levels)
    grain = 1 << (depth - 1)
    union = bounding_window(hole | src)
    y0 = max(0, union.y0 - cfg.patch_size) & ~(grain - 1)
    x0 = max(0, union.x0 - cfg.patch_size) & ~(grain - 1)
    y1 = min(img.shape[0], union.y1 + cfg.patch_size)
    x1 = min(img.shape[1], union.x1 + cfg.patch_size)
    w_img = np.ascontiguousarray(img[y0:y1, x0:x1])
    w_hole = np.ascontiguousarray(hole[y0:y1, x0:x1])
    w_src = np.ascontiguousarray(src[y0:y1, x0:x1])

    levels = _build_pyramid(w_img, w_hole, w_src, cfg)
    seed = _seed64(cfg.rng_seed)

    # coarsest level starts from boundary diffusion out of the source
    c_img, c_hole, c_src = levels[-1]
    left = K.diffuse_fill(c_img, c_src.copy(), c_hole)
    if left > 0:
        # hole pixels not 4-connected to the source get the source mean
        c_img[c_hole & ~_reached(c_src, c_hole)] = float(c_img[c_src].mean())

    inherit = None
    for level in range(len(levels) - 1, -1, -1):
        l_img, l_hole, l_src = levels[level]
        coarsest = level == len(levels) - 1
        if not coarsest:
            f_img, f_hole, _ = levels[level + 1]
            hy, hx = np.nonzero(l_hole)
            l_img[hy, hx] = f_img[hy // 2, hx // 2]
        inherit = _run_level(
            l_img, l_hole, l_src, cfg, level, seed,
            trust_hole_at_start=not coarsest,
            inherit=inherit,
        )

    out = img.copy()
    out[hole] = levels[0][0][w_hole]
    out.flags.writeable = False
    return out


def _reached(known: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Target pixels 4-connected to a known pixel through the target."""
    reach = known.copy()
    frontier = True
    while frontier:
        grown = reach.copy()
        grown[1:] |= reach[:-1]
        grown[:-1] |= reach[1:]
        grown[:, 1:] |= reach[:, :-1]
        grown[:, :-1] |= reach[:, 1:]
        grown &= known | target
        frontier = bool((grown & ~reach).any())
        reach = grown
    return reach & target


def initialize_layers(
    image: Image, regions: RegionSpec, config: InpaintConfig | None = None
) -> LayerPair:
    """First guess for the two layers: fill the overlap once from each
    tissue's exclusive neighborhood, then crop to the overlap window."""
    cfg = config if config is not None else InpaintConfig()
    img = as_image(image)
    validate_regions(img, regions, patch_size=cfg.patch_size)
    top_fill = fill_hole(
        img, regions.overlap, regions.n1,
        replace(cfg, rng_seed=_split_seed(cfg.rng_seed, 1)),
    )
    bottom_fill = fill_hole(
        img, regions.overlap, regions.n2,
        replace(cfg, rng_seed=_split_seed(cfg.rng_seed, 2)),
    )
    win = bounding_window(regions.overlap)
    valid = np.ascontiguousarray(regions.overlap[win.y0:win.y1, win.x0:win.x1])
    top = np.where(valid, crop(top_fill, win), 0.0)
    bottom = np.where(valid, crop(bottom_fill, win), 0.0)
    return LayerPair(top=top, bottom=bottom, valid=valid)
