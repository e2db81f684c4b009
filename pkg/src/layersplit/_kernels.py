"""Compiled kernels for nearest-neighbor-field search, voting, and
boundary diffusion.

Randomness: every draw is a pure function of (seed, phase, pixel index,
draw index) hashed through splitmix64, a counter-based 64-bit mixer.
The phase packs (stage, pyramid level, outer iteration, search pass), so
streams are splittable per pixel and per pass and no execution order or
thread count can change a drawn value.  All kernels here are
single-threaded on purpose: outputs are bit-identical for a fixed seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z + _GOLDEN)
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _hash3(seed, phase, pixel, draw):
    h = _mix64(seed ^ _mix64(phase))
    h = _mix64(h ^ _mix64(U64(pixel)))
    return _mix64(h ^ _mix64(U64(draw)))


@njit(cache=True, inline="always")
def _unit(h):
    """Map a 64-bit hash to a float in [0, 1)."""
    return (h >> U64(11)) * _INV_2_53


@njit(cache=True, inline="always")
def _patch_distance(img_t, ctx_valid, img_s, src_valid, ty, tx, sy, sx, r):
    """Mean SSD over offsets valid on both sides; inf when none are.

    Target pixels count when in-bounds and context-valid; source pixels
    when inside the source mask.  The source patch itself is guaranteed
    in-bounds by the allowed-centers grid.
    """
    h, w = img_t.shape
    acc = 0.0
    cnt = 0
    for u in range(-r, r + 1):
        tyy = ty + u
        if tyy < 0 or tyy >= h:
            continue
        syy = sy + u
        for v in range(-r, r + 1):
            txx = tx + v
            if txx < 0 or txx >= w:
                continue
            if not ctx_valid[tyy, txx]:
                continue
            sxx = sx + v
            if not src_valid[syy, sxx]:
                continue
            d = img_t[tyy, txx] - img_s[syy, sxx]
            acc += d * d
            cnt += 1
    if cnt == 0:
        return np.inf
    return acc / cnt


@njit(cache=True)
def nnf_random_init(
    img_t, ctx_valid, img_s, src_valid, allowed_y, allowed_x,
    cy, cx, r, seed, phase, off_y, off_x, dist,
):
    """Seed each center with a uniformly drawn allowed source center."""
    n_alloc = allowed_y.size
    for i in range(cy.size):
        u = _unit(_hash3(seed, phase, i, 0))
        k = int(u * n_alloc)
        if k >= n_alloc:
            k = n_alloc - 1
        sy = allowed_y[k]
        sx = allowed_x[k]
        off_y[i] = sy - cy[i]
        off_x[i] = sx - cx[i]
        dist[i] = _patch_distance(
            img_t, ctx_valid, img_s, src_valid, cy[i], cx[i], sy, sx, r
        )


@njit(cache=True)
def nnf_sweep(
    img_t, ctx_valid, img_s, src_valid, allowed,
    cy, cx, cidx, r, reverse, seed, phase, radius0, decay,
    off_y, off_x, dist,
):
    """One propagation + random-search pass over all centers.

    Raster order when `reverse` is 0 (propagating from the left/top
    neighbors), reverse-raster otherwise (right/bottom).  Replacement is
    strictly-less, so the first-found minimum is kept and per-center
    distance never increases.
    """
    hs, ws = img_s.shape
    n = cy.size
    step = -1 if reverse else 1
    dy = -step  # neighbor offset along scan direction
    for k in range(n):
        i = k if step == 1 else n - 1 - k
        ty = cy[i]
        tx = cx[i]
        # propagation from the two already-visited neighbors
        for axis in range(2):
            ny = ty + dy if axis == 0 else ty
            nx = tx if axis == 0 else tx + dy
            if ny < 0 or ny >= cidx.shape[0] or nx < 0 or nx >= cidx.shape[1]:
                continue
            j = cidx[ny, nx]
            if j < 0:
                continue
            my = ty + off_y[j]
            mx = tx + off_x[j]
            if my < 0 or my >= hs or mx < 0 or mx >= ws or not allowed[my, mx]:
                continue
            d = _patch_distance(img_t, ctx_valid, img_s, src_valid, ty, tx, my, mx, r)
            if d < dist[i]:
                dist[i] = d
                off_y[i] = my - ty
                off_x[i] = mx - tx
        # random search around the current best, geometrically decaying radius
        rad = radius0
        draw = 0
        while rad >= 1.0:
            u1 = _unit(_hash3(seed, phase, i, draw))
            u2 = _unit(_hash3(seed, phase, i, draw + 1))
            draw += 2
            my = ty + off_y[i] + int(np.floor((2.0 * u1 - 1.0) * rad))
            mx = tx + off_x[i] + int(np.floor((2.0 * u2 - 1.0) * rad))
            rad *= decay
            if my < 0 or my >= hs or mx < 0 or mx >= ws or not allowed[my, mx]:
                continue
            d = _patch_distance(img_t, ctx_valid, img_s, src_valid, ty, tx, my, mx, r)
            if d < dist[i]:
                dist[i] = d
                off_y[i] = my - ty
                off_x[i] = mx - tx


@njit(cache=True)
def nnf_refresh_distances(
    img_t, ctx_valid, img_s, src_valid, cy, cx, r, off_y, off_x, dist
):
    """Recompute stored distances after the target content changed."""
    for i in range(cy.size):
        dist[i] = _patch_distance(
            img_t, ctx_valid, img_s, src_valid,
            cy[i], cx[i], cy[i] + off_y[i], cx[i] + off_x[i], r,
        )


@njit(cache=True)
def vote_fill(
    img, src_valid, cidx, off_y, off_x, dist, hole_y, hole_x, r,
    out_vals, out_cnts,
):
    """Average, per hole pixel, the source pixels that the matched
    patches overlay onto it (uniform weights).

    Patches with an infinite distance carry no information (no valid
    context yet) and are skipped, so the fill grows inward from real
    evidence.  A pixel with no contribution keeps its current value;
    out_cnts reports how many votes each pixel received.
    """
    h, w = img.shape
    for p in range(hole_y.size):
        py = hole_y[p]
        px = hole_x[p]
        acc = 0.0
        cnt = 0
        for u in range(-r, r + 1):
            ny = py + u
            if ny < 0 or ny >= h:
                continue
            for v in range(-r, r + 1):
                nx = px + v
                if nx < 0 or nx >= w:
                    continue
                j = cidx[ny, nx]
                if j < 0 or not np.isfinite(dist[j]):
                    continue
                qy = py + off_y[j]
                qx = px + off_x[j]
                if qy < 0 or qy >= h or qx < 0 or qx >= w:
                    continue
                if not src_valid[qy, qx]:
                    continue
                acc += img[qy, qx]
                cnt += 1
        if cnt > 0:
            out_vals[p] = acc / cnt
        else:
            out_vals[p] = img[py, px]
        out_cnts[p] = cnt


@njit(cache=True)
def diffuse_fill(vals, known, target):
    """Fill `target` pixels by repeated synchronous 4-neighbor averaging
    of already-known values, growing inward from the `known` seeds.

    Pixels unreachable from any seed are left for the caller's fallback.
    Returns the number still unfilled.
    """
    h, w = vals.shape
    filled = known.copy()
    pending = 0
    for y in range(h):
        for x in range(w):
            if target[y, x] and not filled[y, x]:
                pending += 1
    while pending > 0:
        new_vals = vals.copy()
        new_filled = filled.copy()
        progressed = False
        for y in range(h):
            for x in range(w):
                if not target[y, x] or filled[y, x]:
                    continue
                acc = 0.0
                cnt = 0
                if y > 0 and filled[y - 1, x]:
                    acc += vals[y - 1, x]
                    cnt += 1
                if y < h - 1 and filled[y + 1, x]:
                    acc += vals[y + 1, x]
                    cnt += 1
                if x > 0 and filled[y, x - 1]:
                    acc += vals[y, x - 1]
                    cnt += 1
                if x < w - 1 and filled[y, x + 1]:
                    acc += vals[y, x + 1]
                    cnt += 1
                if cnt > 0:
                    new_vals[y, x] = acc / cnt
                    new_filled[y, x] = True
                    progressed = True
                    pending -= 1
        vals[:, :] = new_vals
        filled[:, :] = new_filled
        if not progressed:
            break
    return pending
