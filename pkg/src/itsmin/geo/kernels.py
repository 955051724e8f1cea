"""Batch point-vs-polygon kernels for sampling-heavy geometry work.

These are float-precision screens used where thousands of points are
classified per call: event-scan sampling, counterexample searches, and
the benchmarks.  Final decisions near degenerate configurations are
always re-made with the exact predicates in :mod:`itsmin.geo.polygon`.

As with the sweep kernels, each function exists as numba-compiled loops
and as a vectorized numpy equivalent; `itsmin._jit` selects the backend
and both stay importable for agreement tests.
"""

from functools import lru_cache

import numpy as np

from .._jit import HAS_JIT, njit

__all__ = [
    "point_in_polygon_batch",
    "point_in_polygon_batch_numpy",
    "point_in_polygon_batch_jit",
    "gap_mask_batch",
    "gap_mask_batch_numpy",
    "gap_mask_batch_jit",
    "polygon_arrays",
]


def polygon_arrays(poly):
    """(vx, vy, reflex_indices) float64/int64 arrays for a polygon."""
    return _polygon_arrays_cached(poly)


@lru_cache(maxsize=128)
def _polygon_arrays_cached(poly):
    vx = np.array([v[0] for v in poly.vertices], np.float64)
    vy = np.array([v[1] for v in poly.vertices], np.float64)
    reflex = np.array(poly.reflex_indices, np.int64)
    return vx, vy, reflex


def _point_in_polygon_loops(px, py, vx, vy):
    n = px.shape[0]
    m = vx.shape[0]
    out = np.zeros(n, np.uint8)
    for i in range(n):
        x = px[i]
        y = py[i]
        inside = False
        for e in range(m):
            ax, ay = vx[e], vy[e]
            bx, by = vx[(e + 1) % m], vy[(e + 1) % m]
            if (ay > y) != (by > y):
                t = (y - ay) / (by - ay)
                if x < ax + t * (bx - ax):
                    inside = not inside
        out[i] = 1 if inside else 0
    return out


def point_in_polygon_batch_numpy(px, py, vx, vy):
    px = np.asarray(px, np.float64)
    py = np.asarray(py, np.float64)
    ax, ay = vx, vy
    bx, by = np.roll(vx, -1), np.roll(vy, -1)
    yy = py[:, None]
    straddle = (ay[None, :] > yy) != (by[None, :] > yy)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (yy - ay[None, :]) / (by[None, :] - ay[None, :])
        xcross = ax[None, :] + t * (bx[None, :] - ax[None, :])
    hits = straddle & (px[:, None] < xcross)
    return (hits.sum(axis=1) % 2).astype(np.uint8)


def _gap_mask_loops(px, py, vx, vy, reflex):
    """out[i, a] = 1 iff reflex vertex reflex[a] casts a gap seen from
    point i: both its neighbors lie strictly on one side of the sight
    line, and no non-incident edge properly blocks the segment."""
    n = px.shape[0]
    m = vx.shape[0]
    nr = reflex.shape[0]
    out = np.zeros((n, nr), np.uint8)
    for i in range(n):
        x = px[i]
        y = py[i]
        for a in range(nr):
            k = reflex[a]
            rx, ry = vx[k], vy[k]
            dx, dy = rx - x, ry - y
            kp = (k - 1) % m
            kn = (k + 1) % m
            s1 = dx * (vy[kp] - y) - dy * (vx[kp] - x)
            s2 = dx * (vy[kn] - y) - dy * (vx[kn] - x)
            if s1 * s2 <= 0.0:
                continue
            blocked = False
            for e in range(m):
                if e == k or (e + 1) % m == k:
                    continue
                ax, ay = vx[e], vy[e]
                bx, by = vx[(e + 1) % m], vy[(e + 1) % m]
                o1 = dx * (ay - y) - dy * (ax - x)
                o2 = dx * (by - y) - dy * (bx - x)
                if o1 * o2 >= 0.0:
                    continue
                ex, ey = bx - ax, by - ay
                o3 = ex * (y - ay) - ey * (x - ax)
                o4 = ex * (ry - ay) - ey * (rx - ax)
                if o3 * o4 < 0.0:
                    blocked = True
                    break
            if not blocked:
                out[i, a] = 1
    return out


def gap_mask_batch_numpy(px, py, vx, vy, reflex):
    px = np.asarray(px, np.float64)
    py = np.asarray(py, np.float64)
    n = px.shape[0]
    m = vx.shape[0]
    nr = reflex.shape[0]
    out = np.zeros((n, nr), np.uint8)
    for a in range(nr):
        k = int(reflex[a])
        rx, ry = vx[k], vy[k]
        dx, dy = rx - px, ry - py
        kp, kn = (k - 1) % m, (k + 1) % m
        s1 = dx * (vy[kp] - py) - dy * (vx[kp] - px)
        s2 = dx * (vy[kn] - py) - dy * (vx[kn] - px)
        ok = s1 * s2 > 0.0
        blocked = np.zeros(n, bool)
        for e in range(m):
            if e == k or (e + 1) % m == k:
                continue
            ax, ay = vx[e], vy[e]
            bx, by = vx[(e + 1) % m], vy[(e + 1) % m]
            o1 = dx * (ay - py) - dy * (ax - px)
            o2 = dx * (by - py) - dy * (bx - px)
            straddle = o1 * o2 < 0.0
            ex, ey = bx - ax, by - ay
            o3 = ex * (py - ay) - ey * (px - ax)
            o4 = ex * (ry - ay) - ey * (rx - ax)
            blocked |= straddle & (o3 * o4 < 0.0)
        out[:, a] = (ok & ~blocked).astype(np.uint8)
    return out


if HAS_JIT:
    point_in_polygon_batch_jit = njit(cache=True)(_point_in_polygon_loops)
    gap_mask_batch_jit = njit(cache=True)(_gap_mask_loops)
    point_in_polygon_batch = point_in_polygon_batch_jit
    gap_mask_batch = gap_mask_batch_jit
else:  # pragma: no cover - exercised via the env flag
    point_in_polygon_batch_jit = None
    gap_mask_batch_jit = None
    point_in_polygon_batch = point_in_polygon_batch_numpy
    gap_mask_batch = gap_mask_batch_numpy
