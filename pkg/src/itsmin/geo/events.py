"""Critical events of the gap sensor along a path.

Between events the gap observation is constant, so walking a path and
sampling the sensor finds every change interval; bisection then pins each
change point down to a parameter tolerance, and the change is classified
with ground truth:

* a gap appears or disappears when the path crosses the extension of one
  of the occluder's own edges (the shadow boundary of that vertex);
* two gaps split or merge when the path crosses the line through two
  reflex vertices (a bitangent), the nearer one occluding the farther.

Sampling uses the float kernels (one batch call per segment); the
classification predicates are exact.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ..ts import ItsError
from .kernels import gap_mask_batch, polygon_arrays
from .polygon import OnBoundaryError, OutsidePolygonError, SimplePolygon, orient

import numpy as np

GAP_TOKEN = "gap"

__all__ = ["CriticalEvent", "StepTooCoarseError", "event_trace", "first_event_on_segment"]


class StepTooCoarseError(ItsError):
    """Two observation changes could not be separated at this step size."""


@dataclass(frozen=True)
class CriticalEvent:
    """One observation change.

    ``occluders`` is ground truth: the reflex vertex whose gap changed,
    preceded by its occluding partner for split/merge.  ``tokens`` is the
    sensor-level view (anonymous).  ``point`` lies just past the event.
    """

    kind: str
    t: float
    tokens: Tuple[str, ...]
    occluders: Tuple[int, ...]
    point: Tuple[float, float]
    pre_ids: Tuple[int, ...]
    post_ids: Tuple[int, ...]

    def as_row(self):
        return (self.kind, self.tokens, self.t)


def _ids_at(poly: SimplePolygon, p) -> frozenset:
    vx, vy, reflex = polygon_arrays(poly)
    if reflex.size == 0:
        return frozenset()
    row = gap_mask_batch(
        np.array([p[0]], np.float64), np.array([p[1]], np.float64), vx, vy, reflex
    )[0]
    return frozenset(int(reflex[i]) for i in range(reflex.size) if row[i])


def _classify(poly, pre_ids, post_ids, p_lo, p_hi, t, point):
    gained = post_ids - pre_ids
    lost = pre_ids - post_ids
    if len(gained) + len(lost) != 1:
        raise StepTooCoarseError(
            f"observation changed by {len(gained) + len(lost)} gaps at once near t={t:.6f}"
        )
    k = next(iter(gained or lost))
    r = poly.vertex(k)
    mid = ((p_lo[0] + p_hi[0]) / 2.0, (p_lo[1] + p_hi[1]) / 2.0)

    edge_flip = False
    for n in (poly.vertex(k - 1), poly.vertex(k + 1)):
        s_lo = orient(n, r, p_lo)
        s_hi = orient(n, r, p_hi)
        if s_lo * s_hi < 0:
            beyond = (mid[0] - r[0]) * (r[0] - n[0]) + (mid[1] - r[1]) * (r[1] - n[1])
            if beyond > 0:
                edge_flip = True

    partner = None
    for m in sorted(pre_ids & post_ids):
        rm = poly.vertex(m)
        s_lo = orient(p_lo, rm, r)
        s_hi = orient(p_hi, rm, r)
        if s_lo * s_hi < 0:
            if math.dist(mid, rm) < math.dist(mid, r):
                partner = m
                break

    if edge_flip and partner is None:
        kind = "appear" if gained else "disappear"
        occ = (k,)
    elif partner is not None and not edge_flip:
        kind = "split" if gained else "merge"
        occ = (partner, k)
    else:
        raise StepTooCoarseError(
            f"cannot attribute the change at t={t:.6f} to a single crossing"
        )
    return CriticalEvent(
        kind,
        t,
        (GAP_TOKEN,) * len(occ),
        occ,
        point,
        tuple(sorted(pre_ids)),
        tuple(sorted(post_ids)),
    )


def _scan_interval(poly, point_at, tol, tA, idsA, tB, idsB, depth=0) -> List[CriticalEvent]:
    """All events in (tA, tB], assuming constant observation means no events."""
    if idsA == idsB:
        return []
    if depth > 64:
        raise StepTooCoarseError("could not separate events within the refinement budget")
    lo, hi = tA, tB
    p_hi = point_at(hi)
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        pm = point_at(mid)
        if _ids_at(poly, pm) == idsA:
            lo = mid
        else:
            hi, p_hi = mid, pm
    p_lo = point_at(lo)
    ids_hi = _ids_at(poly, p_hi)
    ev = _classify(poly, idsA, ids_hi, p_lo, p_hi, (lo + hi) / 2.0, p_hi)
    return [ev] + _scan_interval(poly, point_at, tol, hi, ids_hi, tB, idsB, depth + 1)


def _polyline_param(path):
    pts = [tuple(map(float, p)) for p in path]
    lens = [math.dist(a, b) for a, b in zip(pts, pts[1:])]
    total = sum(lens)
    if total == 0.0:
        return pts, None, 0.0
    cum = [0.0]
    for seg in lens:
        cum.append(cum[-1] + seg)

    def point_at(t: float):
        s = t * total
        for i, seg in enumerate(lens):
            if s <= cum[i + 1] or i == len(lens) - 1:
                if seg == 0.0:
                    return pts[i]
                u = (s - cum[i]) / seg
                a, b = pts[i], pts[i + 1]
                return (a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1]))
        return pts[-1]

    return pts, point_at, total


def event_trace(
    path: Sequence[Tuple[float, float]],
    poly: SimplePolygon,
    step_size: float,
    tol: float = 1e-6,
) -> List[CriticalEvent]:
    """Classified observation changes along a polyline, ordered by t.

    ``t`` is the arclength fraction in [0, 1] over the whole polyline;
    each change point is located to within ``tol`` of it.
    """
    if step_size <= 0:
        raise ValueError("step_size must be positive")
    pts, point_at, total = _polyline_param(path)
    for p in pts:
        where = poly.contains(p)
        if where == "out":
            raise OutsidePolygonError("path leaves the polygon")
        if where == "boundary":
            raise OnBoundaryError("path touches the boundary; gaps are undefined there")
    if point_at is None:
        return []

    steps = max(2, int(math.ceil(total / step_size)) + 1)
    params = [i / (steps - 1) for i in range(steps)]
    sample_pts = [point_at(t) for t in params]
    vx, vy, reflex = polygon_arrays(poly)
    if reflex.size == 0:
        return []
    mask = gap_mask_batch(
        np.array([p[0] for p in sample_pts], np.float64),
        np.array([p[1] for p in sample_pts], np.float64),
        vx,
        vy,
        reflex,
    )
    ids = [
        frozenset(int(reflex[j]) for j in range(reflex.size) if mask[i, j])
        for i in range(steps)
    ]
    events: List[CriticalEvent] = []
    for i in range(steps - 1):
        events.extend(
            _scan_interval(poly, point_at, tol, params[i], ids[i], params[i + 1], ids[i + 1])
        )
    return events


def first_event_on_segment(
    poly: SimplePolygon,
    a: Tuple[float, float],
    b: Tuple[float, float],
    step_size: float,
    tol: float = 1e-7,
) -> Optional[CriticalEvent]:
    """First observation change on segment ab, with t as the segment
    fraction; None when the observation holds all the way."""
    length = math.dist(a, b)
    if length == 0.0:
        return None

    def point_at(t: float):
        return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))

    steps = max(2, int(math.ceil(length / step_size)) + 1)
    params = [i / (steps - 1) for i in range(steps)]
    sample_pts = [point_at(t) for t in params]
    vx, vy, reflex = polygon_arrays(poly)
    if reflex.size == 0:
        return None
    mask = gap_mask_batch(
        np.array([p[0] for p in sample_pts], np.float64),
        np.array([p[1] for p in sample_pts], np.float64),
        vx,
        vy,
        reflex,
    )
    ids = [
        frozenset(int(reflex[j]) for j in range(reflex.size) if mask[i, j])
        for i in range(steps)
    ]
    for i in range(steps - 1):
        if ids[i] != ids[i + 1]:
            found = _scan_interval(
                poly, point_at, tol, params[i], ids[i], params[i + 1], ids[i + 1]
            )
            if found:
                return found[0]
    return None
