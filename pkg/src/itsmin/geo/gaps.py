"""The gap sensor: what a depth-discontinuity detector reports.

From a point inside a nonconvex polygon, each reflex vertex that grazes
the line of sight hides a pocket of the boundary behind it; the sensor
reports one anonymous token per such discontinuity, in cyclic angular
order, and nothing else.  Ground-truth occluder ids ride along on each
token for event classification and testing, but deliberately do not
participate in observation equality: two observations are equal exactly
when their public token sequences match up to rotation.
"""

import math
import random
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .polygon import (
    OnBoundaryError,
    OutsidePolygonError,
    SimplePolygon,
    optimal_action,
    orient,
)

GAP_TOKEN = "gap"

__all__ = ["Gap", "GapObservation", "gap_observation", "cyclic_equal", "reactive_counterexample"]


@dataclass(frozen=True)
class Gap:
    """One boundary discontinuity.  Only ``token`` is sensor-visible."""

    token: str = GAP_TOKEN
    occluder: int = field(default=-1, compare=False)
    angle: float = field(default=0.0, compare=False)
    side: int = field(default=0, compare=False)


def cyclic_equal(a: Tuple, b: Tuple) -> bool:
    """Equality of tuples up to rotation."""
    if len(a) != len(b):
        return False
    if not a:
        return True
    return any(a[k:] + a[:k] == b for k in range(len(a)))


@dataclass(frozen=True)
class GapObservation:
    """Cyclic sequence of anonymous gap tokens."""

    gaps: Tuple[Gap, ...]

    def __eq__(self, other):
        if not isinstance(other, GapObservation):
            return NotImplemented
        return cyclic_equal(self.tokens, other.tokens)

    def __hash__(self):
        # Rotation-invariant: the multiset of tokens.
        return hash(tuple(sorted(self.tokens)))

    @property
    def tokens(self) -> Tuple[str, ...]:
        return tuple(g.token for g in self.gaps)

    @property
    def occluders(self) -> Tuple[int, ...]:
        return tuple(g.occluder for g in self.gaps)

    def __len__(self):
        return len(self.gaps)


def gap_observation(x, poly: SimplePolygon) -> GapObservation:
    """What the gap sensor reports from a strictly interior point.

    A reflex vertex r casts a gap when it is visible from x and both of
    its boundary neighbors lie strictly on the same side of the sight
    line - the line of sight grazes r and continues into hidden space.
    """
    where = poly.contains(x)
    if where == "out":
        raise OutsidePolygonError("gap sensor query outside polygon")
    if where == "boundary":
        raise OnBoundaryError("gap sensor undefined on the boundary")
    found = []
    for k in poly.reflex_indices:
        r = poly.vertex(k)
        s1 = orient(x, r, poly.vertex(k - 1))
        s2 = orient(x, r, poly.vertex(k + 1))
        if s1 == 0 or s1 != s2:
            continue
        if not poly.visible(x, r):
            continue
        found.append(Gap(GAP_TOKEN, k, math.atan2(r[1] - x[1], r[0] - x[0]), s1))
    found.sort(key=lambda g: g.angle)
    return GapObservation(tuple(found))


def reactive_counterexample(
    poly: SimplePolygon,
    goal: int,
    samples: int = 10_000,
    seed: int = 0,
) -> Optional[Tuple[Tuple[float, float], Tuple[float, float]]]:
    """Two points the gap sensor cannot tell apart that need different moves.

    Samples interior points deterministically; for each, pairs the
    (anonymous, cyclic) gap observation with the first shortest-path
    vertex.  The first sampled pair with equal observations but different
    targets is returned; None if the budget runs out.  On convex polygons
    every point heads straight for the goal, so there is nothing to find.
    """
    rng = random.Random(seed)
    by_obs = {}
    x0, y0, x1, y1 = poly.bbox
    produced = 0
    attempts = 0
    while produced < samples and attempts < 100 * samples + 1000:
        attempts += 1
        p = (rng.uniform(x0, x1), rng.uniform(y0, y1))
        if poly.contains(p) != "in":
            continue
        produced += 1
        try:
            obs = gap_observation(p, poly)
        except OnBoundaryError:
            continue
        target = optimal_action(p, goal, poly).target
        key = obs  # hash/eq are rotation-invariant
        seen = by_obs.setdefault(key, [])
        for other_target, other_point in seen:
            if other_target != target:
                return other_point, p
        if all(t != target for t, _ in seen) or not seen:
            seen.append((target, p))
    return None
