"""Simple polygons with exact predicates, visibility, and shortest paths.

Orientation tests use a floating-point filter backed by exact rational
arithmetic, so visibility decisions never flip from rounding.  A small
epsilon (1e-9 length units) is used in exactly one place: classifying a
point as lying on the boundary.

The polygon is the free space: everything on or inside the boundary is
traversable.  Shortest paths run over the visibility graph of the
vertices, which is exact for polygons without holes.
"""

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from ..ts import ItsError

BOUNDARY_EPS = 1e-9

Point = Tuple[float, float]


class PolygonError(ItsError):
    """The vertex list does not describe a usable simple polygon."""


class OutsidePolygonError(ItsError):
    """A query point lies outside the closed polygon."""


class OnBoundaryError(ItsError):
    """The query is only defined for strictly interior points."""


def orient(a: Point, b: Point, c: Point) -> int:
    """Sign of the turn a->b->c: +1 left, -1 right, 0 collinear.  Exact."""
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    scale = (abs(b[0] - a[0]) + abs(b[1] - a[1])) * (abs(c[0] - a[0]) + abs(c[1] - a[1]))
    if abs(det) > 1e-12 * scale or scale == 0.0:
        return 0 if det == 0.0 else (1 if det > 0.0 else -1)
    det = (Fraction(b[0]) - Fraction(a[0])) * (Fraction(c[1]) - Fraction(a[1])) - (
        Fraction(b[1]) - Fraction(a[1])
    ) * (Fraction(c[0]) - Fraction(a[0]))
    if det == 0:
        return 0
    return 1 if det > 0 else -1


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    """Exact: p lies on the closed segment ab (assuming nothing)."""
    if orient(a, b, p) != 0:
        return False
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _proper_cross(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Open segments ab and cd cross in a single interior point."""
    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def _segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Closed segments ab and cd share at least one point."""
    if _proper_cross(a, b, c, d):
        return True
    return (
        _on_segment(c, a, b)
        or _on_segment(d, a, b)
        or _on_segment(a, c, d)
        or _on_segment(b, c, d)
    )


def _dist(a: Point, b: Point) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def _point_segment_distance(p: Point, a: Point, b: Point) -> float:
    vx, vy = b[0] - a[0], b[1] - a[1]
    wx, wy = p[0] - a[0], p[1] - a[1]
    seg2 = vx * vx + vy * vy
    if seg2 == 0.0:
        return math.hypot(wx, wy)
    t = max(0.0, min(1.0, (wx * vx + wy * vy) / seg2))
    return math.hypot(wx - t * vx, wy - t * vy)


@dataclass(frozen=True)
class VertexAction:
    """Motion command: head straight for a polygon vertex."""

    target: int
    heading: float


@dataclass(frozen=True)
class SimplePolygon:
    vertices: Tuple[Point, ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise PolygonError("a polygon needs at least 3 vertices")
        if len(set(verts)) != n:
            raise PolygonError("duplicate vertices")
        for i in range(n):
            if orient(verts[i - 1], verts[i], verts[(i + 1) % n]) == 0:
                raise PolygonError(
                    f"vertices {i - 1}, {i}, {(i + 1) % n} are collinear"
                )
        area2 = 0.0
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            area2 += a[0] * b[1] - b[0] * a[1]
        if area2 <= 0.0:
            raise PolygonError("vertices must run counterclockwise")
        # Simplicity: non-adjacent edges must not meet at all.
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                c, d = verts[j], verts[(j + 1) % n]
                if _segments_touch(a, b, c, d):
                    raise PolygonError(f"edges {i} and {j} intersect")

    @property
    def n(self) -> int:
        return len(self.vertices)

    def vertex(self, i: int) -> Point:
        return self.vertices[i % self.n]

    def edges(self):
        for i in range(self.n):
            yield self.vertices[i], self.vertices[(i + 1) % self.n]

    def is_reflex(self, i: int) -> bool:
        return orient(self.vertex(i - 1), self.vertex(i), self.vertex(i + 1)) < 0

    @property
    def reflex_indices(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.is_reflex(i))

    @property
    def is_convex(self) -> bool:
        return not self.reflex_indices

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    @property
    def area(self) -> float:
        total = 0.0
        for a, b in self.edges():
            total += a[0] * b[1] - b[0] * a[1]
        return total / 2.0

    def contains(self, p: Point, eps: float = BOUNDARY_EPS) -> str:
        """Classify p as 'in', 'boundary', or 'out'.

        Anything within ``eps`` of an edge counts as boundary; elsewhere
        the even-odd test is exact.
        """
        for a, b in self.edges():
            if _point_segment_distance(p, a, b) <= eps:
                return "boundary"
        inside = False
        for a, b in self.edges():
            if (a[1] > p[1]) != (b[1] > p[1]):
                o = orient(a, b, p)
                if b[1] > a[1]:
                    if o > 0:
                        inside = not inside
                else:
                    if o < 0:
                        inside = not inside
        return "in" if inside else "out"

    def visible(self, p: Point, q: Point) -> bool:
        """True iff the closed segment pq stays inside the closed polygon."""
        cp, cq = self.contains(p), self.contains(q)
        if cp == "out" or cq == "out":
            raise OutsidePolygonError("visibility query point outside polygon")
        if p == q:
            return True
        for a, b in self.edges():
            if _proper_cross(p, q, a, b):
                return False
        # The segment may still graze vertices or run along edges and slip
        # outside in between; check a midpoint inside every touched span.
        params = {0.0, 1.0}
        for v in self.vertices:
            if _on_segment(v, p, q):
                params.add(_param_on_segment(v, p, q))
        ts = sorted(params)
        for t0, t1 in zip(ts, ts[1:]):
            if t1 - t0 <= 1e-12:
                continue
            tm = (t0 + t1) / 2.0
            mid = (p[0] + tm * (q[0] - p[0]), p[1] + tm * (q[1] - p[1]))
            if self.contains(mid) == "out":
                return False
        return True

    def inset_point(self, i: int, dist: float) -> Point:
        """A point strictly inside, ``dist`` away from vertex i along the
        interior angle bisector (falls back to halving the distance)."""
        v = self.vertex(i)
        a = self.vertex(i - 1)
        b = self.vertex(i + 1)
        ua = _unit((a[0] - v[0], a[1] - v[1]))
        ub = _unit((b[0] - v[0], b[1] - v[1]))
        d = (ua[0] + ub[0], ua[1] + ub[1])
        norm = math.hypot(*d)
        if norm < 1e-12:
            d = (-(b[1] - a[1]), b[0] - a[0])
            norm = math.hypot(*d)
        d = (d[0] / norm, d[1] / norm)
        if self.is_reflex(i):
            d = (-d[0], -d[1])
        step = dist
        for _ in range(60):
            cand = (v[0] + step * d[0], v[1] + step * d[1])
            if self.contains(cand) == "in":
                return cand
            step /= 2.0
        raise PolygonError(f"could not find an interior point near vertex {i}")

    def sample_interior(self, count: int, rng, margin: float = 0.0) -> List[Point]:
        """Rejection-sample strictly interior points (deterministic in rng)."""
        x0, y0, x1, y1 = self.bbox
        pts = []
        attempts = 0
        while len(pts) < count:
            attempts += 1
            if attempts > 10000 * max(count, 1):
                raise PolygonError("interior sampling did not converge")
            p = (rng.uniform(x0, x1), rng.uniform(y0, y1))
            if self.contains(p, eps=max(BOUNDARY_EPS, margin)) == "in":
                pts.append(p)
        return pts

    def to_text(self) -> str:
        return "\n".join(f"{x:.12g} {y:.12g}" for x, y in self.vertices) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SimplePolygon":
        verts = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise PolygonError(f"line {lineno}: expected 'x y', got {raw!r}")
            try:
                verts.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise PolygonError(f"line {lineno}: bad number in {raw!r}") from exc
        return cls(tuple(verts))


def load_polygon(path) -> SimplePolygon:
    with open(path, "r", encoding="utf-8") as fh:
        return SimplePolygon.from_text(fh.read())


def _unit(v):
    norm = math.hypot(*v)
    if norm == 0.0:
        raise PolygonError("zero-length direction")
    return (v[0] / norm, v[1] / norm)


def _param_on_segment(v: Point, p: Point, q: Point) -> float:
    dx, dy = q[0] - p[0], q[1] - p[1]
    seg2 = dx * dx + dy * dy
    return ((v[0] - p[0]) * dx + (v[1] - p[1]) * dy) / seg2


def visible(p: Point, q: Point, poly: SimplePolygon) -> bool:
    return poly.visible(p, q)


@lru_cache(maxsize=128)
def _vertex_visibility(poly: SimplePolygon):
    """Adjacency of mutually visible vertex pairs (cached per polygon)."""
    n = poly.n
    adj = {i: [] for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            if poly.visible(poly.vertex(i), poly.vertex(j)):
                adj[i].append(j)
                adj[j].append(i)
    return adj


def shortest_path(x: Point, goal: int, poly: SimplePolygon) -> Tuple[float, Tuple[int, ...]]:
    """Length and vertex sequence of the shortest path from x to a vertex.

    The sequence lists the vertices visited in order, goal last; it is
    empty when x already sits on the goal.  Ties are broken toward the
    lexicographically smallest vertex sequence, so results are stable.
    """
    if not (0 <= goal < poly.n):
        raise PolygonError(f"goal vertex {goal} out of range")
    if poly.contains(x) == "out":
        raise OutsidePolygonError("start point outside polygon")
    gpt = poly.vertex(goal)
    if x == gpt:
        return 0.0, ()
    if poly.visible(x, gpt):
        return _dist(x, gpt), (goal,)
    adj = _vertex_visibility(poly)
    start_edges = [
        i for i in range(poly.n) if poly.visible(x, poly.vertex(i))
    ]
    # Dijkstra over ('start' + vertex ids); heap entries carry the path so
    # equal lengths resolve lexicographically.
    best = {}
    heap = [(0.0, (), -1)]  # (dist, path-so-far, node; -1 is the start)
    while heap:
        d, path, node = heapq.heappop(heap)
        key = node
        if key in best and best[key] <= (d, path):
            continue
        best[key] = (d, path)
        if node == goal:
            return d, path
        if node == -1:
            outgoing = [(i, _dist(x, poly.vertex(i))) for i in start_edges]
        else:
            here = poly.vertex(node)
            outgoing = [(j, _dist(here, poly.vertex(j))) for j in adj[node]]
        for j, w in outgoing:
            cand = (d + w, path + (j,))
            if j not in best or best[j] > cand:
                heapq.heappush(heap, (cand[0], cand[1], j))
    raise PolygonError("no path found; polygon connectivity is broken")


def optimal_action(x: Point, goal: int, poly: SimplePolygon) -> VertexAction:
    """First leg of the shortest path: which vertex to head for."""
    length, path = shortest_path(x, goal, poly)
    if not path:
        return VertexAction(goal, 0.0)
    target = path[0]
    tp = poly.vertex(target)
    return VertexAction(target, math.atan2(tp[1] - x[1], tp[0] - x[0]))
