"""Shared builders and independent oracles for the test suite.

Everything here is deliberately naive: brute-force enumeration, lattice
graph search, analytic line crossings.  The oracles never call the code
paths they are used to check.
"""

import itertools
import math
import random
from importlib import resources

import numpy as np

from itsmin import (
    DEAD,
    NO_ACTION,
    ExternalSystem,
    Labeling,
    MooreMachine,
    TaskSpec,
    TransitionSystem,
    build_machine,
    is_refinement,
    is_sufficient,
)
from itsmin.restriction import HistoryPolicy


def bundled(name: str):
    """Path of a data file shipped inside the package."""
    return resources.files("itsmin") / "data" / name


# ---------------------------------------------------------------------------
# The four-cell walker used across the discrete modules.


def tetromino_external() -> ExternalSystem:
    states = ["c00", "c10", "c11", "c21"]
    actions = ["stop", "up", "right"]
    moves = {("c00", "right"): "c10", ("c10", "up"): "c11", ("c11", "right"): "c21"}
    trans = {}
    for x in states:
        for u in actions:
            trans[(x, u)] = moves.get((x, u), x)
    base = TransitionSystem(frozenset(states), frozenset(actions), trans, "c00")
    sensor = Labeling({"c00": "0", "c10": "0", "c11": "0", "c21": "1"})
    return ExternalSystem(base, sensor)


def tetromino_task(horizon: int = 8) -> TaskSpec:
    return TaskSpec(horizon=horizon, goal_obs=frozenset({"1"}))


def tetromino_plan() -> HistoryPolicy:
    """The eight-state bundled plan (redundant on purpose)."""
    outputs = {
        "q0": NO_ACTION,
        "qA": "right",
        "qB": "up",
        "qC": "right",
        "qG": "stop",
        "qG2": "stop",
        "qD": DEAD,
        "qD2": DEAD,
    }
    edges = {
        ("q0", "0"): "qA",
        ("q0", "1"): "qG",
        ("qA", "0"): "qB",
        ("qA", "1"): "qG2",
        ("qB", "0"): "qC",
        ("qB", "1"): "qD",
        ("qC", "0"): "qD2",
        ("qC", "1"): "qG",
        ("qG", "0"): "qD",
        ("qG", "1"): "qG",
        ("qG2", "0"): "qD2",
        ("qG2", "1"): "qG",
        ("qD", "0"): "qD",
        ("qD", "1"): "qD",
        ("qD2", "0"): "qD2",
        ("qD2", "1"): "qD2",
    }
    machine = build_machine(set(outputs), {"0", "1"}, edges, "q0", outputs)
    return HistoryPolicy(machine=machine)


def tetromino_table_plan():
    """The same marching plan written as a depth-4 history table."""
    rows = {
        ("0",): "right",
        ("1",): "stop",
        ("0", "right", "0"): "up",
        ("0", "right", "1"): "stop",
        ("1", "stop", "1"): "stop",
        ("0", "right", "0", "up", "0"): "right",
        ("0", "right", "1", "stop", "1"): "stop",
        ("1", "stop", "1", "stop", "1"): "stop",
        ("0", "right", "0", "up", "0", "right", "1"): "stop",
        ("0", "right", "1", "stop", "1", "stop", "1"): "stop",
        ("1", "stop", "1", "stop", "1", "stop", "1"): "stop",
    }
    return HistoryPolicy(table=rows)


# ---------------------------------------------------------------------------
# Random discrete systems.


def random_external(rng: random.Random, nx=None, nu=None, ny=None) -> ExternalSystem:
    nx = nx or rng.randint(2, 5)
    nu = nu or rng.randint(1, 3)
    ny = ny or rng.randint(1, 3)
    ny = min(ny, nx)
    states = [f"a{i}" for i in range(nx)]
    actions = [f"m{j}" for j in range(nu)]
    trans = {(x, u): rng.choice(states) for x in states for u in actions}
    # surjective sensor: the first ny states seed the blocks
    sensor = {}
    for i, x in enumerate(states):
        sensor[x] = f"y{i}" if i < ny else f"y{rng.randrange(ny)}"
    base = TransitionSystem(frozenset(states), frozenset(actions), trans, states[0])
    return ExternalSystem(base, Labeling(sensor))


def random_plan_machine(rng: random.Random, es: ExternalSystem, n_states=None) -> MooreMachine:
    """A random total plan machine over the plant's observations."""
    n_states = n_states or rng.randint(2, 4)
    names = [f"g{i}" for i in range(n_states)]
    actions = sorted(es.actions)
    outputs = {names[0]: NO_ACTION}
    for s in names[1:]:
        outputs[s] = rng.choice(actions)
    step = {
        (s, y): rng.choice(names) for s in names for y in sorted(es.observations)
    }
    return build_machine(set(names), es.observations, step, names[0], outputs)


# ---------------------------------------------------------------------------
# Brute-force minimization oracle.


def restricted_growth_strings(n: int):
    """All partitions of range(n) as restricted-growth strings."""

    def grow(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from grow(prefix + [b], max(top, b))

    if n == 0:
        yield ()
        return
    yield from grow([0], 0)


def brute_min_sufficient_blocks(machine: MooreMachine) -> int:
    """Fewest blocks over all sufficient refinements of the output labeling.

    Exhausts every partition of the reachable states, keeps the ones that
    refine the outputs and commute with the transitions, and returns the
    smallest block count.  Exponential; only for machines with few states.
    """
    ts = machine.as_transition_system().trimmed()
    reach = sorted(ts.states, key=repr)
    outputs = Labeling({s: machine.output[s] for s in reach})
    best = None
    for rgs in restricted_growth_strings(len(reach)):
        lab = Labeling(dict(zip(reach, rgs)))
        if not is_refinement(lab, outputs):
            continue
        if not is_sufficient(ts, lab):
            continue
        blocks = len(set(rgs))
        if best is None or blocks < best:
            best = blocks
    return best


# ---------------------------------------------------------------------------
# Lattice shortest-path oracle (independent of the visibility graph).


_COPRIME_MOVES = sorted(
    {
        (dx, dy)
        for dx in range(-5, 6)
        for dy in range(-5, 6)
        if (dx, dy) != (0, 0) and math.gcd(abs(dx), abs(dy)) == 1
    }
)


class GridOracle:
    """Dijkstra over an interior lattice with knight-like moves.

    Nodes are lattice points strictly inside the polygon; edges are
    coprime offsets up to 5 cells whose segments stay inside (checked
    with shapely, not with this package's predicates).  Query endpoints
    join the lattice through all inside segments within a small radius.
    The returned length is an upper bound on the true one that exceeds
    it by at most the lattice distortion (~0.5%) plus corner rounding
    of a few cells.
    """

    def __init__(self, poly, cell_frac=0.01):
        from shapely.geometry import Point as ShPoint
        from shapely.geometry import Polygon as ShPolygon
        from shapely.prepared import prep

        self._linestring = __import__("shapely.geometry", fromlist=["LineString"]).LineString
        shp = ShPolygon(poly.vertices)
        self._pshp = prep(shp)
        x0, y0, x1, y1 = poly.bbox
        self.cell = cell_frac * max(x1 - x0, y1 - y0)
        xs = np.arange(x0 + self.cell / 2.0, x1, self.cell)
        ys = np.arange(y0 + self.cell / 2.0, y1, self.cell)
        self._index = {}
        self.nodes = []
        for i, gx in enumerate(xs):
            for j, gy in enumerate(ys):
                if self._pshp.covers(ShPoint(gx, gy)):
                    self._index[(i, j)] = len(self.nodes)
                    self.nodes.append((gx, gy))
        self._rows, self._cols, self._data = [], [], []
        for (i, j), a_id in self._index.items():
            for dx, dy in _COPRIME_MOVES:
                if dx < 0 or (dx == 0 and dy < 0):
                    continue  # undirected graph: keep one orientation
                b_id = self._index.get((i + dx, j + dy))
                if b_id is not None:
                    self._link(a_id, b_id, self.nodes[a_id], self.nodes[b_id])
        # polygon corners join as extra nodes so paths can turn exactly
        # there instead of rounding the corner through lattice points
        reach = 6.5 * self.cell
        lattice_count = len(self.nodes)
        for k in range(poly.n):
            v = poly.vertex(k)
            v_id = len(self.nodes)
            self.nodes.append(v)
            for b_id in range(lattice_count):
                if math.dist(v, self.nodes[b_id]) <= reach:
                    self._link(v_id, b_id, v, self.nodes[b_id])

    def _link(self, a_id, b_id, pa, pb):
        if self._pshp.covers(self._linestring([pa, pb])):
            self._rows.append(a_id)
            self._cols.append(b_id)
            self._data.append(math.dist(pa, pb))

    def length(self, start, goal_point):
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import dijkstra

        base = len(self.nodes)
        rows, cols, data = list(self._rows), list(self._cols), list(self._data)
        keep = (self._rows, self._cols, self._data)
        self._rows, self._cols, self._data = rows, cols, data
        try:
            reach = 6.5 * self.cell
            pts = [start, goal_point]
            for k, p in enumerate(pts):
                for b_id, node in enumerate(self.nodes):
                    if math.dist(p, node) <= reach:
                        self._link(base + k, b_id, p, node)
            self._link(base, base + 1, start, goal_point)
            n = base + 2
            graph = csr_matrix(
                (data + data, (rows + cols, cols + rows)), shape=(n, n)
            )
            dist = dijkstra(graph, indices=base)
            return float(dist[base + 1])
        finally:
            self._rows, self._cols, self._data = keep


# ---------------------------------------------------------------------------
# Analytic critical-line crossings: an independent oracle for event params.


def _seg_line_param(a, b, p, q, eps=1e-12):
    """Parameter t where segment a+t(b-a) crosses the line through p, q."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    nx, ny = q[1] - p[1], p[0] - q[0]  # normal of line pq
    denom = dx * nx + dy * ny
    if abs(denom) < eps:
        return None
    t = ((p[0] - a[0]) * nx + (p[1] - a[1]) * ny) / denom
    return t if -1e-9 <= t <= 1.0 + 1e-9 else None


def predicted_event_params(poly, a, b):
    """Parameters where [a, b] crosses any line that can host a gap event.

    Gap events happen only where the point of view crosses (i) the
    extension of an edge incident to a reflex vertex (appear/disappear)
    or (ii) a line through two reflex vertices (split/merge).  The full
    lines over-approximate the true critical rays, which is the sound
    direction for checking that no event happens anywhere else.
    """
    params = []
    reflex = poly.reflex_indices
    n = poly.n
    for r in reflex:
        for nb in ((r - 1) % n, (r + 1) % n):
            t = _seg_line_param(a, b, poly.vertex(nb), poly.vertex(r))
            if t is not None:
                params.append(t)
    for i, r1 in enumerate(reflex):
        for r2 in reflex[i + 1 :]:
            t = _seg_line_param(a, b, poly.vertex(r1), poly.vertex(r2))
            if t is not None:
                params.append(t)
    return sorted(params)
