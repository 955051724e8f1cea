"""Gap trees: the tree-valued filter behind minimal-sensing navigation.

A navigating robot that can only chase gaps needs very little memory: an
ordered tree whose root children are the current gaps (deeper nodes are
gaps that merged behind their parent), plus a mark on the gap currently
hiding the goal.  The tree changes only at critical events, so event
symbols drive a finite machine.

The abstract observation alphabet, one symbol per event:

* ``init:<n>:<k>``   - first sensor reading: n gaps, the k-th hides the
  goal (-1 when the goal is visible).  Indices refer to a fixed
  linearization of the cyclic gap order, anchored at trace start and
  maintained across events.
* ``ev:appear:<j>``, ``ev:disappear:<j>``  - a primitive gap inserted at /
  removed from slot j.
* ``ev:split:<j>`` / ``ev:split:<j>:<c>``  - the gap at slot j resolves
  into its components; ``:c`` says which child keeps hiding the goal and
  appears exactly when slot j was the marked one.  ``c = -1`` records a
  split that reveals the goal instead (the goal stands at the far vertex
  of the splitting pair, so stepping over the split line uncovers it).
* ``ev:merge:<j>``   - slots j and j+1 collapse into one gap.
* ``ev:goalvis:<j>`` - the goal emerges through the marked gap at slot j,
  which keeps existing; only the mark clears.  (The goal is a recognized
  landmark: line of sight to it is sensed, and it can come into view
  before its hiding gap disappears.)
* ``goal``           - arrival.

Executed policies emit ``chase:<j>`` (head for the occluder of the gap in
slot j - always the marked slot), ``goto`` (goal visible: head straight
for it), and ``stop``.  Traces of these symbols, collected by simulating
optimal navigation to every vertex, are what the support and minimality
checks run on.
"""

import math
import random
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

from ..machines import MooreMachine, build_machine
from ..minimization import minimal_sufficient_refinement, supports
from ..ts import DEAD, NO_ACTION, ItsError
from .events import _ids_at, first_event_on_segment
from .gaps import gap_observation
from .polygon import SimplePolygon, shortest_path

LEAF = "leaf"
START_STATE = "start"
DONE_STATE = "done"
SYM_GOAL = "goal"
ACT_GOTO = "goto"
ACT_STOP = "stop"

__all__ = [
    "UnknownGapTokenError",
    "TraceInconsistentError",
    "GapTreeState",
    "Trace",
    "NavigationTraceSet",
    "NavigationReport",
    "gnt_step",
    "navigation_traces",
    "gnt_machine",
    "goal_policy_machine",
    "navigation_report",
    "gnt_supports_navigation",
]


class UnknownGapTokenError(ItsError):
    """An event symbol references a gap the tree does not have."""


class TraceInconsistentError(ItsError):
    """The simulated run and the gap-tree filter disagree."""


@dataclass(frozen=True)
class GapTreeState:
    """Ordered gap tree plus the goal mark.

    ``children`` holds one entry per currently visible gap, in cyclic
    order: ``"leaf"`` for a primitive gap, ``("node", (sub, ...))`` for a
    gap that swallowed others in a merge.  ``marker`` is the slot hiding
    the goal, or None when the goal is visible.
    """

    children: Tuple
    marker: Optional[int]

    def __post_init__(self):
        if self.marker is not None and not (0 <= self.marker < len(self.children)):
            raise ItsError(f"marker {self.marker} out of range")


def _parse_event(symbol: str):
    parts = symbol.split(":")
    if parts[0] != "ev" or len(parts) not in (3, 4):
        raise UnknownGapTokenError(f"not an event symbol: {symbol!r}")
    kind = parts[1]
    if kind not in ("appear", "disappear", "split", "merge", "goalvis"):
        raise UnknownGapTokenError(f"unknown event kind in {symbol!r}")
    try:
        j = int(parts[2])
        child = int(parts[3]) if len(parts) == 4 else None
    except ValueError:
        raise UnknownGapTokenError(f"bad gap index in {symbol!r}")
    if child is not None and kind != "split":
        raise UnknownGapTokenError(f"child annotation only belongs on splits: {symbol!r}")
    return kind, j, child


def gnt_step(state: GapTreeState, symbol: str) -> GapTreeState:
    """Apply one event symbol to the tree.

    Raises UnknownGapTokenError when the symbol references a slot the
    tree does not have or carries an annotation inconsistent with the
    mark; machine construction turns that into a dead transition.
    """
    kind, j, child = _parse_event(symbol)
    ch = list(state.children)
    mk = state.marker
    if kind == "appear":
        if not (0 <= j <= len(ch)):
            raise UnknownGapTokenError(f"no slot {j} to insert into")
        ch.insert(j, LEAF)
        if mk is not None and mk >= j:
            mk += 1
    elif kind == "disappear":
        if not (0 <= j < len(ch)) or ch[j] != LEAF:
            raise UnknownGapTokenError(f"no primitive gap at slot {j}")
        del ch[j]
        if mk is not None:
            if mk == j:
                mk = None  # the hiding gap is gone: the goal is in view
            elif mk > j:
                mk -= 1
    elif kind == "split":
        if not (0 <= j < len(ch)):
            raise UnknownGapTokenError(f"no gap at slot {j}")
        node = ch[j]
        repl = (LEAF, LEAF) if node == LEAF else node[1]
        if mk == j:
            if child is None or not (-1 <= child < len(repl)):
                raise UnknownGapTokenError(
                    f"split of the marked gap needs a valid child annotation: {symbol!r}"
                )
            ch[j : j + 1] = list(repl)
            mk = None if child == -1 else j + child
        else:
            if child is not None:
                raise UnknownGapTokenError(
                    f"child annotation on an unmarked split: {symbol!r}"
                )
            ch[j : j + 1] = list(repl)
            if mk is not None and mk > j:
                mk += len(repl) - 1
    elif kind == "goalvis":
        if mk is None or mk != j:
            raise UnknownGapTokenError(
                f"goal cannot emerge from slot {j}: the mark is on {mk}"
            )
        mk = None  # the gap stays; only the goal stepped out of its shadow
    else:  # merge
        if not (0 <= j < len(ch) - 1):
            raise UnknownGapTokenError(f"no adjacent pair at slots {j}, {j + 1}")
        ch[j : j + 2] = [("node", (ch[j], ch[j + 1]))]
        if mk is not None:
            if mk in (j, j + 1):
                mk = j
            elif mk > j + 1:
                mk -= 1
    return GapTreeState(tuple(ch), mk)


class Trace(NamedTuple):
    start: Tuple[float, float]
    goal: int
    symbols: Tuple[str, ...]
    actions: Tuple[str, ...]


@dataclass
class NavigationTraceSet:
    poly: SimplePolygon
    goals: Tuple[int, ...]
    traces: Dict[int, List[Trace]]
    alphabet: frozenset


# ---------------------------------------------------------------------------
# Trace simulation: execute optimal navigation, emit abstract symbols.


def _angle(poly, p, k):
    r = poly.vertex(k)
    return math.atan2(r[1] - p[1], r[0] - p[0])


def _cyclic_insert_pos(poly, p, order, k):
    if not order:
        return 0
    theta = _angle(poly, p, k)
    best = None
    for oid in order:
        a = _angle(poly, p, oid)
        if a < theta and (best is None or a > _angle(poly, p, best)):
            best = oid
    if best is None:  # wrap: predecessor is the largest angle overall
        best = max(order, key=lambda oid: _angle(poly, p, oid))
    return order.index(best) + 1


def _pair_by_cyclic(poly, p, m, k):
    delta = (_angle(poly, p, k) - _angle(poly, p, m)) % (2 * math.pi)
    return (m, k) if delta < math.pi else (k, m)


def _assert_sync(poly, p, order):
    obs = gap_observation(p, poly)
    ids = list(obs.occluders)
    if sorted(ids) != sorted(order):
        raise TraceInconsistentError(
            f"tracked gaps {order} disagree with the sensor {ids} at {p}"
        )
    if ids:
        n = len(ids)
        if not any(ids[i:] + ids[:i] == list(order) for i in range(n)):
            raise TraceInconsistentError(
                f"tracked cyclic order {order} broke against the sensor {ids} at {p}"
            )


def _hiding_slot(poly, p, goal, order):
    """None when the goal is visible, else the slot of the hiding gap."""
    gpt = poly.vertex(goal)
    if poly.visible(p, gpt):
        return None
    _, path = shortest_path(p, goal, poly)
    first = path[0]
    if first not in order:
        raise TraceInconsistentError(
            f"the shortest path turns at {first}, which casts no tracked gap from {p}"
        )
    return order.index(first)


def _apply_event(poly, ev, p_new, order, marker, goal):
    if ev.kind == "disappear":
        (k,) = ev.occluders
        if k not in order:
            raise TraceInconsistentError(f"untracked gap {k} disappeared")
        j = order.index(k)
        new_order = order[:j] + order[j + 1 :]
        if marker == j:
            new_marker = None
        elif marker is not None and marker > j:
            new_marker = marker - 1
        else:
            new_marker = marker
        return f"ev:disappear:{j}", new_order, new_marker
    if ev.kind == "appear":
        (k,) = ev.occluders
        if k in order:
            raise TraceInconsistentError(f"gap {k} appeared twice")
        j = _cyclic_insert_pos(poly, p_new, order, k)
        new_order = order[:j] + [k] + order[j:]
        new_marker = marker + 1 if (marker is not None and marker >= j) else marker
        return f"ev:appear:{j}", new_order, new_marker
    if ev.kind == "split":
        m, k = ev.occluders
        if m not in order or k in order:
            raise TraceInconsistentError(f"split {m}->{k} does not match tracked gaps")
        j = order.index(m)
        pair = _pair_by_cyclic(poly, p_new, m, k)
        new_order = order[:j] + list(pair) + order[j + 1 :]
        if marker == j:
            new_slot = _hiding_slot(poly, p_new, goal, new_order)
            if new_slot is None:
                return f"ev:split:{j}:-1", new_order, None
            if new_order[new_slot] not in pair:
                raise TraceInconsistentError(
                    "the goal did not stay behind a child of the split gap"
                )
            c = new_slot - j
            return f"ev:split:{j}:{c}", new_order, new_slot
        new_marker = marker + 1 if (marker is not None and marker > j) else marker
        return f"ev:split:{j}", new_order, new_marker
    # merge
    m, k = ev.occluders
    if m not in order or k not in order:
        raise TraceInconsistentError(f"merge {m}+{k} does not match tracked gaps")
    jm, jk = order.index(m), order.index(k)
    if abs(jm - jk) != 1:
        raise TraceInconsistentError("merge across the linearization seam is not supported")
    j = min(jm, jk)
    new_order = order[:j] + [m] + order[j + 2 :]
    if marker in (jm, jk):
        new_marker = j
    elif marker is not None and marker > j + 1:
        new_marker = marker - 1
    else:
        new_marker = marker
    return f"ev:merge:{j}", new_order, new_marker


def _advance_past(poly, p_old, target, t0, point, eps, extra_ok=None):
    """Continue a little beyond the event point along the interrupted leg.

    The bisected event point sits within tolerance of the critical line,
    which can leave the next leg inside boundary-classification distance
    of a wall.  Walking on a bit restores clearance; the extra stride is
    halved until it stays interior and crosses no further critical line.
    """
    leg = math.dist(p_old, target)
    if leg == 0.0:
        return point
    post = _ids_at(poly, point)
    extra = min(1.0 - t0, (eps / 2.0) / leg)
    while extra > 1e-12:
        t = t0 + extra
        cand = (
            p_old[0] + t * (target[0] - p_old[0]),
            p_old[1] + t * (target[1] - p_old[1]),
        )
        if (
            poly.contains(cand) == "in"
            and _ids_at(poly, cand) == post
            and (extra_ok is None or extra_ok(cand))
        ):
            return cand
        extra /= 2.0
    return point


def _first_vis_flip(poly, p, target, gpt, step, tol):
    """Parameter of the first goal-visibility flip along [p, target], or None.

    Visibility of the goal changes on lines through the goal and a reflex
    vertex, which are not gap-cardinality events; they get their own scan.
    """
    length = math.dist(p, target)
    if length == 0.0:
        return None

    def at(t):
        return (p[0] + t * (target[0] - p[0]), p[1] + t * (target[1] - p[1]))

    steps = max(2, int(math.ceil(length / step)) + 1)
    prev_t = 0.0
    prev_v = poly.visible(p, gpt)
    for i in range(1, steps):
        t = i / (steps - 1)
        v = poly.visible(at(t), gpt)
        if v != prev_v:
            lo, hi = prev_t, t
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if poly.visible(at(mid), gpt) == prev_v:
                    lo = mid
                else:
                    hi = mid
            return hi
        prev_t, prev_v = t, v
    return None


def _simulate(poly, start, goal, eps, step, tol) -> Trace:
    p = start
    gpt = poly.vertex(goal)
    obs = gap_observation(p, poly)
    order = list(obs.occluders)
    marker = _hiding_slot(poly, p, goal, order)
    symbols = [f"init:{len(order)}:{-1 if marker is None else marker}"]
    tree = GapTreeState((LEAF,) * len(order), marker)
    actions: List[str] = []

    for _ in range(400):
        vis = poly.visible(p, gpt)
        if vis != (marker is None):
            raise TraceInconsistentError(f"visibility and the mark disagree at {p}")
        if marker is None:
            act = ACT_GOTO
            leg = math.dist(p, gpt)
            if leg <= eps * 1.5:
                actions.append(ACT_GOTO)
                symbols.append(SYM_GOAL)
                actions.append(ACT_STOP)
                return Trace(start, goal, tuple(symbols), tuple(actions))
            cut = (leg - eps) / leg
            target = (p[0] + cut * (gpt[0] - p[0]), p[1] + cut * (gpt[1] - p[1]))
        else:
            _, path = shortest_path(p, goal, poly)
            if order[marker] != path[0]:
                raise TraceInconsistentError(
                    f"marked gap {order[marker]} is not the next path vertex {path[0]}"
                )
            act = f"chase:{marker}"
            target = poly.inset_point(path[0], eps)
        actions.append(act)
        if poly.contains(target) != "in":
            raise TraceInconsistentError(f"leg target {target} is not interior")
        if not poly.visible(p, target):
            raise TraceInconsistentError(f"leg {p} -> {target} leaves the polygon")

        ev = first_event_on_segment(poly, p, target, step, tol)
        tv = _first_vis_flip(poly, p, target, gpt, step, tol)
        if ev is None and tv is None:
            if marker is not None:
                raise TraceInconsistentError(
                    f"chase leg toward vertex {order[marker]} saw no event"
                )
            p = target
            symbols.append(SYM_GOAL)
            actions.append(ACT_STOP)
            return Trace(start, goal, tuple(symbols), tuple(actions))
        # A flip can coincide with a gap event (the goal sits on the
        # occluding edge, so reveal and disappearance share a line); the
        # event's own marker arithmetic covers it, so the event wins ties
        # and the geometry checks below catch any false subsumption.
        if tv is not None and (ev is None or tv < ev.t - 50 * tol):
            if marker is None:
                raise TraceInconsistentError(
                    f"the goal fell out of view on a direct leg from {p}"
                )
            vp = (p[0] + tv * (target[0] - p[0]), p[1] + tv * (target[1] - p[1]))
            p = _advance_past(
                poly, p, target, tv, vp, eps, lambda c: poly.visible(c, gpt)
            )
            sym, marker = f"ev:goalvis:{marker}", None
        else:
            p = _advance_past(poly, p, target, ev.t, ev.point, eps)
            sym, order, marker = _apply_event(poly, ev, p, order, marker, goal)
        try:
            tree = gnt_step(tree, sym)
        except UnknownGapTokenError as exc:
            raise TraceInconsistentError(f"filter rejected its own event {sym}") from exc
        if len(tree.children) != len(order) or tree.marker != marker:
            raise TraceInconsistentError(f"filter state drifted after {sym}")
        _assert_sync(poly, p, order)
        check = _hiding_slot(poly, p, goal, order)
        if check != marker:
            raise TraceInconsistentError(
                f"mark {marker} disagrees with geometry {check} after {sym}"
            )
        symbols.append(sym)
    raise TraceInconsistentError("navigation did not terminate")


def navigation_traces(
    poly: SimplePolygon,
    eps: Optional[float] = None,
    extra_starts: int = 6,
    seed: int = 11,
    step: Optional[float] = None,
    tol: float = 1e-7,
) -> NavigationTraceSet:
    """Optimal-navigation traces from sampled starts to every vertex."""
    x0, y0, x1, y1 = poly.bbox
    span = min(x1 - x0, y1 - y0)
    if eps is None:
        eps = 0.02 * span
    if step is None:
        step = eps / 2.0
    rng = random.Random(seed)
    starts = [poly.inset_point(i, eps) for i in range(poly.n)]
    starts += poly.sample_interior(extra_starts, rng, margin=eps / 2.0)
    goals = tuple(range(poly.n))
    traces: Dict[int, List[Trace]] = {g: [] for g in goals}
    for g in goals:
        for s in starts:
            traces[g].append(_simulate(poly, s, g, eps, step, tol))
    alphabet = frozenset(
        sym for per_goal in traces.values() for tr in per_goal for sym in tr.symbols
    )
    return NavigationTraceSet(poly, goals, traces, alphabet)


# ---------------------------------------------------------------------------
# Machines over the event alphabet.


def _machine_next(state, symbol):
    """Successor in the gap-tree machine; None routes to the dead sink."""
    if state == START_STATE:
        if not symbol.startswith("init:"):
            return None
        parts = symbol.split(":")
        if len(parts) != 3:
            return None
        try:
            n, k = int(parts[1]), int(parts[2])
        except ValueError:
            return None
        if n < 0 or (k != -1 and not (0 <= k < n)):
            return None
        return GapTreeState((LEAF,) * n, None if k == -1 else k)
    if isinstance(state, GapTreeState):
        if symbol == SYM_GOAL:
            return DONE_STATE if state.marker is None else None
        if symbol.startswith("ev:"):
            try:
                return gnt_step(state, symbol)
            except UnknownGapTokenError:
                return None
        return None
    return None  # done is terminal; anything further is off-policy


def _tree_output(state):
    if state == START_STATE:
        return NO_ACTION
    if state == DONE_STATE:
        return ACT_STOP
    return ACT_GOTO if state.marker is None else f"chase:{state.marker}"


def _visited_states(traceset, goals) -> set:
    seen = set()
    for g in goals:
        for tr in traceset.traces[g]:
            state = START_STATE
            for sym in tr.symbols:
                nxt = _machine_next(state, sym)
                if nxt is None:
                    raise TraceInconsistentError(
                        f"trace symbol {sym} has no filter transition from {state}"
                    )
                seen.add(nxt)
                state = nxt
    return seen


def gnt_machine(traceset: NavigationTraceSet) -> MooreMachine:
    """The gap-tree filter as a machine: states are the tree values the
    traces reach, transitions follow :func:`gnt_step`, outputs name the
    move the mark dictates.  Event sequences leading off the reached set
    fall to the dead sink."""
    visited = _visited_states(traceset, traceset.goals)
    states = {START_STATE, DONE_STATE} | visited
    step = {}
    for s in states:
        for y in traceset.alphabet:
            n = _machine_next(s, y)
            if n is not None and n in states:
                step[(s, y)] = n
    output = {s: _tree_output(s) for s in states}
    return build_machine(
        states, traceset.alphabet, step, START_STATE, output, complete_with_dead=True
    )


def _replay_machine(traceset: NavigationTraceSet, goals) -> MooreMachine:
    """Machine carrying exactly the walked transitions of the given goals.

    States are the tree values those traces visit; every recorded action
    is checked against the state it was taken in, and everything off-trace
    is dead.
    """
    visited = _visited_states(traceset, goals)
    states = {START_STATE, DONE_STATE} | visited
    step = {}
    output = {START_STATE: NO_ACTION}
    for goal in goals:
        for tr in traceset.traces[goal]:
            state = START_STATE
            for sym, act in zip(tr.symbols, tr.actions):
                nxt = _machine_next(state, sym)
                step[(state, sym)] = nxt
                if output.setdefault(nxt, act) != act:
                    raise TraceInconsistentError(
                        f"goal {goal}: state {nxt} was told both {output[nxt]} and {act}"
                    )
                state = nxt
    for s in states:
        output.setdefault(s, DEAD)
    return build_machine(
        states, traceset.alphabet, step, START_STATE, output, complete_with_dead=True
    )


def goal_policy_machine(traceset: NavigationTraceSet, goal: int) -> MooreMachine:
    """One goal's executed policy over the shared event alphabet."""
    return _replay_machine(traceset, [goal])


@dataclass
class NavigationReport:
    ok: bool
    supported: Dict[int, bool]
    gnt_states: int
    joint_states: int
    gnt: MooreMachine
    joint: MooreMachine
    policies: Dict[int, MooreMachine]


def navigation_report(poly: SimplePolygon, traceset: Optional[NavigationTraceSet] = None,
                      **trace_kwargs) -> NavigationReport:
    """Support and minimality evidence for the gap-tree filter.

    Per goal, the filter must support the executed policy machine.  For
    minimality, every goal's behavior is pooled into one machine over the
    shared event alphabet (the recorded action is a function of the tree
    state alone, so pooling never conflicts) and minimized; the filter is
    exactly right when its reachable state count matches.  A product of
    the per-goal machines would instead count coverage patterns - which
    goals' traces happen to share a prefix - rather than behavior.
    """
    if traceset is None:
        traceset = navigation_traces(poly, **trace_kwargs)
    gnt = gnt_machine(traceset)
    policies = {g: goal_policy_machine(traceset, g) for g in traceset.goals}
    candidate = gnt.as_transition_system()
    supported = {g: supports(candidate, m) is not None for g, m in policies.items()}
    pooled = _replay_machine(traceset, traceset.goals)
    _, joint = minimal_sufficient_refinement(pooled)
    gnt_n = len(gnt.reachable())
    joint_n = len(joint.reachable())
    ok = all(supported.values()) and gnt_n == joint_n
    return NavigationReport(ok, supported, gnt_n, joint_n, gnt, joint, policies)


def gnt_supports_navigation(poly: SimplePolygon,
                            traceset: Optional[NavigationTraceSet] = None,
                            **trace_kwargs) -> bool:
    """True when the gap-tree machine supports every goal's executed
    policy and is exactly as large as the minimized joint policy machine."""
    return navigation_report(poly, traceset, **trace_kwargs).ok
