"""Histories, belief filtering, tasks, and coupled plan/plant execution.

A history is a plain tuple that starts and ends with an observation and
alternates observation, action, observation, ...  The empty tuple is the
history before anything has been observed.  Positions are what make a token
an observation or an action: even indices are observations, odd indices are
actions.

Belief filtering tracks the set of plant states consistent with a history.
The belief before the first observation is the full state set; consuming an
observation intersects with the sensor preimage, and consuming an action
maps the set through the dynamics first.  The special action ``NO_ACTION``
maps the set through nothing, which is exactly what the first observation
needs.
"""

import enum
from dataclasses import dataclass, field
from typing import Any, Optional

from .machines import MooreMachine, build_machine
from .ts import DEAD, NO_ACTION, ExternalSystem, ItsError


class MalformedHistoryError(ItsError):
    """A tuple that does not alternate observation/action as required."""


class PolicyDeadEndError(ItsError):
    """A coupled run reached a machine state whose output is the dead token."""


class Outcome(enum.Enum):
    ACCOMPLISHED = "accomplished"
    DIVERGES = "diverges"
    HORIZON_EXCEEDED = "horizon-exceeded"


@dataclass(frozen=True)
class TaskSpec:
    """Termination condition checked on histories.

    Exactly one of ``goal_obs`` / ``goal_states`` must be given.  An
    observation goal is met as soon as the last observation is in the goal
    set.  A state goal is met once every plant state consistent with the
    history lies in the goal set (and at least one state is consistent).
    """

    horizon: int
    goal_obs: Optional[frozenset] = None
    goal_states: Optional[frozenset] = None

    def __post_init__(self):
        if (self.goal_obs is None) == (self.goal_states is None):
            raise ValueError("give exactly one of goal_obs / goal_states")
        goal = self.goal_obs if self.goal_obs is not None else self.goal_states
        if not goal:
            raise ValueError("goal set must be nonempty")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")


def check_history(eta, es: Optional[ExternalSystem] = None):
    """Validate the alternation shape (and alphabets, when a plant is given)."""
    eta = tuple(eta)
    if eta and len(eta) % 2 == 0:
        raise MalformedHistoryError("history must end with an observation")
    if es is not None:
        for i, tok in enumerate(eta):
            if i % 2 == 0:
                if tok not in es.observations:
                    raise MalformedHistoryError("position %d: %r is not an observation" % (i, tok))
            else:
                if tok not in es.actions:
                    raise MalformedHistoryError("position %d: %r is not an action" % (i, tok))
    return eta


def observations_of(eta) -> tuple:
    """The observation subsequence of a history."""
    eta = check_history(eta)
    return eta[0::2]


def actions_of(eta) -> tuple:
    eta = check_history(eta)
    return eta[1::2]


def belief_step(es: ExternalSystem, belief: frozenset, action, obs) -> frozenset:
    """One filtering step: push the belief through ``action``, keep ``obs``.

    ``NO_ACTION`` pushes through the identity; anything else goes through
    the plant dynamics.
    """
    if action == NO_ACTION:
        image = belief
    else:
        image = {es.move(x, action) for x in belief}
    return frozenset(x for x in image if es.observe(x) == obs)


def initial_belief(es: ExternalSystem, obs) -> frozenset:
    """States consistent with a first observation."""
    return es.obs_preimage(obs)


def belief_after(es: ExternalSystem, eta) -> frozenset:
    """States consistent with a whole history (full state set for ``()``)."""
    eta = check_history(eta, es)
    belief = frozenset(es.states)
    if not eta:
        return belief
    belief = belief_step(es, belief, NO_ACTION, eta[0])
    for i in range(1, len(eta), 2):
        belief = belief_step(es, belief, eta[i], eta[i + 1])
    return belief


def is_attainable(es: ExternalSystem, eta) -> bool:
    """Can some plant trajectory produce this history?"""
    return bool(belief_after(es, eta))


def task_label(task: TaskSpec, es: ExternalSystem, eta) -> int:
    """1 if the history satisfies the task's termination condition, else 0."""
    eta = check_history(eta, es)
    if task.goal_obs is not None:
        if not eta:
            return 0
        return 1 if eta[-1] in task.goal_obs else 0
    belief = belief_after(es, eta)
    return 1 if belief and belief <= task.goal_states else 0


@dataclass(frozen=True)
class RunResult:
    history: tuple
    outcome: Outcome
    actions: tuple
    machine_states: tuple
    plant_states: tuple


def run_coupled(machine: MooreMachine, es: ExternalSystem, x1, task: TaskSpec) -> RunResult:
    """Execute a feedback machine against the plant from plant state ``x1``.

    Each stage observes, advances the machine, records the machine's output,
    then checks the task.  When the task is met the run stops right there,
    so the recorded action at the final stage is announced but never applied.
    Divergence is decided exactly: the run also stops as soon as the coupled
    configuration repeats (machine state, plant state, and -- for state goals
    -- the belief), because from there the future is periodic.
    """
    if x1 not in es.states:
        raise ValueError("unknown plant state %r" % (x1,))
    track_belief = task.goal_states is not None
    hist = []
    acts = []
    mstates = []
    xstates = []
    m = machine.initial
    x = x1
    belief = frozenset(es.states)
    seen = set()
    for _stage in range(task.horizon):
        y = es.observe(x)
        hist.append(y)
        xstates.append(x)
        m = machine.successor(m, y)
        mstates.append(m)
        u = machine.output[m]
        acts.append(u)
        if track_belief:
            belief = belief_step(es, belief, NO_ACTION if _stage == 0 else acts[-2], y)
        done = (y in task.goal_obs) if task.goal_obs is not None \
            else (bool(belief) and belief <= task.goal_states)
        if done:
            return RunResult(tuple(hist), Outcome.ACCOMPLISHED, tuple(acts),
                             tuple(mstates), tuple(xstates))
        if u == DEAD:
            raise PolicyDeadEndError(
                "machine emitted the dead token on attainable history %r" % (tuple(hist),))
        key = (m, x, belief) if track_belief else (m, x)
        if key in seen:
            return RunResult(tuple(hist), Outcome.DIVERGES, tuple(acts),
                             tuple(mstates), tuple(xstates))
        seen.add(key)
        # NO_ACTION is a stand-still: the plant does not move.
        x = x if u == NO_ACTION else es.move(x, u)
        hist.append(u)
    return RunResult(tuple(hist[:-1]) if hist and len(hist) % 2 == 0 else tuple(hist),
                     Outcome.HORIZON_EXCEEDED, tuple(acts), tuple(mstates), tuple(xstates))


def is_feasible(machine: MooreMachine, es: ExternalSystem, task: TaskSpec,
                initial_set=None) -> bool:
    """Does every start in ``initial_set`` (default: all states) accomplish?"""
    if initial_set is None:
        initial_set = es.states
    for x1 in initial_set:
        if run_coupled(machine, es, x1, task).outcome is not Outcome.ACCOMPLISHED:
            return False
    return True


def find_feasible_policy(es: ExternalSystem, task: TaskSpec) -> Optional[MooreMachine]:
    """Search for a feedback machine that accomplishes the task from all starts.

    Works on the belief graph.  A belief wins when some action sends every
    consistent next observation either straight into the goal condition or
    into an already-winning belief; the machine then plays a winning action
    per belief.  Returns None when no machine at all can do it (belief
    feedback is as strong as full history feedback for this condition).
    """
    def satisfied(belief, obs):
        if task.goal_obs is not None:
            return obs in task.goal_obs
        return bool(belief) and belief <= task.goal_states

    full = frozenset(es.states)
    start = "START"
    # All post-observation beliefs reachable under arbitrary action choices.
    first = {}
    for y in sorted(es.observations, key=repr):
        b0 = belief_step(es, full, NO_ACTION, y)
        if b0:
            first[y] = b0
    beliefs = set()
    frontier = list(first.values())
    succ = {}
    while frontier:
        b = frontier.pop()
        if b in beliefs:
            continue
        beliefs.add(b)
        for u in sorted(es.actions, key=repr):
            for y in sorted(es.observations, key=repr):
                nb = belief_step(es, b, u, y)
                if nb:
                    succ.setdefault((b, u), []).append((y, nb))
                    if nb not in beliefs:
                        frontier.append(nb)

    winning = set()
    choice = {}
    changed = True
    while changed:
        changed = False
        for b in beliefs:
            if b in winning:
                continue
            for u in sorted(es.actions, key=repr):
                branches = succ.get((b, u), [])
                if not branches:
                    continue
                if all(satisfied(nb, y) or nb in winning for y, nb in branches):
                    winning.add(b)
                    choice[b] = u
                    changed = True
                    break
    # Every possible first observation must land in the goal or a winning belief.
    if not all(satisfied(b0, y) or b0 in winning for y, b0 in first.items()):
        return None

    # Assemble the machine.  Terminal beliefs (reached via a satisfying
    # observation) still need an output; any action will do since the run
    # has stopped -- use the smallest for determinism.
    stop_action = min(es.actions, key=repr)
    states = {start}
    step = {}
    output = {start: NO_ACTION}
    todo = []
    for y, b0 in first.items():
        step[(start, y)] = b0
        if b0 not in states:
            states.add(b0)
            output[b0] = choice.get(b0, stop_action)
            todo.append(b0)
    while todo:
        b = todo.pop()
        for y in es.observations:
            nb = belief_step(es, b, output[b], y)
            if not nb:
                continue
            step[(b, y)] = nb
            if nb not in states:
                states.add(nb)
                output[nb] = choice.get(nb, stop_action)
                todo.append(nb)
    machine = build_machine(states, es.observations, step, start, output,
                            complete_with_dead=True)
    if not is_feasible(machine, es, task):
        return None
    return machine
