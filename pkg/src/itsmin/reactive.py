"""Reactive (memoryless) plans: state policies, sensor tests, extraction.

A *state policy* maps every plant state to an action and is executed with
perfect state feedback.  A *reactive plan* maps observations to actions
instead, which is possible exactly when the sensor partition refines the
policy's action partition.  This module provides:

* extraction of a state policy from any history-based plan by replaying
  it against a fully observable plant,
* the refinement test deciding whether a given sensor can realize a
  given state policy reactively,
* the coarsest sensor that can (the action-preimage partition),
* exhaustive existence checks, with array encodings bridging to the
  sweep kernels in :mod:`itsmin.kernels`.
"""

import itertools
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from .coupling import TaskSpec, task_label
from .machines import MooreMachine, build_machine
from .restriction import HistoryPolicy
from .ts import (
    DEAD,
    NO_ACTION,
    ExternalSystem,
    ItsError,
    Labeling,
    is_refinement,
)

__all__ = [
    "SearchBudgetExceededError",
    "StatePolicy",
    "extract_state_policy",
    "sensor_sufficient_for_reactive",
    "minimal_reactive_sensor",
    "reactive_machine",
    "state_policy_feasible",
    "reactive_policy_exists",
    "encode_plant",
]


class SearchBudgetExceededError(ItsError):
    """An exhaustive search was cut off before covering the whole space.

    ``found_so_far`` reports the partial verdict: True means a witness
    was already found (the search would have returned True anyway),
    False means nothing was found in the explored prefix, which decides
    nothing about the remainder.
    """

    def __init__(self, message: str, found_so_far: bool = False):
        super().__init__(message)
        self.found_so_far = found_so_far


@dataclass(frozen=True)
class StatePolicy:
    """A memoryless plan: one action per plant state."""

    action_of: Mapping[Any, Any]

    def __post_init__(self):
        object.__setattr__(self, "action_of", dict(self.action_of))
        for x, u in self.action_of.items():
            if u == NO_ACTION or u == DEAD:
                raise ItsError(f"state policy assigns reserved token {u!r} to {x!r}")

    def __getitem__(self, x):
        return self.action_of[x]

    @property
    def domain(self):
        return frozenset(self.action_of)

    def as_labeling(self) -> Labeling:
        """The policy seen as a partition of states by chosen action."""
        return Labeling(self.action_of)


def extract_state_policy(
    es: ExternalSystem, plan: HistoryPolicy, task: TaskSpec
) -> Optional[StatePolicy]:
    """Replay ``plan`` from every start and read off a state policy.

    The plan is executed with full knowledge of the true state (the replay
    feeds it the honest observation stream), and every (state, action)
    pair along every trajectory is collected, the pair at the terminal
    stage included.  Returns None when the same state is ever told to do
    two different things, or when some start fails to reach the task goal
    within the horizon - in either case no memoryless plan can mimic this
    one through state feedback alone.
    """
    pairs: Dict[Any, Any] = {}
    for x1 in sorted(es.states, key=repr):
        x = x1
        eta: Tuple[Any, ...] = ()
        prev_u = None
        done = False
        for _ in range(task.horizon):
            y = es.observe(x)
            eta = (y,) if not eta else eta + (prev_u, y)
            u = plan.action(eta)
            if u == DEAD:
                return None
            if x in pairs and pairs[x] != u:
                return None
            pairs[x] = u
            if task_label(task, es, eta):
                done = True
                break
            if u != NO_ACTION:
                x = es.move(x, u)
            prev_u = u
        if not done:
            return None
    if any(u == NO_ACTION for u in pairs.values()):
        return None
    return StatePolicy(pairs)


def sensor_sufficient_for_reactive(sensor: Labeling, policy: StatePolicy) -> bool:
    """True iff states the sensor conflates always agree on the action."""
    return is_refinement(sensor, policy.as_labeling())


def minimal_reactive_sensor(policy: StatePolicy) -> Labeling:
    """Coarsest sensor realizing ``policy`` reactively.

    This is just the partition of states by chosen action; any sensor
    works for the policy iff it refines this one.
    """
    return policy.as_labeling()


def reactive_machine(es: ExternalSystem, obs_to_action: Mapping[Any, Any]) -> MooreMachine:
    """Wrap an observation->action table as a one-step-memory machine.

    The machine remembers only the latest observation; its output is the
    table entry for it.  Missing observations route to a dead sink.
    """
    observations = es.observations
    for y, u in obs_to_action.items():
        if y not in observations:
            raise ItsError(f"policy maps unknown observation {y!r}")
        if u not in es.actions:
            raise ItsError(f"policy picks unknown action {u!r} for {y!r}")
    start = "start"
    while start in observations:
        start += "_"
    covered = set(obs_to_action)
    states = {start} | covered
    step = {}
    output = {start: NO_ACTION}
    for s in states:
        for y in covered:
            step[(s, y)] = y
    for y in covered:
        output[y] = obs_to_action[y]
    # observations outside the table fall through to the dead sink
    return build_machine(states, observations, step, start, output, complete_with_dead=True)


def state_policy_feasible(es: ExternalSystem, policy: StatePolicy, task: TaskSpec) -> bool:
    """Run ``policy`` with state feedback from every start.

    Goal tests use the true state: an observation goal is met when the
    current state's observation lies in it, a state goal when the state
    itself does.  Trajectories are deterministic in the state alone, so
    |X|+1 goal tests decide each start exactly.
    """
    if policy.domain != es.states:
        raise ItsError("state policy domain differs from the plant's state set")
    if task.goal_obs is not None:
        good = {x for x in es.states if es.observe(x) in task.goal_obs}
    else:
        good = set(task.goal_states)
    for x1 in es.states:
        x = x1
        hit = False
        for _ in range(len(es.states) + 1):
            if x in good:
                hit = True
                break
            x = es.move(x, policy[x])
        if not hit:
            return False
    return True


def reactive_policy_exists(
    es: ExternalSystem, task: TaskSpec, budget: int = 1_000_000
) -> bool:
    """Decide by exhaustion whether any feasible state policy exists.

    Enumerates all |U|**|X| assignments; raises
    :class:`SearchBudgetExceededError` (carrying the partial verdict)
    if that space is larger than ``budget``.
    """
    states = sorted(es.states, key=repr)
    actions = sorted(es.actions, key=repr)
    total = len(actions) ** len(states)
    if total > budget:
        raise SearchBudgetExceededError(
            f"{total} candidate policies exceed budget {budget}", found_so_far=False
        )
    for choice in itertools.product(actions, repeat=len(states)):
        policy = StatePolicy(dict(zip(states, choice)))
        if state_policy_feasible(es, policy, task):
            return True
    return False


def encode_plant(es: ExternalSystem, goal_states) -> Tuple[np.ndarray, np.ndarray, np.ndarray, list, list, list]:
    """Flatten a plant into the integer arrays the sweep kernels consume.

    Returns ``(f, h, goal, states, actions, observations)`` where the
    trailing lists fix the index orders (sorted by repr).
    """
    states = sorted(es.states, key=repr)
    actions = sorted(es.actions, key=repr)
    observations = sorted(es.observations, key=repr)
    xi = {x: i for i, x in enumerate(states)}
    yi = {y: i for i, y in enumerate(observations)}
    n, m = len(states), len(actions)
    f = np.zeros((n, m), np.int64)
    h = np.zeros(n, np.int64)
    goal = np.zeros(n, bool)
    for x in states:
        h[xi[x]] = yi[es.observe(x)]
        goal[xi[x]] = x in goal_states
        for j, u in enumerate(actions):
            f[xi[x], j] = xi[es.move(x, u)]
    return f, h, goal, states, actions, observations
