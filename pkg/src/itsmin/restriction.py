"""Restricting the space of histories by a feedback plan.

A history plan assigns the next action to each attainable history that can
arise while the plan is being followed.  Plans come in two representations:

* ``machine`` -- a Moore machine over observations; the plan's action after
  a history is the output of the state reached on the history's observation
  subsequence.  This representation is closed under everything and exact.
* ``table``  -- an explicit map from histories (tuples ending with an
  observation) to actions, total on attainable on-plan histories up to some
  depth (count of observations).

``build_restriction`` turns plan + plant into a Moore machine over
observations whose state reached on an observation sequence tells the next
action, with a single absorbing dead state for everything that cannot occur
while following the plan: unattainable sequences, attainable sequences that
deviate from the plan, and (for tables) anything beyond the depth bound.
"""

from dataclasses import dataclass
from typing import Any, Mapping, Optional

from .coupling import (
    MalformedHistoryError,
    TaskSpec,
    belief_step,
    check_history,
    is_attainable,
    is_feasible,
    observations_of,
)
from .machines import MooreMachine, build_machine, output_after
from .ts import DEAD, NO_ACTION, ExternalSystem, ItsError


class OutOfDomainError(ItsError):
    """A table plan was consulted on an attainable history it does not cover."""


class DepthRequiredError(ItsError):
    """Building from a table plan needs an explicit depth bound."""


class NotFeasibleError(ItsError):
    """The plan fails the supplied task from some start."""


@dataclass(frozen=True)
class HistoryPolicy:
    machine: Optional[MooreMachine] = None
    table: Optional[Mapping] = None

    def __post_init__(self):
        if (self.machine is None) == (self.table is None):
            raise ValueError("give exactly one of machine / table")
        if self.table is not None:
            for eta in self.table:
                check_history(eta)
                if not eta:
                    raise MalformedHistoryError(
                        "the empty history takes no action; leave it out of the table")

    def action(self, eta) -> Any:
        """The plan's next action after ``eta`` (``NO_ACTION`` for the empty one)."""
        eta = check_history(eta)
        if not eta:
            return NO_ACTION
        if self.machine is not None:
            return output_after(self.machine, eta[0::2])
        try:
            return self.table[eta]
        except KeyError:
            raise OutOfDomainError("table plan has no entry for %r" % (eta,)) from None


def to_observations(eta) -> tuple:
    """Strip the actions out of a history."""
    return observations_of(eta)


def effective_action(es: ExternalSystem, pol: HistoryPolicy, eta) -> Any:
    """The plan's action on ``eta`` if some trajectory can produce it, else ``DEAD``.

    This is the labeling whose quotient machinery everything downstream runs
    on: unattainable histories all collapse onto the dead token.
    """
    eta = check_history(eta, es)
    if not is_attainable(es, eta):
        return DEAD
    return pol.action(eta)


def build_restriction(es: ExternalSystem, pol: HistoryPolicy,
                      depth_bound: Optional[int] = None,
                      task: Optional[TaskSpec] = None) -> MooreMachine:
    """Moore machine computing the plan's next action from observations alone.

    For machine plans this is the exact product of the plan generator with
    the belief filter.  For table plans the observation tree is unrolled to
    ``depth_bound`` observations and everything deeper is routed to the dead
    state, so the result is exact up to the bound.  When ``task`` is given,
    the result is checked to accomplish it from every plant start.
    """
    if pol.machine is not None:
        machine = _restrict_machine_plan(es, pol.machine)
    else:
        if depth_bound is None:
            raise DepthRequiredError("table plans need depth_bound")
        machine = _restrict_table_plan(es, pol.table, depth_bound)
    if task is not None and not is_feasible(machine, es, task):
        raise NotFeasibleError("plan does not accomplish the task from every start")
    return machine


def _restrict_machine_plan(es: ExternalSystem, gen: MooreMachine) -> MooreMachine:
    obs = frozenset(es.observations)
    if not obs <= gen.alphabet:
        raise ValueError("plan machine does not cover the plant's observations")
    full = frozenset(es.states)
    dead = "DEAD"
    init = (gen.initial, full)
    states = {init}
    step = {}
    output = {init: gen.output[gen.initial]}
    todo = [init]
    while todo:
        g, b = todo.pop()
        u = gen.output[g]
        for y in obs:
            nb = belief_step(es, b, u, y)
            ng = gen.successor(g, y)
            if not nb or gen.output[ng] == DEAD:
                step[((g, b), y)] = dead
                continue
            nxt = (ng, nb)
            step[((g, b), y)] = nxt
            if nxt not in states:
                states.add(nxt)
                output[nxt] = gen.output[ng]
                todo.append(nxt)
    return build_machine(states, obs, step, init, output,
                         complete_with_dead=True, dead_state=dead)


def _restrict_table_plan(es: ExternalSystem, table: Mapping, depth: int) -> MooreMachine:
    obs = frozenset(es.observations)
    full = frozenset(es.states)
    dead = "DEAD"
    init = ()
    states = {init}
    step = {}
    output = {init: NO_ACTION}
    beliefs = {init: full}
    hists = {init: ()}
    todo = [init]
    while todo:
        node = todo.pop()
        b = beliefs[node]
        eta = hists[node]
        u = NO_ACTION if node == () else output[node]
        for y in obs:
            nb = belief_step(es, b, u, y)
            if not nb or len(node) >= depth:
                step[(node, y)] = dead
                continue
            child = node + (y,)
            child_eta = eta + (y,) if node == () else eta + (u, y)
            try:
                act = table[child_eta]
            except KeyError:
                raise OutOfDomainError(
                    "table plan has no entry for attainable history %r" % (child_eta,)) from None
            step[(node, y)] = child
            states.add(child)
            output[child] = act
            beliefs[child] = nb
            hists[child] = child_eta
            todo.append(child)
    return build_machine(states, obs, step, init, output,
                         complete_with_dead=True, dead_state=dead)


def belief_filter_machine(es: ExternalSystem, mu) -> MooreMachine:
    """The nondeterministic-filter machine induced by a belief feedback ``mu``.

    ``mu`` maps each nonempty belief (frozenset of plant states) to an
    action; the full-state belief plays ``NO_ACTION`` because it sits before
    the first observation.  States of the result are the reachable beliefs
    plus the empty one, which is the dead state.
    """
    full = frozenset(es.states)
    obs = frozenset(es.observations)
    dead = frozenset()
    states = {full, dead}
    output = {full: NO_ACTION if mu(full) is None else mu(full), dead: DEAD}
    step = {}
    todo = [full]
    while todo:
        b = todo.pop()
        u = output[b]
        for y in obs:
            nb = belief_step(es, b, u, y) if b else dead
            step[(b, y)] = nb
            if nb not in states:
                states.add(nb)
                output[nb] = mu(nb)
                todo.append(nb)
    for y in obs:
        step.setdefault((dead, y), dead)
    return MooreMachine(frozenset(states), obs, step, full, output)
