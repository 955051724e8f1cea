"""Moore machines driven by observations.

These are total deterministic transition systems over an observation
alphabet with one output token per state.  They serve two roles at once:
as generators for feedback plans (the output of the state reached after an
observation sequence is the next action) and as the result of restricting
the space of observation histories by a plan.

Conventions enforced here:

* ``step`` and ``output`` are total.
* Dead behavior is explicit: any state whose output is ``DEAD`` may only
  step to states whose output is ``DEAD``.  Once dead, always dead.
* The initial state's output is normally ``NO_ACTION`` because no action
  precedes the first observation, but that is the builders' business, not
  a structural invariant.
"""

from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .ts import (
    DEAD,
    ItsError,
    Labeling,
    TransitionSystem,
)


class NotFullError(ItsError):
    """The machine (or candidate) is missing required transitions."""


class UnknownObservationError(ItsError):
    """An observation outside the machine's alphabet was supplied."""


@dataclass(frozen=True)
class MooreMachine:
    states: frozenset
    alphabet: frozenset
    step: Mapping
    initial: Any
    output: Mapping

    def __post_init__(self):
        if self.initial not in self.states:
            raise ValueError("initial state %r is not a state" % (self.initial,))
        for s in self.states:
            if s not in self.output:
                raise NotFullError("state %r has no output" % (s,))
            for y in self.alphabet:
                if (s, y) not in self.step:
                    raise NotFullError("missing transition (%r, %r)" % (s, y))
        for (s, y), t in self.step.items():
            if t not in self.states:
                raise ValueError("transition target %r is not a state" % (t,))
            if self.output[s] == DEAD and self.output[t] != DEAD:
                raise ValueError(
                    "dead state %r escapes to live state %r" % (s, t))

    def successor(self, state, y):
        try:
            return self.step[(state, y)]
        except KeyError:
            if y not in self.alphabet:
                raise UnknownObservationError("observation %r not in alphabet" % (y,)) from None
            raise

    def run(self, obs_seq: Iterable):
        """State reached from the initial state on an observation sequence."""
        s = self.initial
        for y in obs_seq:
            s = self.successor(s, y)
        return s

    def reachable(self) -> frozenset:
        seen = {self.initial}
        stack = [self.initial]
        while stack:
            s = stack.pop()
            for y in self.alphabet:
                t = self.step[(s, y)]
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    def trimmed(self) -> "MooreMachine":
        keep = self.reachable()
        step = {(s, y): t for (s, y), t in self.step.items() if s in keep}
        out = {s: self.output[s] for s in keep}
        return MooreMachine(keep, self.alphabet, step, self.initial, out)

    def as_transition_system(self) -> TransitionSystem:
        return TransitionSystem(self.states, self.alphabet, dict(self.step), self.initial)

    def output_labeling(self) -> Labeling:
        return Labeling(dict(self.output))

    @property
    def dead_states(self) -> frozenset:
        return frozenset(s for s in self.states if self.output[s] == DEAD)


def build_machine(states, alphabet, step, initial, output,
                  complete_with_dead: bool = False,
                  dead_state="DEAD") -> MooreMachine:
    """Assemble a machine, optionally padding missing edges with a dead sink.

    With ``complete_with_dead`` every missing ``(state, obs)`` pair is routed
    to ``dead_state`` (created on demand, output ``DEAD``), which makes the
    machine total without the caller spelling out every edge.
    """
    states = set(states)
    alphabet = frozenset(alphabet)
    step = dict(step)
    output = dict(output)
    if complete_with_dead:
        need = [(s, y) for s in states for y in alphabet if (s, y) not in step]
        routed = dead_state not in states and dead_state in step.values()
        if need or routed:
            if dead_state not in states:
                states.add(dead_state)
                output[dead_state] = DEAD
            for s, y in need:
                step[(s, y)] = dead_state
            for y in alphabet:
                step.setdefault((dead_state, y), dead_state)
    return MooreMachine(frozenset(states), alphabet, step, initial, output)


def output_after(machine: MooreMachine, obs_seq) -> Any:
    """Output token of the state reached on ``obs_seq`` from the start.

    The empty sequence yields the initial state's output.
    """
    return machine.output[machine.run(tuple(obs_seq))]
