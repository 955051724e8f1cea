"""Deterministic transition systems, state labelings, and sensor-equipped plants.

A transition system here is a (possibly partial) deterministic automaton
without outputs: states, edge labels, a transition map and an initial state.
Labelings attach an opaque label to each state of some domain; they double as
partitions (two states are in the same block iff their labels are equal).

Two reserved label tokens are used by the policy machinery downstream:

``NO_ACTION``  ("()")  -- the output of a machine state reached before the
                          first observation, i.e. "no action taken yet".
``DEAD``       ("dead") -- the output of the absorbing dead state that soaks
                           up unattainable or off-plan inputs.

Labels are compared by equality only; nothing else inspects them.
"""

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

NO_ACTION = "()"
DEAD = "dead"

RESERVED_TOKENS = frozenset({NO_ACTION, DEAD})


class ItsError(Exception):
    """Base class for errors raised by this package."""


class UndefinedLabelError(ItsError):
    """A labeling was consulted outside its domain."""


class DomainMismatchError(ItsError):
    """Two labelings that must share a domain do not."""


class NotSufficientError(ItsError):
    """A quotient was requested for a labeling that is not sufficient."""


class MissingTransitionError(ItsError):
    """A transition that the operation requires is not defined."""


@dataclass(frozen=True)
class TransitionSystem:
    """Deterministic, possibly partial transition structure.

    ``trans`` maps ``(state, label) -> state``.  Missing pairs simply mean
    the transition is undefined; operations that need totality check for it
    and raise ``MissingTransitionError`` themselves.
    """

    states: frozenset
    labels: frozenset
    trans: Mapping
    initial: Any

    def __post_init__(self):
        if self.initial not in self.states:
            raise ValueError("initial state %r is not a state" % (self.initial,))
        for (s, a), t in self.trans.items():
            if s not in self.states or t not in self.states:
                raise ValueError("transition endpoint outside state set: %r" % ((s, a, t),))
            if a not in self.labels:
                raise ValueError("unknown edge label %r" % (a,))

    def step(self, state, label):
        """Successor of ``state`` under ``label``, or None when undefined."""
        return self.trans.get((state, label))

    def reachable(self) -> frozenset:
        """States reachable from the initial state."""
        seen = {self.initial}
        frontier = [self.initial]
        while frontier:
            s = frontier.pop()
            for a in self.labels:
                t = self.trans.get((s, a))
                if t is not None and t not in seen:
                    seen.add(t)
                    frontier.append(t)
        return frozenset(seen)

    def trimmed(self) -> "TransitionSystem":
        """Restriction of the system to its reachable part."""
        keep = self.reachable()
        trans = {(s, a): t for (s, a), t in self.trans.items() if s in keep}
        return TransitionSystem(keep, self.labels, trans, self.initial)


@dataclass(frozen=True)
class Labeling:
    """A map from states to opaque labels; equivalently a partition."""

    label_of: Mapping

    @property
    def domain(self) -> frozenset:
        return frozenset(self.label_of)

    def __getitem__(self, state):
        try:
            return self.label_of[state]
        except KeyError:
            raise UndefinedLabelError("state %r has no label" % (state,)) from None

    def __contains__(self, state):
        return state in self.label_of

    def blocks(self) -> dict:
        """Group the domain by label: label -> frozenset of states."""
        out = {}
        for s, lab in self.label_of.items():
            out.setdefault(lab, set()).add(s)
        return {lab: frozenset(ss) for lab, ss in out.items()}

    def restrict(self, states: Iterable) -> "Labeling":
        sub = {s: self.label_of[s] for s in states}
        return Labeling(sub)


@dataclass(frozen=True)
class ExternalSystem:
    """A plant with total dynamics plus a total sensor map.

    ``base`` carries the state set, the action alphabet and the (total)
    dynamics; ``sensor`` assigns an observation label to every state.
    Blocked motions are modeled as self-loops by convention, which is what
    keeps the dynamics total.
    """

    base: TransitionSystem
    sensor: Labeling

    def __post_init__(self):
        missing = [s for s in self.base.states if s not in self.sensor]
        if missing:
            raise UndefinedLabelError("sensor undefined on %r" % (sorted(map(repr, missing)),))
        for x in self.base.states:
            for u in self.base.labels:
                if (x, u) not in self.base.trans:
                    raise MissingTransitionError(
                        "dynamics must be total; missing (%r, %r)" % (x, u))

    @property
    def states(self) -> frozenset:
        return self.base.states

    @property
    def actions(self) -> frozenset:
        return self.base.labels

    @property
    def observations(self) -> frozenset:
        return frozenset(self.sensor.label_of.values())

    def move(self, x, u):
        nxt = self.base.step(x, u)
        if nxt is None:
            raise MissingTransitionError("no transition for (%r, %r)" % (x, u))
        return nxt

    def observe(self, x):
        return self.sensor[x]

    def obs_preimage(self, y) -> frozenset:
        return frozenset(x for x in self.base.states if self.sensor[x] == y)


def is_sufficient(ts: TransitionSystem, kappa: Labeling) -> bool:
    """Does ``kappa`` commute with the transitions of ``ts``?

    Checked over the reachable part only.  Whenever two reachable states
    share a label and both have a successor under some edge label, the two
    successors must share a label as well.  Pairs where either transition is
    undefined impose no constraint.
    """
    reach = ts.reachable()
    for s in reach:
        if s not in kappa:
            raise UndefinedLabelError("labeling undefined on reachable state %r" % (s,))
    by_label = {}
    for s in reach:
        by_label.setdefault(kappa[s], []).append(s)
    for group in by_label.values():
        for a in ts.labels:
            succ_label = None
            for s in group:
                t = ts.step(s, a)
                if t is None:
                    continue
                if succ_label is None:
                    succ_label = kappa[t]
                elif kappa[t] != succ_label:
                    return False
    return True


def is_refinement(fine: Labeling, coarse: Labeling) -> bool:
    """True when every block of ``fine`` sits inside a block of ``coarse``.

    Both labelings must have the same domain.
    """
    if fine.domain != coarse.domain:
        raise DomainMismatchError("labelings do not share a domain")
    rep = {}
    for s, lab in fine.label_of.items():
        c = coarse[s]
        if lab in rep:
            if rep[lab] != c:
                return False
        else:
            rep[lab] = c
    return True


def quotient_by(ts: TransitionSystem, kappa: Labeling) -> TransitionSystem:
    """Quotient of the reachable part of ``ts`` by a sufficient labeling.

    States of the quotient are the labels themselves.  Raises
    ``NotSufficientError`` if ``kappa`` does not commute with the
    transitions, since the quotient would not be deterministic.
    """
    if not is_sufficient(ts, kappa):
        raise NotSufficientError("labeling does not induce a deterministic quotient")
    reach = ts.reachable()
    states = frozenset(kappa[s] for s in reach)
    trans = {}
    for s in reach:
        for a in ts.labels:
            t = ts.step(s, a)
            if t is None:
                continue
            trans[(kappa[s], a)] = kappa[t]
    return TransitionSystem(states, ts.labels, trans, kappa[ts.initial])


def join_labelings(labelings: Iterable[Labeling]) -> Labeling:
    """Coarsest common refinement of several labelings on one domain.

    The joined label of a state is the tuple of its component labels, in
    the order the labelings were given.
    """
    labelings = list(labelings)
    if not labelings:
        raise ValueError("need at least one labeling")
    dom = labelings[0].domain
    for l in labelings[1:]:
        if l.domain != dom:
            raise DomainMismatchError("labelings do not share a domain")
    joined = {s: tuple(l[s] for l in labelings) for s in dom}
    return Labeling(joined)


def identity_labeling(states: Iterable) -> Labeling:
    return Labeling({s: s for s in states})
