"""Tests for transition systems, labelings, sufficiency, and quotients."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itsmin.ts import (
    DEAD,
    NO_ACTION,
    RESERVED_TOKENS,
    DomainMismatchError,
    ExternalSystem,
    Labeling,
    MissingTransitionError,
    NotSufficientError,
    TransitionSystem,
    UndefinedLabelError,
    identity_labeling,
    is_refinement,
    is_sufficient,
    join_labelings,
    quotient_by,
)

from helpers import tetromino_external, tetromino_plan

###################################################################################################
# Sentinels
###################################################################################################


def test_reserved_tokens():
    assert NO_ACTION == "()"
    assert DEAD == "dead"
    assert RESERVED_TOKENS == frozenset({"()", "dead"})


###################################################################################################
# TransitionSystem basics
###################################################################################################


def _chain_ts():
    states = frozenset({"p", "q", "r", "island"})
    labels = frozenset({"a", "b"})
    trans = {("p", "a"): "q", ("q", "a"): "r", ("r", "a"): "r", ("island", "a"): "island"}
    return TransitionSystem(states, labels, trans, "p")


def test_step_returns_none_when_undefined():
    ts = _chain_ts()
    assert ts.step("p", "a") == "q"
    assert ts.step("p", "b") is None
    assert ts.step("r", "a") == "r"


def test_reachable_ignores_islands():
    ts = _chain_ts()
    assert ts.reachable() == frozenset({"p", "q", "r"})


def test_trimmed_drops_unreachable_states_and_edges():
    ts = _chain_ts().trimmed()
    assert ts.states == frozenset({"p", "q", "r"})
    assert ("island", "a") not in ts.trans
    assert ts.initial == "p"


def test_bad_initial_rejected():
    with pytest.raises(ValueError):
        TransitionSystem(frozenset({"p"}), frozenset({"a"}), {}, "nope")


def test_transition_to_unknown_state_rejected():
    with pytest.raises(ValueError):
        TransitionSystem(frozenset({"p"}), frozenset({"a"}), {("p", "a"): "ghost"}, "p")


def test_unknown_edge_label_rejected():
    with pytest.raises(ValueError):
        TransitionSystem(frozenset({"p"}), frozenset({"a"}), {("p", "zz"): "p"}, "p")


###################################################################################################
# Labeling
###################################################################################################


def test_labeling_blocks_and_lookup():
    lab = Labeling({"p": 0, "q": 0, "r": 1})
    assert lab["p"] == 0
    assert lab.blocks() == {0: frozenset({"p", "q"}), 1: frozenset({"r"})}
    assert "p" in lab and "ghost" not in lab
    with pytest.raises(UndefinedLabelError):
        lab["ghost"]


def test_labeling_restrict():
    lab = Labeling({"p": 0, "q": 0, "r": 1})
    sub = lab.restrict(["p", "r"])
    assert sub.domain == frozenset({"p", "r"})
    assert sub["r"] == 1


###################################################################################################
# Sufficiency
###################################################################################################


def test_identity_labeling_always_sufficient():
    ts = _chain_ts()
    assert is_sufficient(ts, identity_labeling(ts.states))


def test_sufficient_merge_accepted():
    # p and q both step (under "a") into the {q, r} block, so merging q, r
    # commutes.
    ts = _chain_ts()
    lab = Labeling({"p": "lo", "q": "hi", "r": "hi", "island": "lo"})
    assert is_sufficient(ts, lab)


def test_insufficient_merge_rejected():
    # Merging p and q does not commute: their "a"-successors q and r would
    # have to share a label, and they do not.
    ts = _chain_ts()
    lab = Labeling({"p": "m", "q": "m", "r": "far", "island": "far"})
    assert not is_sufficient(ts, lab)


def test_sufficiency_only_looks_at_reachable_part():
    # The island disagrees with everything, but it is unreachable.
    ts = _chain_ts()
    lab = Labeling({"p": 0, "q": 1, "r": 2})
    assert is_sufficient(ts, lab)


def test_sufficiency_requires_labels_on_reachable_states():
    ts = _chain_ts()
    with pytest.raises(UndefinedLabelError):
        is_sufficient(ts, Labeling({"p": 0, "q": 1}))


def test_partial_transitions_impose_no_constraint():
    # q has no "b"-successor; grouping p with q must only constrain "a".
    states = frozenset({"p", "q", "x", "y"})
    trans = {("p", "a"): "x", ("q", "a"): "x", ("p", "b"): "y"}
    ts = TransitionSystem(states, frozenset({"a", "b"}), trans, "p")
    lab = Labeling({"p": 0, "q": 0, "x": 1, "y": 2})
    assert is_sufficient(ts, lab)


def test_plan_labeling_on_restriction_is_not_sufficient():
    """The bundled plan's own action labeling does not commute.

    After one reading of "0" and after three, the plan says the same thing
    ("right"), but one more "0" leads to different instructions ("up" on
    one branch, the dead token on the other).
    """
    from itsmin.restriction import build_restriction

    es = tetromino_external()
    machine = build_restriction(es, tetromino_plan())
    ts = machine.as_transition_system().trimmed()
    pi = Labeling({s: machine.output[s] for s in ts.states})

    s1 = machine.run(("0",))
    s3 = machine.run(("0", "0", "0"))
    assert pi[s1] == pi[s3] == "right"
    assert pi[machine.run(("0", "0"))] == "up"
    assert pi[machine.run(("0", "0", "0", "0"))] == DEAD
    assert not is_sufficient(ts, pi)


###################################################################################################
# Refinement
###################################################################################################


def test_refinement_basics():
    fine = Labeling({"p": 0, "q": 1, "r": 2})
    coarse = Labeling({"p": "x", "q": "x", "r": "y"})
    assert is_refinement(fine, coarse)
    assert not is_refinement(coarse, fine)
    assert is_refinement(fine, fine)


def test_refinement_demands_shared_domain():
    with pytest.raises(DomainMismatchError):
        is_refinement(Labeling({"p": 0}), Labeling({"p": 0, "q": 0}))


###################################################################################################
# Quotient
###################################################################################################


def test_quotient_by_sufficient_labeling():
    ts = _chain_ts()
    lab = Labeling({"p": "lo", "q": "hi", "r": "hi", "island": "zz"})
    q = quotient_by(ts, lab)
    assert q.states == frozenset({"lo", "hi"})
    assert q.initial == "lo"
    assert q.step("lo", "a") == "hi"
    assert q.step("hi", "a") == "hi"
    assert q.step("lo", "b") is None


def test_quotient_rejects_insufficient_labeling():
    ts = _chain_ts()
    lab = Labeling({"p": "m", "q": "m", "r": "far", "island": "far"})
    with pytest.raises(NotSufficientError):
        quotient_by(ts, lab)


def test_quotient_by_identity_is_isomorphic_copy():
    ts = _chain_ts()
    q = quotient_by(ts, identity_labeling(ts.states))
    assert q.states == ts.reachable()
    assert q.initial == ts.initial


###################################################################################################
# Joins
###################################################################################################


def test_join_refines_both_inputs():
    a = Labeling({"p": 0, "q": 0, "r": 1})
    b = Labeling({"p": "x", "q": "y", "r": "y"})
    j = join_labelings([a, b])
    assert is_refinement(j, a)
    assert is_refinement(j, b)
    assert j["p"] == (0, "x")


def test_join_requires_common_domain():
    with pytest.raises(DomainMismatchError):
        join_labelings([Labeling({"p": 0}), Labeling({"q": 0})])


def test_join_of_nothing_rejected():
    with pytest.raises(ValueError):
        join_labelings([])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(0, 3), min_size=4, max_size=4), min_size=1, max_size=4))
def test_join_is_finest_of_its_inputs(rows):
    """Property: the join refines every input, over random labelings."""
    dom = ["s0", "s1", "s2", "s3"]
    labs = [Labeling(dict(zip(dom, row))) for row in rows]
    j = join_labelings(labs)
    for lab in labs:
        assert is_refinement(j, lab)


###################################################################################################
# ExternalSystem
###################################################################################################


def test_external_system_accessors():
    es = tetromino_external()
    assert es.states == frozenset({"c00", "c10", "c11", "c21"})
    assert es.actions == frozenset({"stop", "up", "right"})
    assert es.observations == frozenset({"0", "1"})
    assert es.move("c00", "right") == "c10"
    assert es.move("c00", "up") == "c00"  # blocked moves stand still
    assert es.observe("c21") == "1"
    assert es.obs_preimage("0") == frozenset({"c00", "c10", "c11"})


def test_external_system_demands_total_dynamics():
    base = TransitionSystem(frozenset({"x"}), frozenset({"u"}), {}, "x")
    with pytest.raises(MissingTransitionError):
        ExternalSystem(base, Labeling({"x": "y"}))


def test_external_system_demands_total_sensor():
    base = TransitionSystem(frozenset({"x"}), frozenset({"u"}), {("x", "u"): "x"}, "x")
    with pytest.raises(UndefinedLabelError):
        ExternalSystem(base, Labeling({}))
