"""Tests for minimization, the supports check, and machine joins."""

from collections import Counter

import pytest

from itsmin.machines import MooreMachine, build_machine
from itsmin.minimization import (
    find_isomorphism,
    is_isomorphic,
    minimal_sufficient_refinement,
    multi_policy_minimal,
    supports,
)
from itsmin.restriction import HistoryPolicy, belief_filter_machine, build_restriction
from itsmin.ts import DEAD, NO_ACTION, Labeling, TransitionSystem

from helpers import (
    brute_min_sufficient_blocks,
    tetromino_external,
    tetromino_plan,
    tetromino_table_plan,
)

###################################################################################################
# Minimization
###################################################################################################


def _restriction():
    return build_restriction(tetromino_external(), tetromino_plan())


def test_minimized_restriction_has_six_states():
    block_map, small = minimal_sufficient_refinement(_restriction())
    assert len(small.reachable()) == 6
    outs = Counter(small.output[s] for s in small.reachable())
    assert outs == {NO_ACTION: 1, "right": 2, "up": 1, "stop": 1, DEAD: 1}


def test_minimization_strategies_agree_exactly():
    m = _restriction()
    bf, small_f = minimal_sufficient_refinement(m, method="fixpoint")
    bw, small_w = minimal_sufficient_refinement(m, method="worklist")
    assert bf.label_of == bw.label_of
    assert small_f == small_w


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        minimal_sufficient_refinement(_restriction(), method="magic")


def test_minimized_block_count_matches_brute_force():
    m = _restriction()
    _, small = minimal_sufficient_refinement(m)
    assert len(small.reachable()) == brute_min_sufficient_blocks(m) == 6


def test_table_plan_minimizes_to_nine_states():
    # The depth-4 tree folds branch-by-branch, but the four "stop" layers
    # cannot merge: they differ in how soon the depth bound kills them.
    es = tetromino_external()
    m = build_restriction(es, tetromino_table_plan(), depth_bound=4)
    _, small = minimal_sufficient_refinement(m)
    assert len(small.reachable()) == 9


def test_state_renaming_does_not_change_the_result():
    m = _restriction()
    rename = {s: ("wrapped", i) for i, s in enumerate(sorted(m.states, key=repr))}
    m2 = MooreMachine(
        frozenset(rename.values()),
        m.alphabet,
        {(rename[s], y): rename[t] for (s, y), t in m.step.items()},
        rename[m.initial],
        {rename[s]: m.output[s] for s in m.states},
    )
    _, small1 = minimal_sufficient_refinement(m)
    _, small2 = minimal_sufficient_refinement(m2)
    assert small1 == small2  # canonical block numbering makes them identical


###################################################################################################
# supports
###################################################################################################


def test_one_state_candidate_cannot_support_the_plan():
    m = _restriction()
    one = TransitionSystem(
        frozenset({"s0"}), m.alphabet, {("s0", y): "s0" for y in m.alphabet}, "s0"
    )
    assert supports(one, m) is None


def test_belief_filter_supports_the_plan_with_expected_labels():
    es = tetromino_external()
    m = _restriction()
    full = frozenset(es.states)
    mu_table = {
        full: NO_ACTION,
        frozenset({"c00", "c10", "c11"}): "right",
        frozenset({"c10"}): "up",
        frozenset({"c11"}): "right",
        frozenset({"c21"}): "stop",
    }
    bf = belief_filter_machine(es, lambda b: mu_table.get(b, DEAD))
    lab = supports(bf.as_transition_system(), m)
    assert lab is not None
    assert lab[full] == NO_ACTION
    assert lab[frozenset({"c00", "c10", "c11"})] == "right"
    assert lab[frozenset({"c10"})] == "up"
    assert lab[frozenset({"c11"})] == "right"
    assert lab[frozenset({"c21"})] == "stop"
    assert lab[frozenset()] == DEAD


def test_supports_ignores_branches_the_plan_has_abandoned():
    # The machine dies on "1"; a candidate with no "1"-transition at all is
    # still good enough, because dead branches carry no behavior.
    machine = build_machine(
        {"s0", "s1"},
        {"0", "1"},
        {("s0", "0"): "s1", ("s1", "0"): "s1", ("s1", "1"): "s1"},
        "s0",
        {"s0": "a", "s1": "b"},
        complete_with_dead=True,
    )
    cand = TransitionSystem(
        frozenset({"c0", "c1"}),
        frozenset({"0", "1"}),
        {("c0", "0"): "c1", ("c1", "0"): "c1", ("c1", "1"): "c1"},
        "c0",
    )
    lab = supports(cand, machine)
    assert lab is not None
    assert lab["c0"] == "a"
    assert lab["c1"] == "b"


def test_supports_fails_when_live_states_collide():
    # Conflating the "a" state with the "b" state forces one candidate
    # state to output both.
    machine = build_machine(
        {"s0", "s1"},
        {"0"},
        {("s0", "0"): "s1", ("s1", "0"): "s1"},
        "s0",
        {"s0": "a", "s1": "b"},
    )
    one = TransitionSystem(frozenset({"c"}), frozenset({"0"}), {("c", "0"): "c"}, "c")
    assert supports(one, machine) is None


def test_supports_requires_live_observations_to_be_consumable():
    machine = build_machine(
        {"s0", "s1"},
        {"0"},
        {("s0", "0"): "s1", ("s1", "0"): "s1"},
        "s0",
        {"s0": "a", "s1": "b"},
    )
    # Candidate with no "0"-transition: it cannot follow the live branch.
    mute = TransitionSystem(frozenset({"c"}), frozenset({"0"}), {}, "c")
    assert supports(mute, machine) is None


###################################################################################################
# Isomorphism
###################################################################################################


def test_minimized_machine_isomorphic_to_belief_filter():
    es = tetromino_external()
    m = _restriction()
    block_map, small = minimal_sufficient_refinement(m)
    full = frozenset(es.states)
    mu_table = {
        full: NO_ACTION,
        frozenset({"c00", "c10", "c11"}): "right",
        frozenset({"c10"}): "up",
        frozenset({"c11"}): "right",
        frozenset({"c21"}): "stop",
    }
    bf = belief_filter_machine(es, lambda b: mu_table.get(b, DEAD))
    iso = find_isomorphism(small, bf)
    assert iso is not None
    # The bijection sends each block to the belief its histories share.
    assert iso[block_map[m.initial]] == full
    assert iso[block_map[("qA", frozenset({"c00", "c10", "c11"}))]] == frozenset(
        {"c00", "c10", "c11"}
    )
    assert iso[block_map[("qB", frozenset({"c10"}))]] == frozenset({"c10"})
    assert iso[block_map[("qC", frozenset({"c11"}))]] == frozenset({"c11"})
    assert iso[block_map[("qG", frozenset({"c21"}))]] == frozenset({"c21"})
    assert iso[block_map["DEAD"]] == frozenset()


def test_isomorphism_respects_outputs():
    a = build_machine({"s"}, {"0"}, {("s", "0"): "s"}, "s", {"s": "x"})
    b = build_machine({"t"}, {"0"}, {("t", "0"): "t"}, "t", {"t": "y"})
    assert find_isomorphism(a, b) is None
    assert find_isomorphism(a, b, output_map={"x": "y"}) == {"s": "t"}


def test_isomorphism_needs_matching_alphabets():
    a = build_machine({"s"}, {"0"}, {("s", "0"): "s"}, "s", {"s": "x"})
    b = build_machine({"s"}, {"1"}, {("s", "1"): "s"}, "s", {"s": "x"})
    assert find_isomorphism(a, b) is None


def test_is_isomorphic_with_minimize_folds_redundancy():
    es = tetromino_external()
    m = _restriction()
    full = frozenset(es.states)
    mu_table = {
        full: NO_ACTION,
        frozenset({"c00", "c10", "c11"}): "right",
        frozenset({"c10"}): "up",
        frozenset({"c11"}): "right",
        frozenset({"c21"}): "stop",
    }
    bf = belief_filter_machine(es, lambda b: mu_table.get(b, DEAD))
    assert not is_isomorphic(m, bf)  # 7 states vs 6: shapes differ
    assert is_isomorphic(m, bf, minimize=True)


###################################################################################################
# Joint minimal machines
###################################################################################################


def test_multi_policy_minimal_supports_both_inputs():
    es = tetromino_external()
    m1 = _restriction()
    stopper = build_machine(
        {"s"}, {"0", "1"}, {("s", "0"): "s", ("s", "1"): "s"}, "s", {"s": "stop"}
    )
    m2 = build_restriction(es, HistoryPolicy(machine=stopper))
    joint = multi_policy_minimal([m1, m2])
    cand = joint.as_transition_system()
    assert supports(cand, m1) is not None
    assert supports(cand, m2) is not None


def test_multi_policy_minimal_validates_inputs():
    with pytest.raises(ValueError):
        multi_policy_minimal([])
    a = build_machine({"s"}, {"0"}, {("s", "0"): "s"}, "s", {"s": "x"})
    b = build_machine({"s"}, {"1"}, {("s", "1"): "s"}, "s", {"s": "x"})
    with pytest.raises(ValueError):
        multi_policy_minimal([a, b])
