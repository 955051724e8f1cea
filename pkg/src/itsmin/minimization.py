"""Machine minimization, the supports check, and machine joins.

Minimization coarsens a full observation machine as much as the outputs
allow: the computed partition is the coarsest one that refines the output
partition and commutes with the transitions, so the quotient machine is
the smallest machine with the same observation-to-action behavior.

Two strategies are provided and must agree: ``fixpoint`` re-splits every
block by successor-block signatures until stable (the obvious quadratic
reference), and ``worklist`` does predecessor splitting with a queue.
Block numbering is canonicalized by breadth-first order from the initial
state (alphabet sorted by repr), so equal inputs give identical results
no matter the strategy or the iteration order of the input maps.
"""

from typing import Iterable, Optional

from .machines import MooreMachine, NotFullError
from .ts import DEAD, Labeling, TransitionSystem


def _sorted_alphabet(alphabet):
    return sorted(alphabet, key=repr)


def minimal_sufficient_refinement(machine: MooreMachine, method: str = "worklist"):
    """Coarsest output-respecting transition-compatible partition + quotient.

    Returns ``(block_map, minimized)`` where ``block_map`` labels each
    reachable state of ``machine`` with its block id (an int, numbered in
    breadth-first order from the initial block) and ``minimized`` is the
    quotient machine on those ids.
    """
    m = machine.trimmed()
    if method == "fixpoint":
        part = _partition_fixpoint(m)
    elif method == "worklist":
        part = _partition_worklist(m)
    else:
        raise ValueError("unknown method %r" % (method,))

    alpha = _sorted_alphabet(m.alphabet)
    # Canonical block ids: BFS over blocks from the initial state's block.
    order = {}
    start = part[m.initial]
    queue = [start]
    order[start] = 0
    reps = {start: m.initial}
    while queue:
        blk = queue.pop(0)
        rep = reps[blk]
        for y in alpha:
            nxt = part[m.step[(rep, y)]]
            if nxt not in order:
                order[nxt] = len(order)
                reps[nxt] = m.step[(rep, y)]
                queue.append(nxt)
    # Every block is reachable (the machine was trimmed), so `order` covers all.
    block_map = Labeling({s: order[part[s]] for s in m.states})
    states = frozenset(order.values())
    step = {}
    output = {}
    for s in m.states:
        bid = order[part[s]]
        output[bid] = m.output[s]
        for y in alpha:
            step[(bid, y)] = order[part[m.step[(s, y)]]]
    minimized = MooreMachine(states, m.alphabet, step, order[start], output)
    return block_map, minimized


def _initial_blocks(m: MooreMachine):
    blocks = {}
    for s in m.states:
        blocks.setdefault(m.output[s], set()).add(s)
    return [frozenset(b) for _, b in sorted(blocks.items(), key=lambda kv: repr(kv[0]))]


def _partition_fixpoint(m: MooreMachine) -> dict:
    """Reference strategy: split by successor-signature until nothing moves."""
    alpha = _sorted_alphabet(m.alphabet)
    part = {}
    for i, blk in enumerate(_initial_blocks(m)):
        for s in blk:
            part[s] = i
    while True:
        sigs = {}
        for s in m.states:
            sig = (part[s],) + tuple(part[m.step[(s, y)]] for y in alpha)
            sigs.setdefault(sig, set()).add(s)
        if len(sigs) == len(set(part.values())):
            return part
        part = {}
        for i, (_, blk) in enumerate(sorted(sigs.items(), key=lambda kv: repr(kv[0]))):
            for s in blk:
                part[s] = i


def _partition_worklist(m: MooreMachine) -> dict:
    """Predecessor-splitting with a worklist (Hopcroft-flavored)."""
    alpha = _sorted_alphabet(m.alphabet)
    preds = {y: {} for y in alpha}
    for s in m.states:
        for y in alpha:
            preds[y].setdefault(m.step[(s, y)], set()).add(s)

    blocks = _initial_blocks(m)
    block_of = {}
    for i, blk in enumerate(blocks):
        for s in blk:
            block_of[s] = i
    work = [(i, y) for i in range(len(blocks)) for y in alpha]
    while work:
        bi, y = work.pop()
        splitter = blocks[bi]
        incoming = set()
        for t in splitter:
            incoming |= preds[y].get(t, set())
        touched = {}
        for s in incoming:
            touched.setdefault(block_of[s], set()).add(s)
        for ci, inside in touched.items():
            cur = blocks[ci]
            if len(inside) == len(cur):
                continue
            outside = cur - inside
            blocks[ci] = frozenset(inside)
            blocks.append(frozenset(outside))
            ni = len(blocks) - 1
            for s in outside:
                block_of[s] = ni
            # Classic rule: the smaller half plus whatever was queued.
            for yy in alpha:
                if (ci, yy) in work:
                    work.append((ni, yy))
                elif len(inside) <= len(outside):
                    work.append((ci, yy))
                else:
                    work.append((ni, yy))
    return dict(block_of)


def supports(candidate: TransitionSystem, machine: MooreMachine) -> Optional[Labeling]:
    """Can ``candidate`` compute the machine's outputs with some state relabeling?

    Walks the synchronized product of the two structures from their initial
    states, following the machine only through live states: branches on
    which the machine has gone dead carry no behavior to reproduce, so they
    impose nothing on the candidate.  If the candidate can consume every
    live observation and no candidate state is forced to carry two
    different outputs, the assignment of outputs to candidate states is
    returned (candidate states never reached on a live branch get the dead
    token).  Otherwise None.
    """
    mu = {}
    alpha = _sorted_alphabet(machine.alphabet)
    if machine.output[machine.initial] == DEAD:
        return Labeling({c: DEAD for c in candidate.states})
    pair0 = (candidate.initial, machine.initial)
    mu[candidate.initial] = machine.output[machine.initial]
    seen = {pair0}
    frontier = [pair0]
    while frontier:
        c, s = frontier.pop()
        for y in alpha:
            ns = machine.step[(s, y)]
            want = machine.output[ns]
            if want == DEAD:
                continue
            nc = candidate.step(c, y)
            if nc is None:
                return None
            have = mu.get(nc)
            if have is None:
                mu[nc] = want
            elif have != want:
                return None
            if (nc, ns) not in seen:
                seen.add((nc, ns))
                frontier.append((nc, ns))
    for c in candidate.states:
        mu.setdefault(c, DEAD)
    return Labeling(mu)


def find_isomorphism(a: MooreMachine, b: MooreMachine, output_map=None) -> Optional[dict]:
    """A bijection between the reachable parts that preserves everything.

    Deterministic structures make this easy: the bijection, if any, is
    forced along a parallel breadth-first walk.  ``output_map`` optionally
    translates a-outputs to b-outputs before comparing.
    """
    if a.alphabet != b.alphabet:
        return None

    def out_a(s):
        o = a.output[s]
        return output_map.get(o, o) if output_map else o

    iso = {a.initial: b.initial}
    used = {b.initial}
    if out_a(a.initial) != b.output[b.initial]:
        return None
    queue = [a.initial]
    alpha = _sorted_alphabet(a.alphabet)
    while queue:
        s = queue.pop(0)
        for y in alpha:
            ta, tb = a.step[(s, y)], b.step[(iso[s], y)]
            if ta in iso:
                if iso[ta] != tb:
                    return None
                continue
            if tb in used or out_a(ta) != b.output[tb]:
                return None
            iso[ta] = tb
            used.add(tb)
            queue.append(ta)
    if len(used) != len(b.reachable()):
        return None
    return iso


def is_isomorphic(a: MooreMachine, b: MooreMachine, output_map=None,
                  minimize: bool = False) -> bool:
    if minimize:
        _, a = minimal_sufficient_refinement(a)
        _, b = minimal_sufficient_refinement(b)
    return find_isomorphism(a, b, output_map) is not None


def multi_policy_minimal(machines: Iterable[MooreMachine]) -> MooreMachine:
    """Smallest single machine that carries every given machine's outputs.

    Builds the synchronized product with tuple outputs (one slot per input
    machine) and minimizes it.  Projecting the tuple back out recovers each
    input's behavior, which is what ``supports`` verifies against.
    """
    machines = list(machines)
    if not machines:
        raise ValueError("need at least one machine")
    alpha = machines[0].alphabet
    for m in machines[1:]:
        if m.alphabet != alpha:
            raise ValueError("machines must share an observation alphabet")
    init = tuple(m.initial for m in machines)
    states = {init}
    step = {}
    output = {init: tuple(m.output[m.initial] for m in machines)}
    todo = [init]
    while todo:
        joint = todo.pop()
        for y in alpha:
            nxt = tuple(m.step[(s, y)] for m, s in zip(machines, joint))
            step[(joint, y)] = nxt
            if nxt not in states:
                states.add(nxt)
                output[nxt] = tuple(m.output[s] for m, s in zip(machines, nxt))
                todo.append(nxt)
    product = MooreMachine(frozenset(states), alpha, step, init, output)
    _, small = minimal_sufficient_refinement(product)
    return small
