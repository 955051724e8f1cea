"""Plain-text scenario and machine files.

One human-editable, line-oriented format drives the command-line front
end.  A scenario file has up to four sections::

    [external]
    states: x1 x2 x3 x4
    actions: u1 u2 u3
    trans: x1 u3 x2          # one line per (state, action) -> state
    obs: 0 = x1 x2 x3        # sensor blocks partition the states
    obs: 1 = x4

    [task]
    variant: observation      # or: state
    goal: 1                   # goal observations (or states)
    horizon: 12

    [policy]
    type: machine             # or: table
    start: q0
    state: q0 = ()            # name = output token
    edge: q0 0 qA             # state, observation, successor

    [options]
    depth: 16
    samples: 10000
    seed: 7

Table policies replace the machine lines with rows mapping a history
(observation action observation ...) to the next action::

    row: 0 -> u3
    row: 0 u3 0 -> u2

A standalone machine file is a single ``[machine]`` section with the same
``start`` / ``state`` / ``edge`` lines.  ``()`` and ``dead`` are reserved
output tokens (stand-still and the dead sink) and may not name states,
actions, or observations.  Parsing is strict: the first offending line is
reported with its number.  Serialization is canonical (sorted), so
parse -> serialize -> parse is the identity.
"""

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .coupling import TaskSpec
from .machines import MooreMachine, build_machine
from .restriction import HistoryPolicy
from .ts import (
    DEAD,
    NO_ACTION,
    RESERVED_TOKENS,
    ExternalSystem,
    ItsError,
    Labeling,
    TransitionSystem,
)


class ParseError(ItsError):
    """The text cannot be read as a scenario or machine file."""

    def __init__(self, message: str, lineno: Optional[int] = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class IntegrityError(ItsError):
    """The file parsed but references something it never declared."""


_SECTION_RE = re.compile(r"^\[([a-z][a-z-]*)\]$")
_TOKEN_RE = re.compile(r"^[^\s=#\[\]>]+$")
_OPTION_TYPES = {"depth": int, "samples": int, "seed": int, "tolerance": float}


@dataclass
class Scenario:
    external: ExternalSystem
    task: Optional[TaskSpec]
    policy: Optional[HistoryPolicy]
    options: Dict[str, object] = field(default_factory=dict)


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _split_sections(text: str) -> Dict[str, List[Tuple[int, str]]]:
    sections: Dict[str, List[Tuple[int, str]]] = {}
    current = None
    for lineno, line in _lines(text):
        m = _SECTION_RE.match(line)
        if m:
            current = m.group(1)
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", lineno)
            sections[current] = []
            continue
        if current is None:
            raise ParseError(f"content before any section header: {line!r}", lineno)
        sections[current].append((lineno, line))
    if not sections:
        raise ParseError("empty file")
    return sections


def _keyed(line: str, lineno: int) -> Tuple[str, str]:
    if ":" not in line:
        raise ParseError(f"expected 'key: value', got {line!r}", lineno)
    key, _, rest = line.partition(":")
    return key.strip(), rest.strip()


def _check_token(tok: str, what: str, lineno: int):
    if tok in RESERVED_TOKENS:
        raise ParseError(f"{tok!r} is reserved and cannot name {what}", lineno)
    if not _TOKEN_RE.match(tok):
        raise ParseError(f"{tok!r} cannot name {what} (=, #, >, brackets are unusable)", lineno)


def _parse_external(body) -> ExternalSystem:
    states: List[str] = []
    actions: List[str] = []
    trans: Dict[Tuple[str, str], str] = {}
    sensor: Dict[str, str] = {}
    obs_seen: List[str] = []
    for lineno, line in body:
        key, rest = _keyed(line, lineno)
        if key == "states":
            for tok in rest.split():
                _check_token(tok, "a state", lineno)
                if tok in states:
                    raise ParseError(f"state {tok!r} declared twice", lineno)
                states.append(tok)
        elif key == "actions":
            for tok in rest.split():
                _check_token(tok, "an action", lineno)
                if tok in actions:
                    raise ParseError(f"action {tok!r} declared twice", lineno)
                actions.append(tok)
        elif key == "trans":
            parts = rest.split()
            if len(parts) != 3:
                raise ParseError("trans wants 'state action state'", lineno)
            x, u, x2 = parts
            for tok, kind in ((x, "state"), (x2, "state"), (u, "action")):
                pool = states if kind == "state" else actions
                if tok not in pool:
                    raise IntegrityError(
                        f"line {lineno}: transition references undeclared {kind} {tok!r}"
                    )
            if (x, u) in trans:
                raise ParseError(f"duplicate transition for ({x}, {u})", lineno)
            trans[(x, u)] = x2
        elif key == "obs":
            if "=" not in rest:
                raise ParseError("obs wants 'label = state state ...'", lineno)
            y, _, members = rest.partition("=")
            y = y.strip()
            _check_token(y, "an observation", lineno)
            if y in obs_seen:
                raise ParseError(f"observation block {y!r} declared twice", lineno)
            obs_seen.append(y)
            for tok in members.split():
                if tok not in states:
                    raise IntegrityError(
                        f"line {lineno}: observation block {y!r} references "
                        f"undeclared state {tok!r}"
                    )
                if tok in sensor:
                    raise IntegrityError(
                        f"line {lineno}: state {tok!r} appears in two observation blocks"
                    )
                sensor[tok] = y
        else:
            raise ParseError(f"unknown [external] line key {key!r}", lineno)
    if not states:
        raise ParseError("[external] declares no states")
    if not actions:
        raise ParseError("[external] declares no actions")
    missing = [x for x in states if x not in sensor]
    if missing:
        raise IntegrityError(f"state {missing[0]!r} belongs to no observation block")
    holes = [(x, u) for x in states for u in actions if (x, u) not in trans]
    if holes:
        raise IntegrityError(
            f"dynamics are not total: no transition for {holes[0]!r} "
            "(blocked moves should self-loop)"
        )
    base = TransitionSystem(
        frozenset(states), frozenset(actions), trans, sorted(states)[0]
    )
    return ExternalSystem(base, Labeling(sensor))


def _parse_task(body, external: ExternalSystem) -> TaskSpec:
    variant = None
    goal: List[str] = []
    horizon = None
    for lineno, line in body:
        key, rest = _keyed(line, lineno)
        if key == "variant":
            if rest not in ("observation", "state"):
                raise ParseError(f"variant must be observation/state, got {rest!r}", lineno)
            variant = rest
        elif key == "goal":
            goal.extend(rest.split())
        elif key == "horizon":
            try:
                horizon = int(rest)
            except ValueError:
                raise ParseError(f"horizon must be an integer, got {rest!r}", lineno)
        else:
            raise ParseError(f"unknown [task] line key {key!r}", lineno)
    if variant is None or horizon is None or not goal:
        raise ParseError("[task] needs variant, goal, and horizon")
    if variant == "observation":
        for tok in goal:
            if tok not in external.observations:
                raise IntegrityError(f"goal references undeclared observation {tok!r}")
        return TaskSpec(horizon=horizon, goal_obs=frozenset(goal))
    for tok in goal:
        if tok not in external.states:
            raise IntegrityError(f"goal references undeclared state {tok!r}")
    return TaskSpec(horizon=horizon, goal_states=frozenset(goal))


def _parse_machine_lines(body, observations, actions):
    """Shared by [policy type: machine] and standalone [machine] sections.

    ``observations``/``actions`` of None skip the respective integrity
    checks (standalone machine files carry their own alphabets).
    """
    start = None
    outputs: Dict[str, str] = {}
    order: List[Tuple[int, str, str, str]] = []
    for lineno, line in body:
        key, rest = _keyed(line, lineno)
        if key == "start":
            start = rest
        elif key == "state":
            if "=" not in rest:
                raise ParseError("state wants 'name = output'", lineno)
            name, _, out = rest.partition("=")
            name, out = name.strip(), out.strip()
            if not name or not out:
                raise ParseError("state wants 'name = output'", lineno)
            if name in outputs:
                raise ParseError(f"machine state {name!r} declared twice", lineno)
            if actions is not None and out not in RESERVED_TOKENS and out not in actions:
                raise IntegrityError(
                    f"line {lineno}: output {out!r} is not a declared action"
                )
            outputs[name] = out
        elif key == "edge":
            parts = rest.split()
            if len(parts) != 3:
                raise ParseError("edge wants 'state observation state'", lineno)
            order.append((lineno, *parts))
        elif key in ("type",):
            continue  # handled by the caller
        else:
            raise ParseError(f"unknown machine line key {key!r}", lineno)
    if start is None:
        raise ParseError("machine has no start line")
    if start not in outputs:
        raise IntegrityError(f"start state {start!r} is not declared")
    step: Dict[Tuple[str, str], str] = {}
    alphabet = set() if observations is None else set(observations)
    for lineno, s, y, t in order:
        for tok in (s, t):
            if tok not in outputs:
                raise IntegrityError(
                    f"line {lineno}: edge references undeclared machine state {tok!r}"
                )
        if observations is not None and y not in observations:
            raise IntegrityError(
                f"line {lineno}: edge references undeclared observation {y!r}"
            )
        if (s, y) in step:
            raise ParseError(f"duplicate edge for ({s}, {y})", lineno)
        step[(s, y)] = t
        alphabet.add(y)
    return build_machine(
        set(outputs), frozenset(alphabet), step, start, outputs, complete_with_dead=True
    )


def _parse_history_token_row(rest: str, lineno: int, external: ExternalSystem):
    if "->" not in rest:
        raise ParseError("row wants 'obs [action obs ...] -> action'", lineno)
    hist_part, _, act = rest.rpartition("->")
    toks = hist_part.split()
    act = act.strip()
    if not toks:
        raise ParseError("row has an empty history", lineno)
    for i, tok in enumerate(toks):
        pool = external.observations if i % 2 == 0 else external.actions
        kind = "observation" if i % 2 == 0 else "action"
        if tok not in pool:
            raise IntegrityError(f"line {lineno}: row uses undeclared {kind} {tok!r}")
    if len(toks) % 2 == 0:
        raise ParseError("row history must end with an observation", lineno)
    if act not in external.actions:
        raise IntegrityError(f"line {lineno}: row assigns undeclared action {act!r}")
    return tuple(toks), act


def _parse_policy(body, external: ExternalSystem) -> HistoryPolicy:
    ptype = None
    for lineno, line in body:
        key, rest = _keyed(line, lineno)
        if key == "type":
            if rest not in ("machine", "table"):
                raise ParseError(f"policy type must be machine/table, got {rest!r}", lineno)
            ptype = rest
            break
    if ptype is None:
        raise ParseError("[policy] needs a type line")
    if ptype == "machine":
        machine = _parse_machine_lines(body, external.observations, external.actions)
        return HistoryPolicy(machine=machine)
    table = {}
    for lineno, line in body:
        key, rest = _keyed(line, lineno)
        if key == "type":
            continue
        if key != "row":
            raise ParseError(f"unknown table-policy line key {key!r}", lineno)
        eta, act = _parse_history_token_row(rest, lineno, external)
        if eta in table:
            raise ParseError(f"duplicate row for history {' '.join(eta)}", lineno)
        table[eta] = act
    if not table:
        raise ParseError("table policy has no rows")
    return HistoryPolicy(table=table)


def _parse_options(body) -> Dict[str, object]:
    opts: Dict[str, object] = {}
    for lineno, line in body:
        key, rest = _keyed(line, lineno)
        if key not in _OPTION_TYPES:
            raise ParseError(f"unknown option {key!r}", lineno)
        if key in opts:
            raise ParseError(f"option {key!r} given twice", lineno)
        try:
            opts[key] = _OPTION_TYPES[key](rest)
        except ValueError:
            raise ParseError(f"option {key!r} wants a {_OPTION_TYPES[key].__name__}", lineno)
    return opts


def parse_scenario(text: str) -> Scenario:
    sections = _split_sections(text)
    unknown = set(sections) - {"external", "task", "policy", "options"}
    if unknown:
        raise ParseError(f"unknown section [{sorted(unknown)[0]}]")
    if "external" not in sections:
        raise ParseError("scenario needs an [external] section")
    external = _parse_external(sections["external"])
    task = _parse_task(sections["task"], external) if "task" in sections else None
    policy = _parse_policy(sections["policy"], external) if "policy" in sections else None
    options = _parse_options(sections.get("options", []))
    return Scenario(external, task, policy, options)


def parse_machine(text: str) -> MooreMachine:
    sections = _split_sections(text)
    if set(sections) != {"machine"}:
        raise ParseError("a machine file is a single [machine] section")
    return _parse_machine_lines(sections["machine"], None, None)


# ---------------------------------------------------------------------------
# Serialization (canonical: everything sorted, so output is deterministic).


def _fmt_external(es: ExternalSystem) -> List[str]:
    out = ["[external]"]
    states = sorted(es.states)
    actions = sorted(es.actions)
    out.append("states: " + " ".join(states))
    out.append("actions: " + " ".join(actions))
    for x in states:
        for u in actions:
            out.append(f"trans: {x} {u} {es.move(x, u)}")
    blocks = es.sensor.blocks()
    for y in sorted(blocks, key=str):
        out.append(f"obs: {y} = " + " ".join(sorted(blocks[y])))
    return out


def _fmt_task(task: TaskSpec) -> List[str]:
    out = ["[task]"]
    if task.goal_obs is not None:
        out.append("variant: observation")
        out.append("goal: " + " ".join(sorted(task.goal_obs, key=str)))
    else:
        out.append("variant: state")
        out.append("goal: " + " ".join(sorted(task.goal_states, key=str)))
    out.append(f"horizon: {task.horizon}")
    return out


def _fmt_machine_lines(m: MooreMachine) -> List[str]:
    out = [f"start: {m.initial}"]
    for s in sorted(m.states, key=str):
        out.append(f"state: {s} = {m.output[s]}")
    for (s, y), t in sorted(m.step.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
        out.append(f"edge: {s} {y} {t}")
    return out


def _fmt_policy(pol: HistoryPolicy) -> List[str]:
    out = ["[policy]"]
    if pol.machine is not None:
        out.append("type: machine")
        out.extend(_fmt_machine_lines(pol.machine))
    else:
        out.append("type: table")
        for eta in sorted(pol.table, key=lambda e: (len(e), e)):
            out.append("row: " + " ".join(eta) + " -> " + pol.table[eta])
    return out


def serialize_scenario(sc: Scenario) -> str:
    parts = _fmt_external(sc.external)
    if sc.task is not None:
        parts.append("")
        parts.extend(_fmt_task(sc.task))
    if sc.policy is not None:
        parts.append("")
        parts.extend(_fmt_policy(sc.policy))
    if sc.options:
        parts.append("")
        parts.append("[options]")
        for key in sorted(sc.options):
            parts.append(f"{key}: {sc.options[key]}")
    return "\n".join(parts) + "\n"


def canonical_machine(m: MooreMachine) -> MooreMachine:
    """Deterministically rename states to s0, s1, ... in discovery order.

    Machines produced by restriction or minimization carry structured
    state names (tuples, frozensets) that cannot live in a text file;
    breadth-first search over the sorted alphabet fixes a stable
    renaming.  Unreachable states follow in repr order.
    """
    order = []
    seen = {m.initial}
    queue = [m.initial]
    while queue:
        s = queue.pop(0)
        order.append(s)
        for y in sorted(m.alphabet, key=str):
            t = m.step[(s, y)]
            if t not in seen:
                seen.add(t)
                queue.append(t)
    order += sorted((s for s in m.states if s not in seen), key=repr)
    name = {s: f"s{i}" for i, s in enumerate(order)}
    step = {(name[s], y): name[t] for (s, y), t in m.step.items()}
    output = {name[s]: m.output[s] for s in m.states}
    return MooreMachine(
        frozenset(name.values()), m.alphabet, step, name[m.initial], output
    )


def _token_safe(m: MooreMachine) -> bool:
    return all(isinstance(s, str) and _TOKEN_RE.match(s) for s in m.states)


def serialize_machine(m: MooreMachine) -> str:
    if not _token_safe(m):
        m = canonical_machine(m)
    return "\n".join(["[machine]"] + _fmt_machine_lines(m)) + "\n"


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def load_machine(path) -> MooreMachine:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_machine(fh.read())
