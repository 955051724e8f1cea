"""Command-line front end.

One verb per pipeline; scenarios and machines travel as text files
(:mod:`itsmin.scenario`), polygons as vertex lists, graphs as DOT.  Every
verb is deterministic: identical inputs and flags produce byte-identical
artifact files.  Exit status: 0 on success, 1 on a negative verdict
(not supported, not isomorphic, not feasible, nothing found), 2 on errors.
"""

import argparse
import os
import sys
from pathlib import Path

from .dotexport import machine_to_dot
from .machines import MooreMachine
from .minimization import find_isomorphism, minimal_sufficient_refinement, multi_policy_minimal, supports
from .coupling import TaskSpec, find_feasible_policy
from .reactive import (
    extract_state_policy,
    minimal_reactive_sensor,
    reactive_policy_exists,
    sensor_sufficient_for_reactive,
)
from .restriction import build_restriction
from .scenario import (
    Scenario,
    canonical_machine,
    load_machine,
    load_scenario,
    serialize_machine,
)
from .ts import DEAD, ItsError

from .geo import (
    SimplePolygon,
    event_trace,
    gap_observation,
    load_polygon,
    navigation_report,
    reactive_counterexample,
    shortest_path,
)


class CliError(ItsError):
    """A usage problem the argument parser cannot catch."""


# ---------------------------------------------------------------------------
# Small helpers.


def _write_atomic(path: Path, content: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(content)
    os.replace(tmp, path)


def _out_path(args, input_path: str, suffix: str) -> Path:
    stem = Path(input_path).stem
    out_dir = Path(args.out_dir) if args.out_dir else Path(".")
    return out_dir / f"{stem}.{suffix}"


def _need(sc: Scenario, what: str):
    if getattr(sc, what) is None:
        raise CliError(f"this verb needs a [{what}] section in the scenario")


def _table_depth(pol) -> int:
    return max((len(eta) + 1) // 2 for eta in pol.table)


def _restriction_machine(sc: Scenario, args) -> MooreMachine:
    depth = getattr(args, "depth", None)
    if depth is None:
        depth = sc.options.get("depth")
    if sc.policy.table is not None and depth is None:
        # A table cannot answer below its own horizon anyway, so its depth
        # is the only bound that is both exact and safe as a default.
        depth = _table_depth(sc.policy)
    return build_restriction(sc.external, sc.policy, depth_bound=depth)


def _task(sc: Scenario, args) -> TaskSpec:
    task = sc.task
    horizon = getattr(args, "horizon", None)
    if horizon is not None:
        kind = "goal_obs" if task.goal_obs is not None else "goal_states"
        task = TaskSpec(horizon=horizon, **{kind: getattr(task, kind)})
    return task


def _parse_point(text: str):
    try:
        xs, ys = text.split(",")
        return (float(xs), float(ys))
    except ValueError:
        raise CliError(f"expected a point as 'x,y', got {text!r}")


def _parse_path(text: str):
    pts = [_parse_point(tok) for tok in text.split()]
    if len(pts) < 2:
        raise CliError("a path needs at least two points")
    return pts


def _emit_machine(args, input_path: str, verb: str, machine: MooreMachine) -> Path:
    safe = canonical_machine(machine)
    its = _out_path(args, input_path, f"{verb}.its")
    _write_atomic(its, serialize_machine(safe))
    if args.dot:
        _write_atomic(_out_path(args, input_path, f"{verb}.dot"), machine_to_dot(safe))
    return its


def _live_outputs(m: MooreMachine):
    return sorted((m.output[s] for s in m.reachable() if m.output[s] != DEAD), key=str)


# ---------------------------------------------------------------------------
# Verbs over scenarios.


def _cmd_restrict(args) -> int:
    sc = load_scenario(args.scenario)
    _need(sc, "policy")
    m = _restriction_machine(sc, args)
    path = _emit_machine(args, args.scenario, "restrict", m)
    live = len(m.reachable()) - len(m.dead_states & m.reachable())
    print(f"restriction: {len(m.reachable())} states ({live} live)")
    print(f"wrote {path}")
    return 0


def _cmd_minimize(args) -> int:
    sc = load_scenario(args.scenario)
    _need(sc, "policy")
    m = _restriction_machine(sc, args)
    _, mini = minimal_sufficient_refinement(m)
    path = _emit_machine(args, args.scenario, "minimize", mini)
    print(f"minimized: {len(mini.reachable())} states (from {len(m.reachable())})")
    print("outputs: " + " ".join(_live_outputs(mini) + [DEAD]))
    print(f"wrote {path}")
    return 0


def _support_conflict(candidate, machine):
    """First obstruction met when the candidate tries to track the machine."""
    if machine.output[machine.initial] == DEAD:
        return None
    lab = {candidate.initial: machine.output[machine.initial]}
    start = (candidate.initial, machine.initial)
    seen = {start}
    queue = [start]
    while queue:
        c, s = queue.pop(0)
        for y in sorted(machine.alphabet, key=str):
            ns = machine.step[(s, y)]
            want = machine.output[ns]
            if want == DEAD:
                continue
            nc = candidate.step(c, y)
            if nc is None:
                return f"candidate state {c!r} has no move for observation {y!r}"
            if nc in lab and lab[nc] != want:
                return (
                    f"candidate state {nc!r} cannot be distinguished: it would "
                    f"have to output both {lab[nc]!r} and {want!r}"
                )
            lab[nc] = want
            if (nc, ns) not in seen:
                seen.add((nc, ns))
                queue.append((nc, ns))
    return None


def _cmd_supports(args) -> int:
    sc = load_scenario(args.scenario)
    _need(sc, "policy")
    machine = _restriction_machine(sc, args)
    candidate = load_machine(args.candidate).as_transition_system()
    labeling = supports(candidate, machine)
    if labeling is not None:
        print("supports: yes")
        for s in sorted(labeling.domain, key=str):
            print(f"  {s} -> {labeling[s]}")
        return 0
    reason = _support_conflict(candidate, machine)
    print(f"supports: no — {reason or 'no consistent output assignment exists'}")
    return 1


def _cmd_isomorphic(args) -> int:
    sc = load_scenario(args.scenario)
    _need(sc, "policy")
    m = _restriction_machine(sc, args)
    _, mini = minimal_sufficient_refinement(m)
    candidate = load_machine(args.candidate)
    iso = find_isomorphism(mini, candidate)
    if iso is None:
        print("isomorphic: no")
        return 1
    print("isomorphic: yes")
    for s in sorted(iso, key=str):
        print(f"  {s} ~ {iso[s]}")
    return 0


def _cmd_join(args) -> int:
    machines = []
    alphabet = None
    for path in args.scenarios:
        sc = load_scenario(path)
        _need(sc, "policy")
        m = _restriction_machine(sc, args)
        if alphabet is None:
            alphabet = m.alphabet
        elif m.alphabet != alphabet:
            raise CliError("scenarios do not share an observation alphabet")
        machines.append(m)
    joint = multi_policy_minimal(machines)
    path = _emit_machine(args, args.scenarios[0], "join", joint)
    sizes = " + ".join(str(len(m.reachable())) for m in machines)
    print(f"joint minimal: {len(joint.reachable())} states (inputs {sizes})")
    print(f"wrote {path}")
    return 0


def _cmd_feasible(args) -> int:
    sc = load_scenario(args.scenario)
    _need(sc, "task")
    machine = find_feasible_policy(sc.external, _task(sc, args))
    if machine is None:
        print("feasible: no")
        return 1
    path = _emit_machine(args, args.scenario, "feasible", machine)
    print(f"feasible: yes — machine with {len(machine.reachable())} states")
    print(f"wrote {path}")
    return 0


def _extract(sc: Scenario, args):
    _need(sc, "policy")
    _need(sc, "task")
    return extract_state_policy(sc.external, sc.policy, _task(sc, args))


def _cmd_extract_pix(args) -> int:
    sc = load_scenario(args.scenario)
    pix = _extract(sc, args)
    if pix is None:
        print("extract-pix: no — the plan is not a function of the current state")
        return 1
    print("extract-pix: yes")
    for x in sorted(pix.domain, key=str):
        print(f"  {x} -> {pix.action_of[x]}")
    return 0


def _cmd_sensor_check(args) -> int:
    sc = load_scenario(args.scenario)
    pix = _extract(sc, args)
    if pix is None:
        print("sensor-check: no — no state policy to check against")
        return 1
    if sensor_sufficient_for_reactive(sc.external.sensor, pix):
        print("sensor-check: yes — the sensor pins down the action")
        return 0
    sensor = sc.external.sensor
    witness = ""
    states = sorted(pix.domain, key=str)
    for i, a in enumerate(states):
        for b in states[i + 1 :]:
            if sensor[a] == sensor[b] and pix.action_of[a] != pix.action_of[b]:
                witness = (
                    f" — states {a} and {b} read the same ({sensor[a]}) but need "
                    f"{pix.action_of[a]} vs {pix.action_of[b]}"
                )
                break
        if witness:
            break
    print(f"sensor-check: no{witness}")
    return 1


def _cmd_minimal_sensor(args) -> int:
    sc = load_scenario(args.scenario)
    pix = _extract(sc, args)
    if pix is None:
        print("minimal-sensor: no — no state policy to refine toward")
        return 1
    blocks = minimal_reactive_sensor(pix).blocks()
    print(f"minimal sensor: {len(blocks)} blocks")
    for label in sorted(blocks, key=str):
        print(f"  {label}: " + " ".join(sorted(blocks[label], key=str)))
    return 0


def _cmd_reactive_exists(args) -> int:
    sc = load_scenario(args.scenario)
    _need(sc, "task")
    budget = args.samples if args.samples is not None else 1_000_000
    if reactive_policy_exists(sc.external, _task(sc, args), budget=budget):
        print("reactive-exists: yes")
        return 0
    print("reactive-exists: no")
    return 1


# ---------------------------------------------------------------------------
# Verbs over polygons.


def _cmd_gaps(args) -> int:
    poly = load_polygon(args.polygon)
    obs = gap_observation(_parse_point(args.at), poly)
    print(f"gaps: {len(obs)}")
    if len(obs):
        print("tokens: " + " ".join(g.token for g in obs.gaps))
    return 0


def _cmd_spt(args) -> int:
    poly = load_polygon(args.polygon)
    length, path = shortest_path(_parse_point(args.at), args.goal, poly)
    print(f"length: {length:.9f}")
    print("path: " + (" ".join(str(v) for v in path) if path else "(already there)"))
    return 0


def _cmd_events(args) -> int:
    poly = load_polygon(args.polygon)
    pts = _parse_path(args.path)
    x0, y0, x1, y1 = poly.bbox
    step = args.step if args.step is not None else 0.02 * min(x1 - x0, y1 - y0)
    events = event_trace(pts, poly, step, tol=args.tol)
    print(f"events: {len(events)}")
    for ev in events:
        print(f"  t={ev.t:.8f} {ev.kind} ({len(ev.tokens)} gap)")
    return 0


def _cmd_gnt_run(args) -> int:
    poly = load_polygon(args.polygon)
    kwargs = {}
    if args.samples is not None:
        kwargs["extra_starts"] = args.samples
    if args.seed is not None:
        kwargs["seed"] = args.seed
    report = navigation_report(poly, **kwargs)
    for g in sorted(report.supported):
        verdict = "supported" if report.supported[g] else "NOT SUPPORTED"
        print(f"goal {g}: {verdict}")
    print(f"gap-tree machine states: {report.gnt_states}")
    print(f"joint minimal states:    {report.joint_states}")
    if args.dot:
        dot_path = _out_path(args, args.polygon, "gnt.dot")
        _write_atomic(dot_path, machine_to_dot(report.gnt))
        print(f"wrote {dot_path}")
    print("verdict: " + ("minimal" if report.ok else "mismatch"))
    return 0 if report.ok else 1


def _cmd_reactive_counterexample(args) -> int:
    poly = load_polygon(args.polygon)
    samples = args.samples if args.samples is not None else 10_000
    seed = args.seed if args.seed is not None else 0
    pair = reactive_counterexample(poly, args.goal, samples=samples, seed=seed)
    if pair is None:
        print("counterexample: none found within the sample budget")
        return 1
    (ax, ay), (bx, by) = pair
    print("counterexample: yes")
    print(f"  x  = {ax:.9f},{ay:.9f}")
    print(f"  x' = {bx:.9f},{by:.9f}")
    return 0


# ---------------------------------------------------------------------------
# Argument wiring.


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="itsmin",
        description="Minimal feedback filters: restriction, minimization, "
        "reactive checks, and gap-sensor navigation.",
    )
    sub = top.add_subparsers(dest="verb", required=True)

    def scn(p, **flags):
        p.add_argument("scenario", help="scenario file (.scn)")
        _common(p, **flags)

    def _common(p, depth=False, horizon=False, samples=False, seed=False, out=False):
        if depth:
            p.add_argument("--depth", type=int, default=None,
                           help="history depth bound for table policies")
        if horizon:
            p.add_argument("--horizon", type=int, default=None,
                           help="override the task horizon")
        if samples:
            p.add_argument("--samples", type=int, default=None,
                           help="sample / search budget")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="sampling seed")
        if out:
            p.add_argument("--out-dir", default=None, help="directory for artifact files")
            p.add_argument("--dot", action="store_true", help="also write DOT files")

    p = sub.add_parser("restrict", help="plan + plant -> observation machine")
    scn(p, depth=True, out=True)
    p.set_defaults(func=_cmd_restrict)

    p = sub.add_parser("minimize", help="restriction -> minimal sufficient machine")
    scn(p, depth=True, out=True)
    p.set_defaults(func=_cmd_minimize)

    p = sub.add_parser("supports", help="can a candidate structure carry the plan?")
    scn(p, depth=True)
    p.add_argument("--candidate", required=True, help="machine file (.its)")
    p.set_defaults(func=_cmd_supports)

    p = sub.add_parser("isomorphic", help="minimized machine vs a candidate machine")
    scn(p, depth=True)
    p.add_argument("--candidate", required=True, help="machine file (.its)")
    p.set_defaults(func=_cmd_isomorphic)

    p = sub.add_parser("join", help="smallest machine carrying several plans")
    p.add_argument("scenarios", nargs="+", help="scenario files sharing observations")
    _common(p, depth=True, out=True)
    p.set_defaults(func=_cmd_join)

    p = sub.add_parser("feasible", help="search for a task-accomplishing machine")
    scn(p, horizon=True, out=True)
    p.set_defaults(func=_cmd_feasible)

    p = sub.add_parser("extract-pix", help="read a per-state policy off the plan")
    scn(p, depth=True, horizon=True)
    p.set_defaults(func=_cmd_extract_pix)

    p = sub.add_parser("sensor-check", help="is the sensor enough to act reactively?")
    scn(p, depth=True, horizon=True)
    p.set_defaults(func=_cmd_sensor_check)

    p = sub.add_parser("minimal-sensor", help="coarsest sensor for the extracted policy")
    scn(p, depth=True, horizon=True)
    p.set_defaults(func=_cmd_minimal_sensor)

    p = sub.add_parser("reactive-exists", help="does any memoryless policy work?")
    scn(p, horizon=True, samples=True)
    p.set_defaults(func=_cmd_reactive_exists)

    def poly(p, **flags):
        p.add_argument("polygon", help="polygon file (.poly: one 'x y' per line, CCW)")
        _common(p, **flags)

    p = sub.add_parser("gaps", help="gap observation at a point")
    poly(p)
    p.add_argument("--at", required=True, help="query point 'x,y'")
    p.set_defaults(func=_cmd_gaps)

    p = sub.add_parser("spt", help="shortest path to a goal vertex")
    poly(p)
    p.add_argument("--goal", type=int, required=True, help="goal vertex id")
    p.add_argument("--at", required=True, help="start point 'x,y'")
    p.set_defaults(func=_cmd_spt)

    p = sub.add_parser("events", help="critical gap events along a path")
    poly(p)
    p.add_argument("--path", required=True, help="polyline 'x,y x,y ...'")
    p.add_argument("--step", type=float, default=None, help="sampling step length")
    p.add_argument("--tol", type=float, default=1e-6, help="event location tolerance")
    p.set_defaults(func=_cmd_events)

    p = sub.add_parser("gnt-run", help="gap-tree navigation support report")
    poly(p, samples=True, seed=True, out=True)
    p.set_defaults(func=_cmd_gnt_run)

    p = sub.add_parser(
        "reactive-counterexample",
        help="two points with equal gap views needing different moves",
    )
    poly(p, samples=True, seed=True)
    p.add_argument("--goal", type=int, required=True, help="goal vertex id")
    p.set_defaults(func=_cmd_reactive_counterexample)

    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ItsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
