"""Graphviz DOT rendering for machines and event traces.

Output is deterministic: nodes and edges are emitted in sorted order and
colors are assigned to output tokens by sorted rank, so identical inputs
produce byte-identical files.  The dead sink is always drawn red and the
stand-still output grey.
"""

from typing import Iterable, Optional, Sequence

from .machines import MooreMachine
from .ts import DEAD, NO_ACTION

# Fill colors cycled over non-reserved outputs (colorblind-safe-ish).
_PALETTE = [
    "#aec7e8",  # blue
    "#ffbb78",  # orange
    "#98df8a",  # green
    "#c5b0d5",  # purple
    "#f7b6d2",  # pink
    "#9edae5",  # cyan
    "#dbdb8d",  # olive
    "#c49c94",  # brown
]
_DEAD_COLOR = "#d62728"
_IDLE_COLOR = "#d9d9d9"


def _quote(s) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _color_map(outputs: Iterable) -> dict:
    colors = {}
    plain = sorted({o for o in outputs if o not in (DEAD, NO_ACTION)}, key=str)
    for i, o in enumerate(plain):
        colors[o] = _PALETTE[i % len(_PALETTE)]
    colors[DEAD] = _DEAD_COLOR
    colors[NO_ACTION] = _IDLE_COLOR
    return colors


def machine_to_dot(m: MooreMachine, title: Optional[str] = None) -> str:
    """Render a machine; nodes are colored by output, the dead sink red."""
    states = sorted(m.states, key=str)
    ids = {s: f"n{i}" for i, s in enumerate(states)}
    colors = _color_map(m.output.values())
    lines = ["digraph machine {"]
    if title:
        lines.append(f"  label={_quote(title)};")
        lines.append("  labelloc=t;")
    lines.append("  rankdir=LR;")
    lines.append('  node [style=filled, shape=ellipse, fontname="Helvetica"];')
    lines.append("  __start [shape=point, label=\"\"];")
    for s in states:
        shape = "doublecircle" if s == m.initial else "ellipse"
        label = f"{s}\\n{m.output[s]}"
        lines.append(
            f"  {ids[s]} [label={_quote(label)}, shape={shape}, "
            f"fillcolor={_quote(colors[m.output[s]])}];"
        )
    lines.append(f"  __start -> {ids[m.initial]};")
    # Bundle parallel edges: one arrow per (src, dst) with the symbols joined.
    bundles = {}
    for (s, y), t in m.step.items():
        bundles.setdefault((s, t), []).append(str(y))
    for (s, t) in sorted(bundles, key=lambda st: (str(st[0]), str(st[1]))):
        label = ", ".join(sorted(bundles[(s, t)]))
        lines.append(f"  {ids[s]} -> {ids[t]} [label={_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def trace_to_dot(symbols: Sequence, actions: Sequence = (), title: Optional[str] = None) -> str:
    """Render a trace as a chain: one node per step, edges labeled by symbol.

    When ``actions`` is given (one per symbol), each node after a symbol
    shows the action taken there.
    """
    lines = ["digraph trace {"]
    if title:
        lines.append(f"  label={_quote(title)};")
        lines.append("  labelloc=t;")
    lines.append("  rankdir=LR;")
    lines.append('  node [shape=box, style=rounded, fontname="Helvetica"];')
    lines.append('  t0 [label="start"];')
    for i, sym in enumerate(symbols):
        node_label = str(actions[i]) if i < len(actions) else ""
        lines.append(f"  t{i + 1} [label={_quote(node_label)}];")
        lines.append(f"  t{i} -> t{i + 1} [label={_quote(sym)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
