"""Array kernels for exhaustive sweeps over small plants.

Plants are encoded as integer arrays so millions of them can be scanned
without touching the object-level API:

* ``fs``    -- int64[S, n, m], successor state index under each action,
* ``hs``    -- int64[S, n], observation index emitted by each state,
* ``goals`` -- bool[S, n], membership of each state in the goal set.

Observation indices must be contiguous from 0 per system.  A trajectory
that has not reached the goal within n moves never will (it is already
periodic), so every check runs exactly n+1 goal tests.

Each scan exists as plain loops (numba-compiled when available) and as a
numpy-vectorized equivalent; `itsmin._jit` picks which one backs the
public name.  Both are exported for the agreement tests and benchmarks.
"""

import numpy as np

from ._jit import HAS_JIT, njit

__all__ = [
    "reactive_feasibility_scan",
    "reactive_feasibility_scan_numpy",
    "reactive_feasibility_scan_jit",
    "saturated_reactive_all_fail",
    "saturated_reactive_all_fail_numpy",
    "saturated_reactive_all_fail_jit",
    "set_partitions_array",
]


def _reactive_feasibility_loops(fs, hs, goals):
    """Per system: [exists reactive policy, exists sensor-constant feasible
    state policy, exists any feasible state policy], as uint8[S, 3]."""
    S, n, m = fs.shape
    out = np.zeros((S, 3), np.uint8)
    for si in range(S):
        yc = 0
        for x in range(n):
            if hs[si, x] + 1 > yc:
                yc = hs[si, x] + 1

        # (0) exhaust observation policies directly.
        lhs = False
        for code in range(m**yc):
            ok_all = True
            for x0 in range(n):
                x = x0
                hit = False
                for _ in range(n + 1):
                    if goals[si, x]:
                        hit = True
                        break
                    u = (code // m ** hs[si, x]) % m
                    x = fs[si, x, u]
                if not hit:
                    ok_all = False
                    break
            if ok_all:
                lhs = True
                break

        # (1)+(2) exhaust state policies; flag the ones constant on
        # sensor blocks separately.
        any_pix = False
        rhs = False
        for code in range(m**n):
            ok_all = True
            for x0 in range(n):
                x = x0
                hit = False
                for _ in range(n + 1):
                    if goals[si, x]:
                        hit = True
                        break
                    u = (code // m**x) % m
                    x = fs[si, x, u]
                if not hit:
                    ok_all = False
                    break
            if ok_all:
                any_pix = True
                const = True
                for x1 in range(n):
                    if not const:
                        break
                    for x2 in range(x1 + 1, n):
                        if hs[si, x1] == hs[si, x2]:
                            u1 = (code // m**x1) % m
                            u2 = (code // m**x2) % m
                            if u1 != u2:
                                const = False
                                break
                if const:
                    rhs = True
        out[si, 0] = 1 if lhs else 0
        out[si, 1] = 1 if rhs else 0
        out[si, 2] = 1 if any_pix else 0
    return out


def reactive_feasibility_scan_numpy(fs, hs, goals):
    """Vectorized-over-systems equivalent of the loop scan."""
    fs = np.ascontiguousarray(fs, np.int64)
    hs = np.ascontiguousarray(hs, np.int64)
    goals = np.ascontiguousarray(goals, bool)
    S, n, m = fs.shape
    out = np.zeros((S, 3), np.uint8)
    if S == 0:
        return out
    sidx = np.arange(S)[:, None]
    starts = np.broadcast_to(np.arange(n), (S, n))

    # Observation policies.  Systems with fewer observation values than
    # the sweep-wide maximum simply ignore the unused digits; existence
    # is unaffected by the duplicated candidates.
    max_yc = int(hs.max()) + 1
    lhs = np.zeros(S, bool)
    for code in range(m**max_yc):
        piy = np.array([(code // m**k) % m for k in range(max_yc)], np.int64)
        x = starts.copy()
        hit = goals[sidx, x]
        for _ in range(n):
            x = fs[sidx, x, piy[hs[sidx, x]]]
            hit = hit | goals[sidx, x]
        lhs |= hit.all(axis=1)

    rhs = np.zeros(S, bool)
    any_pix = np.zeros(S, bool)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    same_h = np.stack([hs[:, a] == hs[:, b] for a, b in pairs], axis=1)
    for code in range(m**n):
        pol = np.array([(code // m**k) % m for k in range(n)], np.int64)
        x = starts.copy()
        hit = goals[sidx, x]
        for _ in range(n):
            x = fs[sidx, x, pol[x]]
            hit = hit | goals[sidx, x]
        feas = hit.all(axis=1)
        any_pix |= feas
        differ = np.array([pol[a] != pol[b] for a, b in pairs], bool)
        const = ~(same_h & differ[None, :]).any(axis=1)
        rhs |= feas & const
    out[:, 0] = lhs
    out[:, 1] = rhs
    out[:, 2] = any_pix
    return out


def _allfail_scan_loops(fs, goals, partitions):
    """Per system: 1 iff *no* goal-saturated sensor in ``partitions``
    admits a winning observation policy."""
    S, n, m = fs.shape
    P = partitions.shape[0]
    out = np.ones(S, np.uint8)
    for si in range(S):
        ok = True
        for pi in range(P):
            sat = True
            for x1 in range(n):
                if not sat:
                    break
                for x2 in range(x1 + 1, n):
                    if partitions[pi, x1] == partitions[pi, x2] and goals[si, x1] != goals[si, x2]:
                        sat = False
                        break
            if not sat:
                continue
            yc = 0
            for x in range(n):
                if partitions[pi, x] + 1 > yc:
                    yc = partitions[pi, x] + 1
            for code in range(m**yc):
                ok_all = True
                for x0 in range(n):
                    x = x0
                    hit = False
                    for _ in range(n + 1):
                        if goals[si, x]:
                            hit = True
                            break
                        u = (code // m ** partitions[pi, x]) % m
                        x = fs[si, x, u]
                    if not hit:
                        ok_all = False
                        break
                if ok_all:
                    ok = False
                    break
            if not ok:
                break
        out[si] = 1 if ok else 0
    return out


def saturated_reactive_all_fail_numpy(fs, goals, partitions):
    fs = np.ascontiguousarray(fs, np.int64)
    goals = np.ascontiguousarray(goals, bool)
    partitions = np.ascontiguousarray(partitions, np.int64)
    S, n, m = fs.shape
    if S == 0:
        return np.ones(0, np.uint8)
    sidx = np.arange(S)[:, None]
    starts = np.broadcast_to(np.arange(n), (S, n))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    works = np.zeros(S, bool)
    for part in partitions:
        same = [(a, b) for a, b in pairs if part[a] == part[b]]
        if same:
            viol = np.stack([goals[:, a] != goals[:, b] for a, b in same], axis=1)
            sat = ~viol.any(axis=1)
        else:
            sat = np.ones(S, bool)
        if not sat.any():
            continue
        yc = int(part.max()) + 1
        exists = np.zeros(S, bool)
        for code in range(m**yc):
            piy = np.array([(code // m**k) % m for k in range(yc)], np.int64)
            x = starts.copy()
            hit = goals[sidx, x]
            for _ in range(n):
                x = fs[sidx, x, piy[part[x]]]
                hit = hit | goals[sidx, x]
            exists |= hit.all(axis=1)
        works |= sat & exists
    return (~works).astype(np.uint8)


def set_partitions_array(n):
    """All partitions of {0,..,n-1} as restricted-growth rows, int64[P, n]."""
    rows = []

    def grow(prefix, top):
        if len(prefix) == n:
            rows.append(prefix)
            return
        for b in range(top + 2):
            grow(prefix + [b], max(top, b))

    grow([0], 0)
    return np.array(rows, np.int64)


if HAS_JIT:
    reactive_feasibility_scan_jit = njit(cache=True)(_reactive_feasibility_loops)
    saturated_reactive_all_fail_jit = njit(cache=True)(_allfail_scan_loops)
    reactive_feasibility_scan = reactive_feasibility_scan_jit
    saturated_reactive_all_fail = saturated_reactive_all_fail_jit
else:  # pragma: no cover - exercised via the env flag
    reactive_feasibility_scan_jit = None
    saturated_reactive_all_fail_jit = None
    reactive_feasibility_scan = reactive_feasibility_scan_numpy
    saturated_reactive_all_fail = saturated_reactive_all_fail_numpy
