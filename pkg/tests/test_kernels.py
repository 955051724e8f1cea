"""Agreement tests for the array kernels: numba loops vs numpy, plus a
pure-python reference on instances small enough to exhaust by hand."""

import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from itsmin._jit import HAS_JIT
from itsmin.geo.kernels import (
    gap_mask_batch,
    gap_mask_batch_jit,
    gap_mask_batch_numpy,
    point_in_polygon_batch,
    point_in_polygon_batch_jit,
    point_in_polygon_batch_numpy,
    polygon_arrays,
)
from itsmin.geo.gaps import gap_observation
from itsmin.geo.polygon import load_polygon
from itsmin.kernels import (
    saturated_reactive_all_fail,
    saturated_reactive_all_fail_jit,
    saturated_reactive_all_fail_numpy,
    set_partitions_array,
    reactive_feasibility_scan,
    reactive_feasibility_scan_jit,
    reactive_feasibility_scan_numpy,
)

from helpers import bundled

needs_jit = pytest.mark.skipif(not HAS_JIT, reason="numba backend not active")

###################################################################################################
# Random batches for the sweep kernels
###################################################################################################


def _random_batch(rng, S, n, m):
    fs = rng.integers(0, n, size=(S, n, m)).astype(np.int64)
    parts = set_partitions_array(n)
    hs = parts[rng.integers(0, parts.shape[0], size=S)]
    goals = rng.integers(0, 2, size=(S, n)).astype(bool)
    return fs, hs, goals


@needs_jit
def test_feasibility_scan_jit_matches_numpy_on_random_batches():
    rng = np.random.default_rng(7)
    for n, m in [(2, 2), (3, 2), (4, 2), (3, 3)]:
        fs, hs, goals = _random_batch(rng, 200, n, m)
        a = reactive_feasibility_scan_jit(fs, hs, goals)
        b = reactive_feasibility_scan_numpy(fs, hs, goals)
        assert np.array_equal(a, b)


@needs_jit
def test_allfail_jit_matches_numpy_on_random_batches():
    rng = np.random.default_rng(8)
    for n, m in [(2, 2), (3, 2), (4, 2)]:
        fs, _, goals = _random_batch(rng, 120, n, m)
        parts = set_partitions_array(n)
        a = saturated_reactive_all_fail_jit(fs, goals, parts)
        b = saturated_reactive_all_fail_numpy(fs, goals, parts)
        assert np.array_equal(a, b)


###################################################################################################
# Pure-python reference on exhaustive tiny instances
###################################################################################################


def _simulate(fs_row, policy_of_state, goal_row, n):
    """hit-the-goal check for every start, n+1 goal tests."""
    for x0 in range(n):
        x = x0
        hit = False
        for _ in range(n + 1):
            if goal_row[x]:
                hit = True
                break
            x = fs_row[x][policy_of_state(x)]
        if not hit:
            return False
    return True


def _reference_row(fs_row, hs_row, goal_row, n, m):
    yc = max(hs_row) + 1
    lhs = any(
        _simulate(fs_row, lambda x, p=p: p[hs_row[x]], goal_row, n)
        for p in itertools.product(range(m), repeat=yc)
    )
    rhs = False
    any_pix = False
    for p in itertools.product(range(m), repeat=n):
        if not _simulate(fs_row, lambda x, p=p: p[x], goal_row, n):
            continue
        any_pix = True
        if all(
            p[i] == p[j]
            for i in range(n)
            for j in range(i + 1, n)
            if hs_row[i] == hs_row[j]
        ):
            rhs = True
    return int(lhs), int(rhs), int(any_pix)


def test_feasibility_scan_matches_pure_python_exhaustively_for_two_states():
    n, m = 2, 2
    dynamics = list(itertools.product(range(n), repeat=n * m))
    fs = np.array([[row[i * m : (i + 1) * m] for i in range(n)] for row in dynamics],
                  np.int64)
    for hs_row in [(0, 0), (0, 1)]:
        for goal_row in [(1, 0), (0, 1), (1, 1)]:
            S = fs.shape[0]
            hs = np.tile(np.array(hs_row, np.int64), (S, 1))
            goals = np.tile(np.array(goal_row, bool), (S, 1))
            out = reactive_feasibility_scan(fs, hs, goals)
            for si in range(S):
                expect = _reference_row(fs[si].tolist(), hs_row, goal_row, n, m)
                assert tuple(int(v) for v in out[si]) == expect


def test_allfail_matches_identity_sensor_logic():
    # The identity partition is always goal-saturated, so "all saturated
    # sensors fail" is exactly "no feasible state policy exists".
    rng = np.random.default_rng(9)
    n, m = 3, 2
    fs = rng.integers(0, n, size=(150, n, m)).astype(np.int64)
    goals = rng.integers(0, 2, size=(150, n)).astype(bool)
    parts = set_partitions_array(n)
    hs_identity = np.tile(np.arange(n, dtype=np.int64), (150, 1))
    any_pix = reactive_feasibility_scan(fs, hs_identity, goals)[:, 2]
    allfail = saturated_reactive_all_fail(fs, goals, parts)
    assert np.array_equal(allfail, 1 - any_pix)


###################################################################################################
# Set partitions
###################################################################################################


def test_set_partition_counts_are_bell_numbers():
    for n, bell in [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)]:
        parts = set_partitions_array(n)
        assert parts.shape == (bell, n)
        assert len({tuple(r) for r in parts.tolist()}) == bell


def test_set_partitions_are_restricted_growth_strings():
    for row in set_partitions_array(4).tolist():
        assert row[0] == 0
        for i in range(1, len(row)):
            assert row[i] <= max(row[:i]) + 1


###################################################################################################
# Geometry kernels
###################################################################################################


@needs_jit
def test_point_in_polygon_jit_matches_numpy():
    poly = load_polygon(bundled("stairs.poly"))
    vx, vy, _ = polygon_arrays(poly)
    rng = np.random.default_rng(10)
    x0, y0, x1, y1 = poly.bbox
    px = rng.uniform(x0 - 0.5, x1 + 0.5, 2000)
    py = rng.uniform(y0 - 0.5, y1 + 0.5, 2000)
    assert np.array_equal(
        point_in_polygon_batch_jit(px, py, vx, vy),
        point_in_polygon_batch_numpy(px, py, vx, vy),
    )


def test_point_in_polygon_matches_exact_classifier():
    poly = load_polygon(bundled("tetro.poly"))
    vx, vy, _ = polygon_arrays(poly)
    rng = np.random.default_rng(11)
    x0, y0, x1, y1 = poly.bbox
    pts = []
    want = []
    while len(pts) < 300:
        p = (rng.uniform(x0 - 0.3, x1 + 0.3), rng.uniform(y0 - 0.3, y1 + 0.3))
        where = poly.contains(p, eps=1e-7)
        if where == "boundary":
            continue  # the float kernel owes no answer on the fence
        pts.append(p)
        want.append(1 if where == "in" else 0)
    px = np.array([p[0] for p in pts])
    py = np.array([p[1] for p in pts])
    got = point_in_polygon_batch(px, py, vx, vy)
    assert got.tolist() == want


@needs_jit
def test_gap_mask_jit_matches_numpy():
    for name in ["lshape.poly", "tetro.poly", "stairs.poly", "spike.poly"]:
        poly = load_polygon(bundled(name))
        vx, vy, reflex = polygon_arrays(poly)
        rng = np.random.default_rng(12)
        x0, y0, x1, y1 = poly.bbox
        px = rng.uniform(x0, x1, 1500)
        py = rng.uniform(y0, y1, 1500)
        assert np.array_equal(
            gap_mask_batch_jit(px, py, vx, vy, reflex),
            gap_mask_batch_numpy(px, py, vx, vy, reflex),
        )


def test_gap_mask_matches_gap_sensor_at_fixed_points():
    poly = load_polygon(bundled("lshape.poly"))
    vx, vy, reflex = polygon_arrays(poly)
    for p in [(2.0, 0.5), (0.5, 0.5), (0.45, 2.0), (0.2, 1.5), (1.8, 0.3)]:
        row = gap_mask_batch(
            np.array([p[0]]), np.array([p[1]]), vx, vy, reflex
        )[0]
        got = {int(reflex[i]) for i in range(reflex.size) if row[i]}
        want = set(gap_observation(p, poly).occluders)
        assert got == want


###################################################################################################
# Backend selection
###################################################################################################


def test_env_flag_forces_the_numpy_path():
    code = (
        "import itsmin.kernels as k, itsmin.geo.kernels as g\n"
        "assert k.reactive_feasibility_scan is k.reactive_feasibility_scan_numpy\n"
        "assert k.reactive_feasibility_scan_jit is None\n"
        "assert g.gap_mask_batch is g.gap_mask_batch_numpy\n"
        "import itsmin._jit\n"
        "assert itsmin._jit.active_path() == 'numpy'\n"
    )
    env = dict(os.environ, ITSMIN_PURE_NUMPY="1")
    subprocess.run([sys.executable, "-c", code], check=True, env=env)


def test_default_path_uses_numba_when_available():
    if not HAS_JIT:
        pytest.skip("numba backend not active in this interpreter")
    assert reactive_feasibility_scan is reactive_feasibility_scan_jit
    assert saturated_reactive_all_fail is saturated_reactive_all_fail_jit
    assert point_in_polygon_batch is point_in_polygon_batch_jit
    assert gap_mask_batch is gap_mask_batch_jit
