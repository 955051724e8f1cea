"""Benchmark the jit-compiled kernels against their pure-numpy twins.

Run from the repository root (or anywhere, with the package installed)::

    python3 benchmarks/bench_kernels.py
    ITSMIN_PURE_NUMPY=1 python3 benchmarks/bench_kernels.py   # numpy only

Each kernel is warmed once per path (the first jit call pays compilation),
then timed as the best of ``--repeat`` runs.
"""

import argparse
import importlib.resources
import time

import numpy as np

from itsmin._jit import HAS_JIT, active_path
from itsmin.geo.kernels import (
    gap_mask_batch_jit,
    gap_mask_batch_numpy,
    point_in_polygon_batch_jit,
    point_in_polygon_batch_numpy,
    polygon_arrays,
)
from itsmin.geo.polygon import load_polygon
from itsmin.kernels import (
    saturated_reactive_all_fail_jit,
    saturated_reactive_all_fail_numpy,
    set_partitions_array,
    reactive_feasibility_scan_jit,
    reactive_feasibility_scan_numpy,
)


def _best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _row(name, numpy_fn, jit_fn, args, repeat):
    numpy_fn(*args)  # warm caches
    t_numpy = _best_of(numpy_fn, args, repeat)
    if jit_fn is None:
        print(f"{name:<28} numpy {t_numpy * 1e3:9.2f} ms      numba      -")
        return
    jit_fn(*args)  # trigger compilation outside the timed region
    t_jit = _best_of(jit_fn, args, repeat)
    print(
        f"{name:<28} numpy {t_numpy * 1e3:9.2f} ms      "
        f"numba {t_jit * 1e3:9.2f} ms      x{t_numpy / t_jit:6.1f}"
    )


def bench_reactive_scan(rng, systems, repeat):
    n, m = 4, 2
    fs = rng.integers(0, n, size=(systems, n, m), dtype=np.int64)
    parts = set_partitions_array(n).astype(np.int64)
    hs = parts[rng.integers(0, len(parts), size=systems)]
    goals = rng.integers(0, 2, size=(systems, n), dtype=np.uint8)
    goals[np.arange(systems), rng.integers(0, n, size=systems)] = 1
    _row(
        f"policy scan ({systems} systems)",
        reactive_feasibility_scan_numpy,
        reactive_feasibility_scan_jit,
        (fs, hs, goals),
        repeat,
    )
    small = systems // 16 or 1
    _row(
        f"all-sensors-fail ({small} systems)",
        saturated_reactive_all_fail_numpy,
        saturated_reactive_all_fail_jit,
        (fs[:small], goals[:small], parts),
        repeat,
    )


def bench_gap_masks(rng, points, repeat):
    poly_path = importlib.resources.files("itsmin").joinpath("data/stairs.poly")
    poly = load_polygon(str(poly_path))
    vx, vy, reflex = polygon_arrays(poly)
    x0, y0, x1, y1 = poly.bbox
    px = rng.uniform(x0, x1, size=points)
    py = rng.uniform(y0, y1, size=points)
    _row(
        f"point containment ({points} pts)",
        point_in_polygon_batch_numpy,
        point_in_polygon_batch_jit,
        (px, py, vx, vy),
        repeat,
    )
    _row(
        f"gap masks ({points} pts)",
        gap_mask_batch_numpy,
        gap_mask_batch_jit,
        (px, py, vx, vy, reflex),
        repeat,
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--systems", type=int, default=50_000,
                    help="batch size for the policy-scan kernels")
    ap.add_argument("--points", type=int, default=200_000,
                    help="batch size for the geometry kernels")
    ap.add_argument("--repeat", type=int, default=3, help="timed runs per kernel")
    args = ap.parse_args()

    print(f"active dispatch path: {active_path()}"
          + ("" if HAS_JIT else "  (jit unavailable or disabled)"))
    rng = np.random.default_rng(0)
    bench_reactive_scan(rng, args.systems, args.repeat)
    bench_gap_masks(rng, args.points, args.repeat)


if __name__ == "__main__":
    main()
