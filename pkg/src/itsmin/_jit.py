"""Kernel dispatch: numba-compiled loops or pure-numpy fallbacks.

Hot inner loops ship in two functionally identical flavors: a loop version
compiled with numba's ``@njit`` and a vectorized numpy version.  Which one
backs the public kernel names is decided once at import time:

* set ``ITSMIN_PURE_NUMPY=1`` to force the numpy path;
* when numba is not installed the numpy path is used automatically.

``benchmarks/bench_kernels.py`` times both paths side by side, and the
test suite asserts they produce identical outputs.
"""

import os

ENV_FLAG = "ITSMIN_PURE_NUMPY"


def _jit_wanted() -> bool:
    if os.environ.get(ENV_FLAG, "").strip() not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


HAS_JIT = _jit_wanted()

if HAS_JIT:
    from numba import njit
else:  # pragma: no cover - exercised via the env flag
    def njit(*args, **kwargs):
        """No-op decorator stand-in when numba is off."""
        if args and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


def active_path() -> str:
    return "numba" if HAS_JIT else "numpy"
