"""Numba/numpy backend selection.

Hot curvature kernels have two implementations: numba @njit loops and a pure
numpy einsum path.  The env flag IBG_NUMBA selects between them ("0"/"off"
disables numba).  Non-float64 dtypes (longdouble FD pipelines, complex data)
always take the numpy path.  IBG_THREADS caps worker threads for grid sweeps.
"""

import os

import numpy as np

_FLAG = os.environ.get("IBG_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _FLAG not in ("0", "off", "false", "no")

try:  # pragma: no cover - exercised implicitly by imports
    if NUMBA_REQUESTED:
        from numba import njit

        NUMBA_AVAILABLE = True
    else:
        raise ImportError
except ImportError:  # fall back to identity decorator
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def use_numba(*arrays) -> bool:
    """True when the numba path applies to these operands."""
    if not NUMBA_AVAILABLE:
        return False
    return all(a.dtype == np.float64 for a in arrays)


def thread_count() -> int:
    raw = os.environ.get("IBG_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
