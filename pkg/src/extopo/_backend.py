"""Kernel backend selection.

Hot inner loops are written once, in nopython-compatible Python, and are
JIT-compiled with numba when it is importable and the ``EXTOPO_NO_NUMBA``
environment variable is unset.  Setting ``EXTOPO_NO_NUMBA=1`` (or numba
being absent) selects the plain interpreted fallback; results are
identical on both paths, only speed differs.
"""

from __future__ import annotations

import os

_DISABLE_VALUES = ("1", "true", "yes", "on")


def _numba_requested() -> bool:
    flag = os.environ.get("EXTOPO_NO_NUMBA", "").strip().lower()
    if flag in _DISABLE_VALUES:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USING_NUMBA = _numba_requested()

## fastmath is deliberately off: the fallback path must produce
## bit-identical floating point results.
JIT_OPTIONS = {"cache": True, "nogil": True}


def maybe_jit(func):
    """Return ``func`` JIT-compiled when the numba backend is active."""
    if USING_NUMBA:
        from numba import njit

        return njit(**JIT_OPTIONS)(func)
    return func


def backend_name() -> str:
    return "numba" if USING_NUMBA else "python"
