"""Kernel acceleration switch.

Hot loops are written once in numba-compatible Python.  When numba is
importable and ``WEAKTIES_DISABLE_NUMBA`` is unset (or ``0``), they are
compiled with ``numba.njit``; otherwise the decorator is the identity and
modules fall back to their numpy code paths.  The flag is read once at
import time.
"""
import os

_FLAG = os.environ.get("WEAKTIES_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

USE_NUMBA = numba is not None and _FLAG in ("", "0", "false", "no")


def njit(fn):
    """Compile ``fn`` in nopython mode when acceleration is enabled."""
    if not USE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend():
    return "numba" if USE_NUMBA else "numpy"
