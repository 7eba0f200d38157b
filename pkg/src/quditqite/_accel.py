"""Kernel backend selection.

Set ``QUDITQITE_NO_NUMBA=1`` to force the pure-numpy path. When numba is
missing the numpy path is used automatically.
"""
import os

_DISABLED = os.environ.get("QUDITQITE_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _njit = None
    HAVE_NUMBA = False


def njit(func):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if HAVE_NUMBA:
        return _njit(cache=True)(func)
    return func


def backend_name():
    return "numba" if HAVE_NUMBA else "numpy"
