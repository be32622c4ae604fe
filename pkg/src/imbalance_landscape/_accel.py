"""Optional numba acceleration.

Set ``IMBALANCE_LANDSCAPE_DISABLE_NUMBA=1`` before import to force the
pure-numpy code paths. If numba is not importable the fallback is used
automatically.
"""

import os

_DISABLED = os.environ.get("IMBALANCE_LANDSCAPE_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

try:
    if _DISABLED:
        raise ImportError("numba disabled by environment")
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:
    _njit = None
    HAS_NUMBA = False


def njit(func):
    """Compile ``func`` in nopython mode when numba is available."""
    if _njit is None:
        return func
    return _njit(cache=True, nogil=True)(func)
