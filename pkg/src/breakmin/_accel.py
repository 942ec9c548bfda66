"""Backend switch for the hot loops.

Kernels are compiled with numba when it is importable, unless the environment
variable ``BREAKMIN_DISABLE_NUMBA`` is set to a truthy value, in which case the
pure numpy/Python fallback path is used.  The choice is made once at import.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("BREAKMIN_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError
    import numba
except ImportError:
    numba = None

USE_NUMBA: bool = numba is not None
BACKEND: str = "numba" if USE_NUMBA else "numpy"


def jit(func):
    """``numba.njit(cache=True)`` or the identity, depending on the backend."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
