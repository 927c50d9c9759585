"""Numba availability switch.

Set ``HSINTERP_DISABLE_NUMBA=1`` to force the pure-numpy kernels. The flag is
read once at import time.
"""

import os

_FLAG = os.environ.get("HSINTERP_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap
