"""Numba switch.

Set ``JACOBS_LADDER_NUMBA=0`` to force the pure-numpy kernels.  When numba is
not importable the numpy kernels are used regardless of the flag.
"""

import os

_FLAG = os.environ.get("JACOBS_LADDER_NUMBA", "1").strip().lower()

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is the optional "fast" extra
    numba = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in {"0", "false", "no", "off"}


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    kwargs.setdefault("cache", True)
    if not NUMBA_AVAILABLE:
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)


__all__ = ["NUMBA_AVAILABLE", "USE_NUMBA", "njit"]
