"""Numba shim.

Set ``QASEDA_DISABLE_JIT=1`` to force the pure-numpy kernels, e.g. for
debugging under the interpreter or on platforms without numba.
"""

import os

JIT_REQUESTED = os.environ.get("QASEDA_DISABLE_JIT", "0").lower() not in ("1", "true", "yes")

try:
    from numba import njit as _numba_njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    NUMBA_AVAILABLE = False

JIT_ENABLED = JIT_REQUESTED and NUMBA_AVAILABLE


def njit(*args, **kwargs):
    """``numba.njit`` with ``cache=True`` by default; identity when numba is missing."""
    if not NUMBA_AVAILABLE:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _numba_njit(*args, **kwargs)
