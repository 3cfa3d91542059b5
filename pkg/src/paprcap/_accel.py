"""Numba switch.

Set ``PAPRCAP_NUMBA=0`` in the environment to run every hot kernel through its
pure-numpy path. Numba is also skipped silently when it cannot be imported.
"""
import os

_flag = os.environ.get("PAPRCAP_NUMBA", "1").strip().lower()
_requested = _flag not in ("0", "false", "no", "off")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = bool(_requested and _numba is not None)
HAVE_NUMBA = _numba is not None


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    Kernels are always compiled when numba is present so the benchmark can
    compare both paths; ``USE_NUMBA`` only controls which path callers get.
    """
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    return _numba.njit(*args, **kwargs)
