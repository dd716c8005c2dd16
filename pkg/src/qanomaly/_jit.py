"""Optional numba acceleration.

Kernels are written once in plain Python on scalars and numpy arrays and are
compiled with :func:`numba.njit` when numba is importable. Setting the
environment variable ``QANOMALY_DISABLE_NUMBA=1`` (before import) forces the
uncompiled path, which runs the very same source under CPython.
"""
import os

_flag = os.environ.get("QANOMALY_DISABLE_NUMBA", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(func):
        return func

    return wrap


BACKEND = "numba" if HAS_NUMBA else "python"
