"""Kernel backend selection.

Hot loops are compiled with numba when it is importable.  Setting the
environment variable ``SUBLAB_DISABLE_NUMBA=1`` (read at import time) forces the
vectorised pure-numpy path instead; both paths consume the random streams in
the same order.
"""
import os
import warnings

_flag = os.environ.get("SUBLAB_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _flag not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
# numba falls back to another threading layer when the system TBB is too old
warnings.filterwarnings("ignore", message="The TBB threading layer requires TBB")
USE_NUMBA = HAVE_NUMBA and not DISABLED_BY_ENV


def worker_count():
    """Worker count from ``SUBLAB_WORKERS`` (0 or unset means library default)."""
    raw = os.environ.get("SUBLAB_WORKERS", "").strip()
    if not raw:
        return 0
    try:
        n = int(raw)
    except ValueError:
        return 0
    return max(n, 0)


def njit(*args, **kwargs):
    """``numba.njit`` when numba is available, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
