"""Backend selection for the hot lattice kernels.

Two environment variables are read once at import time:

``HLBM_NUMBA``
    ``0``/``false``/``off`` forces the pure-numpy path even when numba is
    importable.  Anything else (or unset) uses numba when available.
``HLBM_THREADS``
    ``0`` (default) runs the serial, bitwise-deterministic kernels.  A
    positive value selects the ``parallel=True`` kernels and caps numba's
    thread pool at that many threads.
"""

import logging
import os

logger = logging.getLogger(__name__)

_OFF = {"0", "false", "off", "no"}

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    NUMBA_AVAILABLE = False


def numba_requested() -> bool:
    return os.environ.get("HLBM_NUMBA", "1").strip().lower() not in _OFF


def thread_count() -> int:
    raw = os.environ.get("HLBM_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HLBM_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("HLBM_THREADS must be >= 0")
    return n


USE_NUMBA = NUMBA_AVAILABLE and numba_requested()
THREADS = thread_count()

if USE_NUMBA and THREADS > 0:
    numba.set_num_threads(min(THREADS, numba.config.NUMBA_NUM_THREADS))


def backend_name() -> str:
    if not USE_NUMBA:
        return "numpy"
    return "numba-parallel" if THREADS > 0 else "numba"


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or an identity decorator without numba."""
    if not NUMBA_AVAILABLE:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


# numba only recognises its own prange object inside compiled code
prange = numba.prange if NUMBA_AVAILABLE else range
