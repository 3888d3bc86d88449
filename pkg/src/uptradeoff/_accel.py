"""Backend selection for the numeric kernels.

Kernels are compiled with numba when it is importable and the
``UPT_NO_NUMBA`` environment variable is unset (or ``0``).  Setting
``UPT_NO_NUMBA=1`` forces the vectorised numpy fallbacks, which is handy
for debugging and for the benchmark in ``benchmarks/``.
"""

import os

_flag = os.environ.get("UPT_NO_NUMBA", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _disabled


def njit(func):
    """``numba.njit`` with caching, or the identity when numba is absent."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend():
    return "numba" if USE_NUMBA else "numpy"
