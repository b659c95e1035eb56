"""Numba acceleration switch.

Hot kernels are written as plain numpy/loop functions and compiled with
``numba.njit`` when available.  Set ``METACHAN_NUMBA=0`` (or ``off``/``false``)
to force the pure-python fallback, e.g. for debugging or benchmarking.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


def _flag_enabled() -> bool:
    val = os.environ.get("METACHAN_NUMBA", "1").strip().lower()
    return val not in ("0", "false", "off", "no")


NUMBA_ENABLED = numba is not None and _flag_enabled()


def maybe_jit(fn):
    """Compile ``fn`` with njit if numba is enabled, else return it unchanged."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(fn)
    return fn
