"""Kernel compilation switch.

Hot kernels are written once in numba-compatible numpy and compiled with
``numba.njit`` unless ``MBLOCH_DISABLE_JIT=1`` is set (or numba is missing),
in which case the very same source runs as plain Python/numpy.
"""
import os

USE_NUMBA = os.environ.get("MBLOCH_DISABLE_JIT", "0").strip().lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def kernel(func):
    """Compile ``func`` with numba when enabled, otherwise return it as is."""
    if USE_NUMBA:
        return _njit(cache=True, nogil=True)(func)
    return func


def backend():
    return "numba" if USE_NUMBA else "numpy"
