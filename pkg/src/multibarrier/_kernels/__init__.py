"""Kernel backend selection.

The numba backend is used when numba imports cleanly, unless the environment
variable ``MULTIBARRIER_DISABLE_NUMBA`` is set to a non-empty value other
than ``0``.
"""
import os

from . import _numpy


def _numba_requested():
    flag = os.environ.get("MULTIBARRIER_DISABLE_NUMBA", "")
    return flag in ("", "0")


BACKEND = "numpy"
propagate_regions = _numpy.propagate_regions

if _numba_requested():
    try:
        from . import _numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass
    else:
        BACKEND = "numba"
        propagate_regions = _numba.propagate_regions

__all__ = ["BACKEND", "propagate_regions"]
