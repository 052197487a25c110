"""Kernel backend selection.

``DISTAL_LAB_BACKEND=numpy`` forces the pure-numpy path; anything else (or
unset) prefers the numba kernels when numba imports cleanly.  Both backends
expose the same functions; base-lattice arithmetic is bit-identical between
them, float evaluations may differ by an ulp.
"""

import os

from . import numpy_backend

_requested = os.environ.get("DISTAL_LAB_BACKEND", "").strip().lower()

if _requested == "numpy":
    active = numpy_backend
else:
    try:
        from . import numba_backend
        active = numba_backend
    except ImportError:  # pragma: no cover - exercised only without numba
        if _requested == "numba":
            raise
        active = numpy_backend


def backend_name() -> str:
    return active.name


def get_backend(name=None):
    if name in (None, "", "active"):
        return active
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        from . import numba_backend
        return numba_backend
    raise ValueError(f"unknown backend {name!r}")
