"""Kernel backend selection.

The compiled extension is used when importable; setting the environment
variable ``DASCOF_PURE_PYTHON=1`` forces the pure-Python twin.
"""
import os
from contextlib import contextmanager

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

if os.environ.get("DASCOF_PURE_PYTHON") or _ckernels is None:
    name = "python"
else:
    name = "cython"
kernels = BACKENDS[name]


def set_backend(backend: str):
    global kernels, name
    if backend not in BACKENDS:
        raise ValueError(f"backend {backend!r} unavailable; have {sorted(BACKENDS)}")
    name = backend
    kernels = BACKENDS[backend]


@contextmanager
def using(backend: str):
    prev = name
    set_backend(backend)
    try:
        yield kernels
    finally:
        set_backend(prev)


def backend_name() -> str:
    """Name of the active kernel backend (``"cython"`` or ``"python"``)."""
    return name
