"""Backend selection for the hot kernels.

Every inner loop in the package exists twice: a scalar loop compiled with
numba's ``njit`` and a vectorised pure-numpy variant.  The active backend is
read once from ``FORGE_BACKEND`` (``numba`` or ``numpy``, default ``numba``)
and can be switched at runtime with :func:`backend` for tests and benchmarks.
Both paths must return identical results.
"""

from __future__ import annotations

import contextlib
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_VALID = ("numba", "numpy")


def _initial_backend() -> str:
    name = os.environ.get("FORGE_BACKEND", "numba").strip().lower()
    if name not in _VALID:
        raise ValueError(f"FORGE_BACKEND must be one of {_VALID}, got {name!r}")
    if name == "numba" and numba is None:
        return "numpy"
    return name


_backend = _initial_backend()


def njit(func):
    """Compile ``func`` in nopython mode, releasing the GIL so worker threads scale."""
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def current_backend() -> str:
    return _backend


def use_numba() -> bool:
    return _backend == "numba"


def set_backend(name: str) -> None:
    global _backend
    name = name.lower()
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and numba is None:
        raise RuntimeError("numba is not installed")
    _backend = name


@contextlib.contextmanager
def backend(name: str):
    """Temporarily switch the kernel backend."""
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
