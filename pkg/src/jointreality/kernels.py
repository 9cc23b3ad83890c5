"""Hot-kernel dispatch.

The compiled ``_ckernels`` extension is used when it was built; otherwise
the numpy fallback in ``_pykernels`` is selected. Both expose the same
functions and are cross-checked in the test suite.
"""

from __future__ import annotations

from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_active: ModuleType = _compiled if _compiled is not None else _pykernels

OPTIMAL = _pykernels.OPTIMAL
UNBOUNDED = _pykernels.UNBOUNDED
ITERATION_LIMIT = _pykernels.ITERATION_LIMIT


def available_backends() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "cython")
    return names


def backend() -> str:
    return _active.BACKEND


def get_backend_module(name: str) -> ModuleType:
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def set_backend(name: str) -> str:
    """Switch the active backend; returns the previous backend name."""
    global _active
    previous = _active.BACKEND
    _active = get_backend_module(name)
    return previous


def tau_batch(quartets, signs):
    return _active.tau_batch(quartets, signs)


def ell_batch(quartets):
    return _active.ell_batch(quartets)


def pivot(T, row, col):
    return _active.pivot(T, row, col)


def simplex_iterate(T, basis, n_enter, tol, max_iter):
    return _active.simplex_iterate(T, basis, n_enter, tol, max_iter)


__all__ = [
    "available_backends",
    "backend",
    "ell_batch",
    "get_backend_module",
    "pivot",
    "set_backend",
    "simplex_iterate",
    "tau_batch",
]
