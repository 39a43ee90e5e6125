"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The backend is chosen at import time from ``LINMOD_BACKEND`` (``numba`` or
``numpy``; default ``numba``). If numba cannot be imported the numpy path is
used silently. :func:`set_backend` and :func:`backend` switch at runtime, which
the tests and the benchmark use to compare both paths.
"""
import contextlib
import os

import numpy as np

from . import _numpy

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

_BACKENDS = {"numpy": _numpy}
if _numba is not None:
    _BACKENDS["numba"] = _numba

_requested = os.environ.get("LINMOD_BACKEND", "numba").strip().lower()
_impl = _BACKENDS.get(_requested, _BACKENDS.get("numba", _numpy))

__all__ = [
    "available_backends",
    "backend",
    "betainc",
    "get_backend",
    "givens_qr",
    "gram_schmidt",
    "householder_qr",
    "jacobi_eigh",
    "matmul",
    "rref",
    "set_backend",
    "solve_triangular",
]


def available_backends():
    return sorted(_BACKENDS)


def get_backend():
    return "numba" if _impl is _numba else "numpy"


def set_backend(name):
    global _impl
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _impl = _BACKENDS[name]


@contextlib.contextmanager
def backend(name):
    previous = get_backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def matmul(a, b):
    return _impl.matmul(_f64(a), _f64(b))


def solve_triangular(t, b, upper, tol):
    """Back/forward substitution on a 2-D right-hand side.

    Returns ``(x, bad)`` where ``bad`` is the first pivot index whose
    magnitude is ``<= tol`` (``-1`` when the solve completed).
    """
    x, bad = _impl.solve_triangular(_f64(t), _f64(b), bool(upper), float(tol))
    return x, int(bad)


def rref(a, tol):
    return _impl.rref(_f64(a), float(tol))


def householder_qr(a, steps):
    return _impl.householder_qr(_f64(a), int(steps))


def givens_qr(a):
    return _impl.givens_qr(_f64(a))


def gram_schmidt(a, tol):
    return _impl.gram_schmidt(_f64(a), float(tol))


def jacobi_eigh(a, rel_tol, max_sweeps):
    w, v, sweeps = _impl.jacobi_eigh(_f64(a), float(rel_tol), int(max_sweeps))
    return w, v, int(sweeps)


def betainc(a, b, xs, tol, max_iter):
    out, worst = _impl.betainc(float(a), float(b), _f64(np.atleast_1d(xs)), float(tol), int(max_iter))
    return out, int(worst)
