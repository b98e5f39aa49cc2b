"""Jitted twin of the dense sweep. Falls back to the interpreter if numba is
unavailable so the package stays importable everywhere."""

from ._engine import sweep_dense

try:
    from numba import njit

    sweep_dense_jit = njit(cache=True, nogil=True)(sweep_dense)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    sweep_dense_jit = sweep_dense
    HAVE_NUMBA = False
