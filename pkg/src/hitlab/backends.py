"""Kernel backend selection for the triad response sum.

The compiled Cython kernel is preferred when importable; a pure-numpy kernel
with identical semantics is the fallback. Selection happens once at import
and can be forced with the environment variable ``HITLAB_BACKEND`` set to
``cython`` or ``numpy``. Each backend is deterministic run to run; the two
agree to roundoff but are not bitwise identical to each other.
"""

from __future__ import annotations

import os

import numpy as np

from ._tables import TriadTables

__all__ = ["active_backend", "compute_response", "response_numpy",
           "response_cython", "HAVE_CYTHON"]

try:
    from . import _triad_cy
    HAVE_CYTHON = True
except ImportError:
    _triad_cy = None
    HAVE_CYTHON = False


def _select() -> str:
    forced = os.environ.get("HITLAB_BACKEND", "").strip().lower()
    if forced in ("cython", "numpy"):
        if forced == "cython" and not HAVE_CYTHON:
            raise ImportError(
                "HITLAB_BACKEND=cython but the compiled kernel is unavailable")
        return forced
    return "cython" if HAVE_CYTHON else "numpy"


_ACTIVE = _select()


def active_backend() -> str:
    return _ACTIVE


def response_numpy(tables: TriadTables, energy: np.ndarray,
                   damping: np.ndarray, t_elapsed: float = 0.0,
                   finite_time: bool = False) -> np.ndarray:
    """Pure-numpy evaluation of the symmetric response matrix R."""
    pair_sum = damping[tables.pair_i] + damping[tables.pair_j]
    den = pair_sum[tables.flat_pair] + damping[tables.flat_m]
    if finite_time:
        theta = (1.0 - np.exp(-den * t_elapsed)) / den
    else:
        theta = 1.0 / den
    contrib = tables.values * energy[tables.flat_m] * theta
    acc = np.bincount(tables.flat_pair, weights=contrib,
                      minlength=tables.pair_i.shape[0])
    n = tables.n
    R = np.zeros((n, n))
    R[tables.pair_i, tables.pair_j] = acc
    R[tables.pair_j, tables.pair_i] = acc
    return R


def response_cython(tables: TriadTables, energy: np.ndarray,
                    damping: np.ndarray, t_elapsed: float = 0.0,
                    finite_time: bool = False) -> np.ndarray:
    if not HAVE_CYTHON:
        raise ImportError("compiled triad kernel is unavailable")
    return _triad_cy.compute_r(
        tables.n, tables.pair_i, tables.pair_j, tables.m_start,
        tables.offsets, tables.values,
        np.ascontiguousarray(energy, dtype=float),
        np.ascontiguousarray(damping, dtype=float),
        float(t_elapsed), bool(finite_time))


def compute_response(tables, energy, damping, t_elapsed=0.0,
                     finite_time=False) -> np.ndarray:
    if _ACTIVE == "cython":
        return response_cython(tables, energy, damping, t_elapsed, finite_time)
    return response_numpy(tables, energy, damping, t_elapsed, finite_time)
