# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop for the triad response sum.

For every wavenumber pair (i, j), i < j, accumulates

    R[i, j] = sum_m  g[i, j, m] * E[m] * theta(d[i] + d[j] + d[m])

over the precomputed clipped-band entries ``g`` (quadrature weight times the
geometric triangle factor). theta is 1/den in asymptotic mode and
(1 - exp(-den * t)) / den in finite-time mode. The result is mirrored so the
returned matrix is exactly symmetric.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def compute_r(int n,
              const cnp.int32_t[::1] pair_i,
              const cnp.int32_t[::1] pair_j,
              const cnp.int32_t[::1] m_start,
              const cnp.int64_t[::1] offsets,
              const double[::1] values,
              const double[::1] energy,
              const double[::1] damping,
              double t_elapsed,
              bint finite_time):
    """Return the symmetric (n, n) response matrix R."""
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n))
    cdef double[:, ::1] R = out
    cdef Py_ssize_t p, q, m
    cdef Py_ssize_t n_pairs = pair_i.shape[0]
    cdef cnp.int64_t off, cnt
    cdef int i, j, m0
    cdef double s, den, th, acc

    for p in range(n_pairs):
        i = pair_i[p]
        j = pair_j[p]
        m0 = m_start[p]
        off = offsets[p]
        cnt = offsets[p + 1] - off
        s = damping[i] + damping[j]
        acc = 0.0
        if finite_time:
            for q in range(cnt):
                m = m0 + q
                den = s + damping[m]
                th = (1.0 - exp(-den * t_elapsed)) / den
                acc += values[off + q] * energy[m] * th
        else:
            for q in range(cnt):
                m = m0 + q
                den = s + damping[m]
                acc += values[off + q] * energy[m] / den
        R[i, j] = acc
        R[j, i] = acc
    return out
