# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled double-sum kernel for the mode-lattice oracle.

The symmetrized two-photon norm is an explicit sum over mode pairs
(j, l); at the oracle's comparison sizes (1e5 modes) that is 5e9 pair
terms, which is the hot spot this extension exists for. The Python
fallback in _fallback.py computes the identical quantity with blocked
outer products.
"""

from libc.math cimport fabs


def pair_double_sum(double[::1] u, double[::1] v, double[::1] p):
    """sum_{j,l} [ (u[j] v[l] + u[l] v[j]) / 2 + p[j] p[l] ] over all ordered
    pairs, evaluated term by term (unordered pairs at weight two plus the
    diagonal). Every per-pair contribution is nonnegative when
    u[j] v[j] >= p[j]^2 holds per mode, so plain row accumulation loses no
    accuracy; rows are combined with Neumaier compensation.
    """
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t j, l
    cdef double row, s = 0.0, comp = 0.0, t
    for j in range(n):
        row = u[j] * v[j] + p[j] * p[j]
        for l in range(j + 1, n):
            row += u[j] * v[l] + u[l] * v[j] + 2.0 * p[j] * p[l]
        t = s + row
        if fabs(s) >= fabs(row):
            comp += (s - t) + row
        else:
            comp += (row - t) + s
        s = t
    return s + comp
