# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled quasiprobability kernels.

Multi-order Bessel evaluation by Miller's normalized downward recurrence
(all orders 0..d_max from one backward sweep per argument) and the fused
quadrature contraction. Pure-NumPy twins live in ``_kernels_py``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()


def bessel_orders(int d_max, cnp.ndarray[cnp.float64_t, ndim=1] x):
    """J_d(x) for d = 0..d_max at each x >= 0; shape (d_max+1, len(x))."""
    cdef Py_ssize_t nx = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((d_max + 1, nx))
    cdef Py_ssize_t i
    for i in range(nx):
        _miller_column(d_max, x[i], out, i)
    return out


cdef void _miller_column(int d_max, double xv,
                         cnp.ndarray[cnp.float64_t, ndim=2] out,
                         Py_ssize_t col):
    cdef int m, k, start
    cdef double jp1, jcur, jm1, norm, scale
    cdef double tiny = 1e-305, huge = 1e250
    if xv < 1e-8:
        out[0, col] = 1.0 - 0.25 * xv * xv
        if d_max >= 1:
            out[1, col] = 0.5 * xv
        for m in range(2, d_max + 1):
            out[m, col] = 0.0
        return
    # seed well above both the target order and the turning point ~ x
    start = d_max + 16 + <int> (1.1 * xv + 14.0 * pow(xv if xv > 1.0 else 1.0, 1.0 / 3.0))
    if start % 2 == 1:
        start += 1
    jp1 = 0.0
    jcur = tiny
    norm = 0.0
    for m in range(start, 0, -1):
        jm1 = (2.0 * m / xv) * jcur - jp1
        jp1 = jcur
        jcur = jm1  # jcur is now the unnormalized J_{m-1}
        if (m - 1) > 0 and (m - 1) % 2 == 0:
            norm += 2.0 * jcur
        if m - 1 <= d_max:
            out[m - 1, col] = jcur
        if fabs(jcur) > huge:
            scale = 1.0 / huge
            jcur *= scale
            jp1 *= scale
            norm *= scale
            for k in range(m - 1, d_max + 1):
                out[k, col] *= scale
    norm += jcur  # jcur holds J_0; identity J_0 + 2 sum J_{2k} = 1
    scale = 1.0 / norm
    for k in range(0, d_max + 1):
        out[k, col] *= scale


def contract_table(cnp.ndarray[cnp.float64_t, ndim=2] lam,
                   cnp.ndarray[cnp.float64_t, ndim=1] zg,
                   cnp.ndarray[cnp.float64_t, ndim=2] jslice):
    """out[p, r] = sum_q lam[p, q] * zg[q] * jslice[r, q]."""
    cdef Py_ssize_t P = lam.shape[0]
    cdef Py_ssize_t Q = lam.shape[1]
    cdef Py_ssize_t R = jslice.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((P, R))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] lw = np.empty((P, Q))
    cdef Py_ssize_t p, q, r
    cdef double acc
    for p in range(P):
        for q in range(Q):
            lw[p, q] = lam[p, q] * zg[q]
    for p in range(P):
        for r in range(R):
            acc = 0.0
            for q in range(Q):
                acc += lw[p, q] * jslice[r, q]
            out[p, r] = acc
    return out
