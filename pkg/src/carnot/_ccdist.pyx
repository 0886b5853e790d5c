# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Carnot-Caratheodory distance kernel for H^n (see _ccdist_py)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, cos, fabs, sin, sqrt

cnp.import_array()

cdef double TWO_PI = 2.0 * M_PI
cdef double SMALL = 1e-2
cdef int BISECT_STEPS = 64


cdef inline double _eps_factor(double mu) nogil:
    cdef double m2 = mu * mu
    if fabs(mu) < SMALL:
        return 1.0 - m2 / 24.0 + m2 * m2 / 1920.0
    return sqrt(2.0 * (1.0 - cos(mu))) / fabs(mu)


cdef inline double _vertical_ratio(double mu) nogil:
    cdef double m2 = mu * mu
    if fabs(mu) < SMALL:
        return (mu / 12.0) * (1.0 + m2 / 30.0 + m2 * m2 / 840.0)
    return (mu - sin(mu)) / (4.0 * (1.0 - cos(mu)))


cdef inline double _solve_mu(double q) nogil:
    cdef double lo = 0.0
    cdef double hi = TWO_PI
    cdef double mid
    cdef int i
    for i in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if _vertical_ratio(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


cdef inline double _distance(double h, double v) nogil:
    if v < 0.0:
        v = -v
    if h == 0.0:
        return sqrt(4.0 * M_PI * v)
    if v == 0.0:
        return h
    return h / _eps_factor(_solve_mu(v / (h * h)))


def cc_distance_batch(h, v):
    """Distance from the identity for batches of (|horizontal|, vertical)."""
    h_arr = np.ascontiguousarray(np.broadcast_arrays(h, v)[0], dtype=np.float64)
    v_arr = np.ascontiguousarray(np.broadcast_arrays(h, v)[1], dtype=np.float64)
    shape = h_arr.shape
    cdef double[::1] hv = h_arr.ravel()
    cdef double[::1] vv = v_arr.ravel()
    out = np.empty(hv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = hv.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _distance(hv[i], vv[i])
    return out.reshape(shape)
