# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Metropolis chain kernel; bit-identical twin of _chain_py."""

from libc.math cimport lgamma, log

import numpy as np


cdef double _stat(long[::1] y, int k, int stat_kind, double[::1] logmu) nogil:
    cdef double t = 0.0
    cdef int c
    cdef long yc
    if stat_kind == 0:
        for c in range(k):
            yc = y[c]
            if yc > 0:
                t += yc * (log(<double> yc) - logmu[c])
        return 2.0 * t
    for c in range(k):
        t += lgamma(y[c] + 1.0)
    return t


def run_kernel(
    y0,
    moves,
    int stat_kind,
    logmu,
    double t_obs,
    double tie_tol,
    move_idx,
    signs,
    logu,
    long burn_in,
    long thin,
):
    """Run the walk; returns (indicators uint8, tvals float64, accepted)."""
    cdef long[::1] y = np.array(y0, dtype=np.int64)
    cdef long[:, ::1] mv = np.ascontiguousarray(moves, dtype=np.int64)
    cdef double[::1] lmu = np.ascontiguousarray(logmu, dtype=np.float64)
    cdef long[::1] midx = np.ascontiguousarray(move_idx, dtype=np.int64)
    cdef long[::1] sgn = np.ascontiguousarray(signs, dtype=np.int64)
    cdef double[::1] lu = np.ascontiguousarray(logu, dtype=np.float64)
    cdef int k = y.shape[0]
    cdef long steps = midx.shape[0]
    cdef long n_rec = 0
    if steps > burn_in:
        n_rec = (steps - burn_in + thin - 1) // thin
    indicators = np.zeros(n_rec, dtype=np.uint8)
    tvals = np.zeros(n_rec, dtype=np.float64)
    cdef unsigned char[::1] ind = indicators
    cdef double[::1] tv = tvals
    cdef long accepted = 0, rec = 0, t, mi
    cdef int c, feasible
    cdef long sg, zc, ynew
    cdef double logratio, tval
    with nogil:
        for t in range(steps):
            mi = midx[t]
            sg = sgn[t]
            feasible = 1
            logratio = 0.0
            for c in range(k):
                zc = sg * mv[mi, c]
                if zc != 0:
                    ynew = y[c] + zc
                    if ynew < 0:
                        feasible = 0
                        break
                    logratio += lgamma(y[c] + 1.0) - lgamma(ynew + 1.0)
            if feasible == 1 and lu[t] < logratio:
                for c in range(k):
                    zc = sg * mv[mi, c]
                    if zc != 0:
                        y[c] += zc
                accepted += 1
            if t >= burn_in and (t - burn_in) % thin == 0:
                tval = _stat(y, k, stat_kind, lmu)
                tv[rec] = tval
                ind[rec] = 1 if tval >= t_obs - tie_tol else 0
                rec += 1
    return indicators, tvals, accepted
