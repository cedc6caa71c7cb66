# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled SMO dual solver for the linear soft-margin SVM.

Must stay operation-for-operation identical to ``ifra._smo_py`` so both
backends return bit-identical solutions.
"""
import numpy as np

from libc.math cimport fabs
from libc.stdint cimport uint64_t

cdef double ALPHA_EPS = 1e-5


cdef inline uint64_t _splitmix64(uint64_t* state) noexcept nogil:
    state[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


def smo_solve(double[:, ::1] K, double[::1] y, double C, double tol, int max_passes, uint64_t seed):
    cdef Py_ssize_t m = y.shape[0]
    cdef double[::1] alpha = np.zeros(m)
    cdef double[::1] err = np.empty(m)
    cdef double b = 0.0
    cdef uint64_t state = seed
    cdef Py_ssize_t i, j, k
    cdef int passes = 0
    cdef int changed, attempt
    cdef bint converged = False
    cdef double ei, ej, ri, ai_old, aj_old, ai, aj, lo, hi, eta, b1, b2, dai, daj, db, si, sj, gap, best

    for k in range(m):
        err[k] = -y[k]

    with nogil:
        while passes < max_passes:
            changed = 0
            for i in range(m):
                ei = err[i]
                ri = y[i] * ei
                if not ((ri < -tol and alpha[i] < C) or (ri > tol and alpha[i] > 0.0)):
                    continue
                for attempt in range(2):
                    if attempt == 0:
                        j = -1
                        best = -1.0
                        for k in range(m):
                            if k != i:
                                gap = fabs(ei - err[k])
                                if gap > best:
                                    best = gap
                                    j = k
                    else:
                        j = <Py_ssize_t>(_splitmix64(&state) % <uint64_t>(m - 1))
                        if j >= i:
                            j += 1
                    ej = err[j]
                    ai_old = alpha[i]
                    aj_old = alpha[j]
                    if y[i] != y[j]:
                        lo = aj_old - ai_old
                        if lo < 0.0:
                            lo = 0.0
                        hi = C + aj_old - ai_old
                        if hi > C:
                            hi = C
                    else:
                        lo = ai_old + aj_old - C
                        if lo < 0.0:
                            lo = 0.0
                        hi = ai_old + aj_old
                        if hi > C:
                            hi = C
                    if lo == hi:
                        continue
                    eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
                    if eta >= 0.0:
                        continue
                    aj = aj_old - y[j] * (ei - ej) / eta
                    if aj > hi:
                        aj = hi
                    elif aj < lo:
                        aj = lo
                    if fabs(aj - aj_old) < ALPHA_EPS:
                        continue
                    ai = ai_old + y[i] * y[j] * (aj_old - aj)
                    if ai < 0.0:
                        ai = 0.0
                    elif ai > C:
                        ai = C
                    dai = ai - ai_old
                    daj = aj - aj_old
                    b1 = b - ei - y[i] * dai * K[i, i] - y[j] * daj * K[i, j]
                    b2 = b - ej - y[i] * dai * K[i, j] - y[j] * daj * K[j, j]
                    if 0.0 < ai and ai < C:
                        db = b1 - b
                    elif 0.0 < aj and aj < C:
                        db = b2 - b
                    else:
                        db = (b1 + b2) / 2.0 - b
                    alpha[i] = ai
                    alpha[j] = aj
                    b = b + db
                    si = y[i] * dai
                    sj = y[j] * daj
                    for k in range(m):
                        err[k] = err[k] + (si * K[i, k] + sj * K[j, k] + db)
                    changed += 1
                    break
            passes += 1
            if changed == 0:
                converged = True
                break

    return np.asarray(alpha), b, passes, bool(converged)
