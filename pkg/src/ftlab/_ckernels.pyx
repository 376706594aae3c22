# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in _pykernels."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt, INFINITY

cnp.import_array()


def earliest_collision(pos, speed):
    cdef double[::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef double[::1] s = np.ascontiguousarray(speed, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], i, best = -1
    cdef double dt, best_dt = INFINITY, gap, closing
    for i in range(n - 1):
        closing = s[i] - s[i + 1]
        if closing > 0:
            gap = p[i + 1] - p[i]
            if gap < 0:
                gap = 0
            dt = gap / closing
            if dt < best_dt:
                best_dt = dt
                best = i
    return best, best_dt


def glimm_q(families, sigma):
    cdef long[::1] fam = np.ascontiguousarray(families, dtype=np.int64)
    cdef double[::1] sig = np.ascontiguousarray(sigma, dtype=np.float64)
    cdef Py_ssize_t n = sig.shape[0], k
    cdef double c1 = 0, c1n = 0, c2 = 0, c2n = 0, q = 0, a
    for k in range(n):
        a = fabs(sig[k])
        if fam[k] == 1:
            q += a * (c2 + (c1 if sig[k] < 0 else c1n))
            c1 += a
            if sig[k] < 0:
                c1n += a
        else:
            q += a * (c2 if sig[k] < 0 else c2n)
            c2 += a
            if sig[k] < 0:
                c2n += a
    return q


def pc_l1(xa, ua, xb, ub, double lo, double hi):
    if hi <= lo:
        return 0.0
    cdef double[::1] a = np.ascontiguousarray(xa, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(xb, dtype=np.float64)
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef double[:, ::1] va = np.ascontiguousarray(np.asarray(ua, dtype=np.float64).reshape(na + 1, -1))
    cdef double[:, ::1] vb = np.ascontiguousarray(np.asarray(ub, dtype=np.float64).reshape(nb + 1, -1))
    cdef Py_ssize_t m = va.shape[1], ia = 0, ib = 0, c
    cdef double x = lo, nxt, d, acc, total = 0
    while ia < na and a[ia] <= lo:
        ia += 1
    while ib < nb and b[ib] <= lo:
        ib += 1
    while x < hi:
        nxt = hi
        if ia < na and a[ia] < nxt:
            nxt = a[ia]
        if ib < nb and b[ib] < nxt:
            nxt = b[ib]
        acc = 0
        for c in range(m):
            d = va[ia, c] - vb[ib, c]
            acc += d * d
        total += sqrt(acc) * (nxt - x)
        x = nxt
        while ia < na and a[ia] <= x:
            ia += 1
        while ib < nb and b[ib] <= x:
            ib += 1
    return total


def gagliardo(values, double hx, double s, double p, long min_offset):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    cdef double[:, ::1] u = np.ascontiguousarray(arr)
    cdef Py_ssize_t n = u.shape[0], m = u.shape[1], i, k, c
    cdef double total = 0, part, d, acc, expo = 1.0 + s * p
    if min_offset < 1:
        min_offset = 1
    for k in range(min_offset, n):
        part = 0
        for i in range(n - k):
            if m == 1:
                d = fabs(u[i + k, 0] - u[i, 0])
            else:
                acc = 0
                for c in range(m):
                    d = u[i + k, c] - u[i, c]
                    acc += d * d
                d = sqrt(acc)
            part += pow(d, p)
        total += 2.0 * part / pow(k * hx, expo)
    return total * hx * hx
