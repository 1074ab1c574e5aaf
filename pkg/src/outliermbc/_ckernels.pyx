# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: regularized incomplete beta, CDF grid gap, Ward NN-chain.

Every function here has a line-for-line twin in ``_pykernels``; both must
return the same results (up to floating-point rounding in the beta series).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, fabs, INFINITY, NAN

cnp.import_array()

cdef int MAXIT = 300
cdef double EPS = 1e-14
cdef double FPMIN = 1e-300


cdef double _betacf(double a, double b, double x) noexcept nogil:
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    cdef double qab = a + b, qap = a + 1.0, qam = a - 1.0
    cdef double c = 1.0, d, h, aa, delta
    cdef int m, m2
    d = 1.0 - qab * x / qap
    if fabs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < EPS:
            return h
    return NAN


cdef double _betainc(double a, double b, double x, double lbeta) noexcept nogil:
    cdef double front
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = exp(a * log(x) + b * log1p(-x) - lbeta)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def betainc(double a, double b, x, double lbeta):
    """Regularized incomplete beta I_x(a, b) over an array; NaN marks non-convergence.

    ``lbeta`` is log B(a, b), supplied by the caller.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    with nogil:
        for i in range(n):
            out[i] = _betainc(a, b, xs[i], lbeta)
    return out.reshape(np.shape(x))


def grid_gap(double[::1] values, double[::1] weights, double a, double b, double lbeta, Py_ssize_t T):
    """Mean of |I_t(a,b) - Fhat(t)| over t = 1/T, ..., T/T.

    ``values`` must be sorted ascending and ``weights`` aligned with them.
    Returns NaN if the continued fraction fails to converge anywhere.
    """
    cdef Py_ssize_t n = values.shape[0], j = 0, t
    cdef double acc = 0.0, ecdf = 0.0, grid, ref
    cdef bint failed = False
    with nogil:
        for t in range(1, T + 1):
            grid = <double>t / <double>T
            while j < n and values[j] <= grid:
                ecdf += weights[j]
                j += 1
            ref = _betainc(a, b, grid, lbeta)
            if ref != ref:
                failed = True
                break
            acc += fabs(ref - ecdf)
    if failed:
        return NAN
    return acc / T


cdef inline Py_ssize_t _cidx(Py_ssize_t n, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    # Condensed index of the pair (i, j), i != j.
    cdef Py_ssize_t t
    if i > j:
        t = i
        i = j
        j = t
    return n * i - (i * (i + 1)) // 2 + (j - i - 1)


def ward_merges(X):
    """Ward agglomeration by the nearest-neighbour chain.

    Returns ``(left, right, height)`` for the n - 1 merges in discovery
    order. Heights are Ward distances on squared Euclidean scale. The merged
    cluster keeps the slot of its lower index, so ``left < right`` always and
    each slot index is a point contained in that slot's cluster.
    """
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], p = x.shape[1]
    cdef Py_ssize_t i, j, k, d, a, b, prev, top, lo, hi, nm = 0
    cdef double s, diff, best, dab, si, sj, sk
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist_arr = np.empty(max(n * (n - 1) // 2, 1))
    cdef double[::1] dist = dist_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] size_arr = np.ones(n)
    cdef double[::1] size = size_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] active_arr = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] active = active_arr
    cdef cnp.ndarray[cnp.intp_t, ndim=1] chain_arr = np.empty(max(n, 1), dtype=np.intp)
    cdef Py_ssize_t[::1] chain = chain_arr
    left = np.empty(max(n - 1, 0), dtype=np.intp)
    right = np.empty(max(n - 1, 0), dtype=np.intp)
    height = np.empty(max(n - 1, 0), dtype=np.float64)
    cdef Py_ssize_t[::1] lv = left
    cdef Py_ssize_t[::1] rv = right
    cdef double[::1] hv = height
    cdef Py_ssize_t first = 0

    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                s = 0.0
                for d in range(p):
                    diff = x[i, d] - x[j, d]
                    s = s + diff * diff
                dist[_cidx(n, i, j)] = s

        top = 0
        while nm < n - 1:
            if top == 0:
                while not active[first]:
                    first += 1
                chain[0] = first
                top = 1
            a = chain[top - 1]
            prev = chain[top - 2] if top >= 2 else -1
            best = INFINITY
            b = -1
            for k in range(n):
                if k == a or not active[k]:
                    continue
                if dist[_cidx(n, a, k)] < best:
                    best = dist[_cidx(n, a, k)]
                    b = k
            if prev >= 0 and dist[_cidx(n, a, prev)] <= best:
                b = prev
                best = dist[_cidx(n, a, prev)]
            if b != prev:
                chain[top] = b
                top += 1
                continue
            # a and b are reciprocal nearest neighbours
            top -= 2
            lo = a if a < b else b
            hi = b if a < b else a
            lv[nm] = lo
            rv[nm] = hi
            hv[nm] = best
            nm += 1
            si = size[lo]
            sj = size[hi]
            dab = best
            for k in range(n):
                if k == lo or k == hi or not active[k]:
                    continue
                sk = size[k]
                dist[_cidx(n, lo, k)] = ((si + sk) * dist[_cidx(n, lo, k)]
                                         + (sj + sk) * dist[_cidx(n, hi, k)]
                                         - sk * dab) / (si + sj + sk)
            size[lo] = si + sj
            active[hi] = 0
    return left, right, height
