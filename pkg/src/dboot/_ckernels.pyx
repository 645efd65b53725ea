# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Accumulation runs in ascending datum order."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, sqrt, fabs
from libc.stdlib cimport malloc, free
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

DEF LINEAR = 0
DEF LOGISTIC = 1
DEF NORM_SUP = 0
DEF NORM_COORD = 1
DEF NORM_L2 = 2


cdef inline double _sigmoid(double b) nogil:
    cdef double e
    if b >= 0:
        return 1.0 / (1.0 + exp(-b))
    e = exp(b)
    return e / (1.0 + e)


cdef inline double _log1pexp(double b) nogil:
    if b > 0:
        return b + log1p(exp(-b))
    return log1p(exp(b))


def grad_rows(const double[:, ::1] X, const double[::1] y, const double[::1] theta, int family):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], i, l
    cdef double z, r
    out = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] G = out
    with nogil:
        for i in range(n):
            z = 0.0
            for l in range(d):
                z += X[i, l] * theta[l]
            if family == LINEAR:
                r = z - y[i]
            else:
                r = _sigmoid(z) - y[i]
            for l in range(d):
                G[i, l] = r * X[i, l]
    return out


def weighted_moments(const double[:, ::1] X, const double[::1] y, const double[::1] w,
                     const double[::1] theta, int family):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], i, l, m
    cdef double z, r, c, s, wi, loss = 0.0, wsum = 0.0
    grad_arr = np.zeros(d, dtype=np.float64)
    hess_arr = np.zeros((d, d), dtype=np.float64)
    cdef double[::1] g = grad_arr
    cdef double[:, ::1] H = hess_arr
    with nogil:
        for i in range(n):
            wi = w[i]
            wsum += wi
            if wi == 0.0:
                continue
            z = 0.0
            for l in range(d):
                z += X[i, l] * theta[l]
            if family == LINEAR:
                r = z - y[i]
                loss += wi * 0.5 * r * r
                c = wi
            else:
                s = _sigmoid(z)
                r = s - y[i]
                loss += wi * (_log1pexp(z) - y[i] * z)
                c = wi * s * (1.0 - s)
            r = wi * r
            for l in range(d):
                g[l] += r * X[i, l]
                for m in range(l, d):
                    H[l, m] += c * X[i, l] * X[i, m]
        for l in range(d):
            g[l] /= wsum
            for m in range(l, d):
                H[l, m] /= wsum
                H[m, l] = H[l, m]
    return loss / wsum, grad_arr, hess_arr


def block_mean_gradients(const double[:, ::1] X, const double[::1] y, const double[::1] theta,
                         int family, Py_ssize_t block):
    """Mean gradient of each consecutive block of ``block`` rows."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], k, j, i, l
    cdef double z, r
    if block < 1 or n % block:
        raise ValueError("block size must divide the number of rows")
    k = n // block
    out = np.zeros((k, d), dtype=np.float64)
    cdef double[:, ::1] G = out
    with nogil:
        for j in range(k):
            for i in range(j * block, (j + 1) * block):
                z = 0.0
                for l in range(d):
                    z += X[i, l] * theta[l]
                if family == LINEAR:
                    r = z - y[i]
                else:
                    r = _sigmoid(z) - y[i]
                for l in range(d):
                    G[j, l] += r * X[i, l]
            for l in range(d):
                G[j, l] /= block
    return out


DEF ROW_BLOCK = 128


def multiplier_stats(const double[:, ::1] E, const double[:, ::1] Q, int norm, Py_ssize_t coord):
    """Norms of the rows of ``E @ Q.T`` computed in row blocks through dgemm."""
    cdef Py_ssize_t B = E.shape[0], m = E.shape[1], d = Q.shape[0], b0, b, l, nb
    cdef int M, N, K, lda, ldb, ldc
    cdef double one = 1.0, zero = 0.0, v, acc
    cdef char ta = b'T', tb = b'N'
    cdef double *qptr
    cdef double *buf
    out = np.empty(B, dtype=np.float64)
    cdef double[::1] W = out
    if m != Q.shape[1]:
        raise ValueError("E and Q disagree on the number of multipliers")
    if B == 0:
        return out
    if m == 0 or d == 0:
        out[:] = 0.0
        return out
    if norm == NORM_COORD and not 0 <= coord < d:
        raise IndexError("coordinate out of range")
    # the coordinate norm reads one column of the full product so that it
    # agrees exactly with the corresponding entry seen by the sup norm
    qptr = <double *> &Q[0, 0]
    M = <int> d
    buf = <double *> malloc(ROW_BLOCK * M * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    K = <int> m
    lda = K
    ldb = K
    ldc = M
    try:
        b0 = 0
        while b0 < B:
            nb = min(ROW_BLOCK, B - b0)
            N = <int> nb
            # column-major view: buf (M x nb) = Q_sel (M x m) @ E_blk^T (m x nb)
            dgemm(&ta, &tb, &M, &N, &K, &one, qptr, &lda, <double *> &E[b0, 0], &ldb, &zero, buf, &ldc)
            for b in range(nb):
                acc = 0.0
                for l in range(M):
                    if norm == NORM_COORD and l != coord:
                        continue
                    v = buf[b * M + l]
                    if norm == NORM_L2:
                        acc += v * v
                    elif fabs(v) > acc:
                        acc = fabs(v)
                W[b0 + b] = sqrt(acc) if norm == NORM_L2 else acc
            b0 += nb
    finally:
        free(buf)
    return out
