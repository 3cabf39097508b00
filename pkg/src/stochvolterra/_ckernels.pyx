# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, log, sqrt
from libc.stdint cimport uint32_t, uint64_t

cnp.import_array()


def cq_diag(const double[::1] omega, double dt, const double[::1] lam, u0, dW, Py_ssize_t n):
    cdef Py_ssize_t J = lam.shape[0]
    cdef Py_ssize_t k, l, j
    cdef double acc, w
    u_arr = np.empty((n + 1, J))
    cdef double[:, ::1] u = u_arr
    cdef double[::1] denom = np.empty(J)
    cdef double[::1] hist = np.empty(J)
    cdef const double[:, ::1] dw
    cdef bint has_noise = dW is not None
    u_arr[0] = u0
    if has_noise:
        dw = np.ascontiguousarray(dW, dtype=np.float64)
    for j in range(J):
        denom[j] = 1.0 + dt * omega[0] * lam[j]
    with nogil:
        for k in range(1, n + 1):
            for j in range(J):
                hist[j] = 0.0
            # history sum_{l=1}^{k-1} omega_{k-l} u_l, accumulated row by row
            for l in range(1, k):
                w = omega[k - l]
                for j in range(J):
                    hist[j] += w * u[l, j]
            for j in range(J):
                acc = u[k - 1, j] - dt * lam[j] * hist[j]
                if has_noise:
                    acc = acc + dw[k - 1, j]
                u[k, j] = acc / denom[j]
    return u_arr


def cq_fem(const double[::1] omega, double dt, double h, u0, loads, Py_ssize_t n):
    u0a = np.atleast_2d(np.asarray(u0, dtype=np.float64))
    cdef Py_ssize_t S = u0a.shape[0]
    cdef Py_ssize_t m = u0a.shape[1]
    cdef Py_ssize_t k, l, s, i
    cdef double w
    cdef double shift = dt * omega[0]
    cdef double md = 4.0 * h / 6.0, mo = h / 6.0
    cdef double kd = 2.0 / h, ko = -1.0 / h
    cdef double ad = md + shift * kd, ao = mo + shift * ko
    u_arr = np.empty((n + 1, S, m))
    u_arr[0] = u0a
    cdef double[:, :, ::1] u = u_arr
    cdef double[:, ::1] hist = np.empty((S, m))
    cdef double[::1] rhs = np.empty(m)
    cdef double[::1] cp = np.empty(m)
    cdef double[::1] inv = np.empty(m)
    cdef const double[:, :, ::1] ld
    cdef bint has_loads = loads is not None
    if has_loads:
        ld = np.ascontiguousarray(loads, dtype=np.float64)

    # Thomas factorisation of M + dt*omega_0*K, reused at every step
    inv[0] = 1.0 / ad
    for i in range(1, m):
        cp[i - 1] = ao * inv[i - 1]
        inv[i] = 1.0 / (ad - ao * cp[i - 1])

    with nogil:
        for k in range(1, n + 1):
            for s in range(S):
                for i in range(m):
                    hist[s, i] = 0.0
            for l in range(1, k):
                w = omega[k - l]
                for s in range(S):
                    for i in range(m):
                        hist[s, i] += w * u[l, s, i]
            for s in range(S):
                for i in range(m):
                    rhs[i] = md * u[k - 1, s, i] - dt * kd * hist[s, i]
                    if i > 0:
                        rhs[i] += mo * u[k - 1, s, i - 1] - dt * ko * hist[s, i - 1]
                    if i < m - 1:
                        rhs[i] += mo * u[k - 1, s, i + 1] - dt * ko * hist[s, i + 1]
                    if has_loads:
                        rhs[i] += ld[k - 1, s, i]
                rhs[0] = rhs[0] * inv[0]
                for i in range(1, m):
                    rhs[i] = (rhs[i] - ao * rhs[i - 1]) * inv[i]
                for i in range(m - 2, -1, -1):
                    rhs[i] -= cp[i] * rhs[i + 1]
                for i in range(m):
                    u[k, s, i] = rhs[i]
    return u_arr


def tridiag_solve(sub, diag, sup, rhs):
    cdef const double[::1] a = np.ascontiguousarray(sub, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(sup, dtype=np.float64)
    x_arr = np.array(rhs, dtype=np.float64, copy=True)
    shape = x_arr.shape
    cdef Py_ssize_t m = b.shape[0]
    x2 = np.ascontiguousarray(x_arr.reshape(m, -1))
    cdef double[:, ::1] x = x2
    cdef Py_ssize_t r = x.shape[1]
    cdef Py_ssize_t i, q
    cdef double[::1] cp = np.empty(m)
    cdef double beta = b[0]
    with nogil:
        for q in range(r):
            x[0, q] /= beta
        for i in range(1, m):
            cp[i - 1] = c[i - 1] / beta
            beta = b[i] - a[i - 1] * cp[i - 1]
            for q in range(r):
                x[i, q] = (x[i, q] - a[i - 1] * x[i - 1, q]) / beta
        for i in range(m - 2, -1, -1):
            for q in range(r):
                x[i, q] -= cp[i] * x[i + 1, q]
    return x2.reshape(shape)


cdef inline void _philox(uint32_t* c, uint32_t k0, uint32_t k1) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t c0, c1, c2, c3
    cdef int r
    c0 = c[0]; c1 = c[1]; c2 = c[2]; c3 = c[3]
    for r in range(10):
        p0 = <uint64_t>0xD2511F53 * c0
        p1 = <uint64_t>0xCD9E8D57 * c2
        c0 = <uint32_t>(p1 >> 32) ^ c1 ^ k0
        c1 = <uint32_t>p1
        c2 = <uint32_t>(p0 >> 32) ^ c3 ^ k1
        c3 = <uint32_t>p0
        k0 = k0 + <uint32_t>0x9E3779B9
        k1 = k1 + <uint32_t>0xBB67AE85
    c[0] = c0; c[1] = c1; c[2] = c2; c[3] = c3


def philox_block(counter, key):
    cdef uint32_t c[4]
    for i in range(4):
        c[i] = <uint32_t>counter[i]
    _philox(c, <uint32_t>key[0], <uint32_t>key[1])
    return (c[0], c[1], c[2], c[3])


def philox_bits(seed, stream, Py_ssize_t k0, Py_ssize_t n, Py_ssize_t J):
    cdef uint64_t sd = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t st = <uint64_t>(int(stream) & 0xFFFFFFFFFFFFFFFF)
    out_arr = np.empty((n, J, 4), dtype=np.uint32)
    cdef uint32_t[:, :, ::1] out = out_arr
    cdef uint32_t c[4]
    cdef Py_ssize_t r, j
    cdef uint32_t key0 = <uint32_t>sd, key1 = <uint32_t>(sd >> 32)
    with nogil:
        for r in range(n):
            for j in range(J):
                c[0] = <uint32_t>j
                c[1] = <uint32_t>(k0 + r)
                c[2] = <uint32_t>st
                c[3] = <uint32_t>(st >> 32)
                _philox(c, key0, key1)
                out[r, j, 0] = c[0]
                out[r, j, 1] = c[1]
                out[r, j, 2] = c[2]
                out[r, j, 3] = c[3]
    return out_arr


def philox_normals(seed, stream, Py_ssize_t k0, Py_ssize_t n, Py_ssize_t J):
    cdef uint64_t sd = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t st = <uint64_t>(int(stream) & 0xFFFFFFFFFFFFFFFF)
    out_arr = np.empty((n, J))
    cdef double[:, ::1] out = out_arr
    cdef uint32_t c[4]
    cdef Py_ssize_t r, j
    cdef uint32_t key0 = <uint32_t>sd, key1 = <uint32_t>(sd >> 32)
    cdef uint64_t a, b
    cdef double u1, u2
    cdef double two_m53 = 1.0 / 9007199254740992.0
    with nogil:
        for r in range(n):
            for j in range(J):
                c[0] = <uint32_t>j
                c[1] = <uint32_t>(k0 + r)
                c[2] = <uint32_t>st
                c[3] = <uint32_t>(st >> 32)
                _philox(c, key0, key1)
                a = ((<uint64_t>c[0] << 32) | c[1]) >> 11
                b = ((<uint64_t>c[2] << 32) | c[3]) >> 11
                u1 = (<double>a + 1.0) * two_m53
                u2 = <double>b * two_m53
                out[r, j] = sqrt(-2.0 * log(u1)) * cos(6.283185307179586 * u2)
    return out_arr
