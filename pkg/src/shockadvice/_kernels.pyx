# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Signatures and semantics mirror ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, INFINITY

cnp.import_array()


def vmd_admm(f_hat, freqs, omega0, double alpha, double tau, double tol,
             int max_iters, bint dc):
    cdef double complex[::1] f = np.ascontiguousarray(f_hat, dtype=np.complex128)
    cdef double[::1] w = np.ascontiguousarray(freqs, dtype=np.float64)
    omega_arr = np.array(omega0, dtype=np.float64)
    cdef double[::1] omega = omega_arr
    cdef Py_ssize_t K = omega.shape[0]
    cdef Py_ssize_t M = f.shape[0]
    u_arr = np.zeros((K, M), dtype=np.complex128)
    cdef double complex[:, ::1] u = u_arr
    cdef double complex[::1] lam = np.zeros(M, dtype=np.complex128)
    cdef double complex[::1] total = np.zeros(M, dtype=np.complex128)
    cdef Py_ssize_t k, j
    cdef int n = 0
    cdef double delta = INFINITY
    cdef double num, den, s, sw, dw, p, re, im
    cdef double complex prev, other, new
    if dc:
        omega[0] = 0.0

    while n < max_iters:
        n += 1
        delta = 0.0
        for k in range(K):
            num = 0.0
            den = 0.0
            s = 0.0
            sw = 0.0
            for j in range(M):
                prev = u[k, j]
                other = total[j] - prev
                dw = w[j] - omega[k]
                new = (f[j] - other + 0.5 * lam[j]) / (1.0 + alpha * dw * dw)
                u[k, j] = new
                total[j] = other + new
                p = new.real * new.real + new.imag * new.imag
                s += p
                sw += w[j] * p
                re = new.real - prev.real
                im = new.imag - prev.imag
                num += re * re + im * im
                den += prev.real * prev.real + prev.imag * prev.imag
            if not (dc and k == 0):
                if s > 0.0:
                    omega[k] = sw / s
            if den > 0.0:
                delta += num / den
            elif num > 0.0:
                delta = INFINITY
        if tau != 0.0:
            for j in range(M):
                lam[j] = lam[j] + tau * (f[j] - total[j])
        if delta < tol:
            break
    return u_arr, omega_arr, n, float(delta)


def sample_entropy_counts(x, int m, double r):
    cdef double[::1] v = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n_t = v.shape[0] - m
    cdef Py_ssize_t i, j, s
    cdef long long a = 0, b = 0
    cdef bint ok
    if n_t < 2:
        return 0, 0
    for i in range(n_t - 1):
        for j in range(i + 1, n_t):
            ok = True
            for s in range(m):
                if fabs(v[i + s] - v[j + s]) > r:
                    ok = False
                    break
            if ok:
                b += 1
                if fabs(v[i + m] - v[j + m]) <= r:
                    a += 1
    return int(a), int(b)


cdef double _phi(double[:, ::1] tpl, Py_ssize_t n_t, Py_ssize_t length, double r):
    cdef Py_ssize_t i, j, s
    cdef double d, dd, acc = 0.0
    for i in range(n_t - 1):
        for j in range(i + 1, n_t):
            d = 0.0
            for s in range(length):
                dd = fabs(tpl[i, s] - tpl[j, s])
                if dd > d:
                    d = dd
            d = d / r
            acc += exp(-(d * d))
    return 2.0 * acc / (n_t * (n_t - 1))


def fuzzy_entropy_phi(x, int m, double r):
    xv = np.asarray(x, dtype=np.float64)
    cdef Py_ssize_t n_t = xv.shape[0] - m
    if n_t < 2:
        return 0.0, 0.0
    out = []
    for length in (m, m + 1):
        tpl = np.stack([xv[s:s + n_t] for s in range(length)], axis=1)
        tpl = np.ascontiguousarray(tpl - tpl.mean(axis=1, keepdims=True))
        out.append(_phi(tpl, n_t, length, r))
    return out[0], out[1]


def lempel_ziv(b):
    cdef const unsigned char[::1] s = np.ascontiguousarray(b, dtype=np.uint8)
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t c = 1, l = 1, i = 0, k = 1, k_max = 1
    if n == 0:
        return 0
    if n == 1:
        return 1
    while True:
        if s[i + k - 1] == s[l + k - 1]:
            k += 1
            if l + k > n:
                c += 1
                break
        else:
            if k > k_max:
                k_max = k
            i += 1
            if i == l:
                c += 1
                l += k_max
                if l + 1 > n:
                    break
                i = 0
                k = 1
                k_max = 1
            else:
                k = 1
    return int(c)


def exponential_lifts(y, double tau):
    cdef double[::1] v = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t t, anchor_t = 0
    cdef double anchor_v, env
    cdef long lifts = 0
    if n < 3:
        return 0
    anchor_v = v[0]
    for t in range(1, n - 1):
        if v[t] >= v[t - 1] and v[t] >= v[t + 1]:
            env = anchor_v * exp(-(t - anchor_t) / tau)
            if v[t] > env:
                lifts += 1
                anchor_t = t
                anchor_v = v[t]
    return int(lifts)


def accumulate_sqdist(D, qcol, tcol):
    cdef double[:, ::1] d = D
    cdef double[::1] q = np.ascontiguousarray(qcol, dtype=np.float64)
    cdef double[::1] t = np.ascontiguousarray(tcol, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double diff, qi
    for i in range(d.shape[0]):
        qi = q[i]
        for j in range(d.shape[1]):
            diff = qi - t[j]
            d[i, j] += diff * diff
    return D


def topk_indices(D, kmax):
    cdef double[:, ::1] d = np.ascontiguousarray(D, dtype=np.float64)
    cdef Py_ssize_t nq = d.shape[0]
    cdef Py_ssize_t n = d.shape[1]
    cdef Py_ssize_t kk = min(<Py_ssize_t>kmax, n)
    out_arr = np.empty((nq, kk), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef double[::1] bd = np.empty(kk, dtype=np.float64)
    cdef Py_ssize_t i, j, fill, pos
    cdef double v
    for i in range(nq):
        fill = 0
        for j in range(n):
            v = d[i, j]
            if fill == kk:
                # strict: equal distances keep the lower index already held
                if not (v < bd[kk - 1]):
                    continue
                pos = kk - 1
            else:
                pos = fill
                fill += 1
            while pos > 0 and bd[pos - 1] > v:
                bd[pos] = bd[pos - 1]
                out[i, pos] = out[i, pos - 1]
                pos -= 1
            bd[pos] = v
            out[i, pos] = j
    return out_arr
