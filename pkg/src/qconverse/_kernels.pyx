# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the functions in ``_kernels_py``."""

import numpy as np
from libc.math cimport sqrt, exp, log, INFINITY


cdef inline double complex _entry(const double complex[:, ::1] w, int kind, int i, int j,
                                  int a, int b, double inv_sqrt2) noexcept nogil:
    # (W B_q W)[a, b] for the basis element q = (kind, i, j)
    if kind == 0:
        return w[a, i] * w[i, b]
    if kind == 1:
        return (w[a, i] * w[j, b] + w[a, j] * w[i, b]) * inv_sqrt2
    return 1j * (w[a, i] * w[j, b] - w[a, j] * w[i, b]) * inv_sqrt2


def _layout(int n, bint complex_field):
    cdef int k = n * (n - 1) // 2
    cdef int size = n + k * (2 if complex_field else 1)
    kinds = np.zeros(size, dtype=np.intc)
    fi = np.empty(size, dtype=np.intc)
    fj = np.empty(size, dtype=np.intc)
    fi[:n] = np.arange(n)
    fj[:n] = np.arange(n)
    iu, ju = np.triu_indices(n, 1)
    fi[n:n + k] = iu
    fj[n:n + k] = ju
    kinds[n:n + k] = 1
    if complex_field:
        fi[n + k:] = iu
        fj[n + k:] = ju
        kinds[n + k:] = 2
    return kinds, fi, fj


def scaling_matrix_complex(const double complex[:, ::1] w):
    cdef int n = w.shape[0]
    kinds, fi, fj = _layout(n, True)
    cdef int size = kinds.shape[0]
    cdef double s2 = sqrt(2.0)
    cdef double inv_sqrt2 = 1.0 / s2
    out = np.empty((size, size), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef int[::1] kv = kinds
    cdef int[::1] iv = fi
    cdef int[::1] jv = fj
    cdef double complex v
    cdef int p, q
    with nogil:
        for q in range(size):
            for p in range(q, size):
                v = _entry(w, kv[q], iv[q], jv[q], iv[p], jv[p], inv_sqrt2)
                if kv[p] == 0:
                    o[p, q] = v.real
                elif kv[p] == 1:
                    o[p, q] = s2 * v.real
                else:
                    o[p, q] = s2 * v.imag
                o[q, p] = o[p, q]
    return out


def scaling_matrix_real(const double[:, ::1] w):
    cdef int n = w.shape[0]
    kinds, fi, fj = _layout(n, False)
    cdef int size = kinds.shape[0]
    cdef double s2 = sqrt(2.0)
    cdef double inv_sqrt2 = 1.0 / s2
    out = np.empty((size, size), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef int[::1] iv = fi
    cdef int[::1] jv = fj
    cdef int p, q, i, j, a, b
    cdef double v
    with nogil:
        for q in range(size):
            i = iv[q]
            j = jv[q]
            for p in range(q, size):
                a = iv[p]
                b = jv[p]
                if q < n:
                    v = w[a, i] * w[i, b]
                else:
                    v = (w[a, i] * w[j, b] + w[a, j] * w[i, b]) * inv_sqrt2
                if p >= n:
                    v = s2 * v
                o[p, q] = v
                o[q, p] = v
    return out


def shell_test(const double[::1] log_p, const double[::1] log_q, double log_target):
    cdef Py_ssize_t n = log_p.shape[0]
    cdef Py_ssize_t k, boundary = n - 1
    cdef double shift = -INFINITY, qshift = -INFINITY
    cdef double target, term, acc = 0.0, comp = 0.0, y, t
    cdef double gamma = 1.0
    with nogil:
        for k in range(n):
            if log_p[k] > shift:
                shift = log_p[k]
        target = exp(log_target - shift)
        for k in range(n):
            term = exp(log_p[k] - shift)
            if acc + term >= target:
                boundary = k
                if term > 0:
                    gamma = (target - acc) / term
                    gamma = 1.0 if gamma > 1.0 else (0.0 if gamma < 0.0 else gamma)
                else:
                    gamma = 0.0
                break
            y = term - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        for k in range(boundary + 1):
            if log_q[k] > qshift:
                qshift = log_q[k]
        acc = 0.0
        comp = 0.0
        for k in range(boundary):
            y = exp(log_q[k] - qshift) - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        acc = acc + gamma * exp(log_q[boundary] - qshift)
    if acc > 0:
        return boundary, gamma, qshift + log(acc)
    return boundary, gamma, -INFINITY
