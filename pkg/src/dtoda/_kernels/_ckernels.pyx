# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: truncated power-series recurrences, batched
log-derivative evaluation and Newton polishing of polynomial roots.

Every routine mirrors a function in ``_pykernels`` with identical
semantics; the pure-Python module is the reference.
"""
import numpy as np
from libc.math cimport atan2, log, hypot, fabs

ctypedef double complex cplx


cdef inline cplx _clog(cplx z) nogil:
    # adding 0.0 maps a -0.0 imaginary part to +0.0, keeping Log(-x) = log x + i pi
    return log(hypot(z.real, z.imag)) + 1j * atan2(z.imag + 0.0, z.real)


def mul_trunc(const cplx[::1] a, const cplx[::1] b, Py_ssize_t n):
    cdef Py_ssize_t k, i, na = a.shape[0], nb = b.shape[0], lo, hi
    out = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] c = out
    cdef cplx acc
    with nogil:
        for k in range(n):
            acc = 0
            lo = k - nb + 1
            if lo < 0:
                lo = 0
            hi = k if k < na - 1 else na - 1
            for i in range(lo, hi + 1):
                acc = acc + a[i] * b[k - i]
            c[k] = acc
    return out


def inv_series(const cplx[::1] a, Py_ssize_t n):
    cdef Py_ssize_t k, j, na = a.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] b = out
    cdef cplx acc, inv0 = 1.0 / a[0]
    with nogil:
        b[0] = inv0
        for k in range(1, n):
            acc = 0
            for j in range(1, (k if k < na - 1 else na - 1) + 1):
                acc = acc + a[j] * b[k - j]
            b[k] = -acc * inv0
    return out


def exp_series(const cplx[::1] a, Py_ssize_t n):
    cdef Py_ssize_t k, j, na = a.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] b = out
    cdef cplx acc
    with nogil:
        b[0] = 1.0
        for k in range(1, n):
            acc = 0
            for j in range(1, (k if k < na - 1 else na - 1) + 1):
                acc = acc + j * a[j] * b[k - j]
            b[k] = acc / k
    return out


def log_series(const cplx[::1] a, Py_ssize_t n):
    cdef Py_ssize_t k, j, na = a.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] b = out
    cdef cplx acc, ak
    with nogil:
        for k in range(1, n):
            ak = a[k] if k < na else 0
            acc = k * ak
            for j in range(1, k):
                if k - j < na:
                    acc = acc - j * b[j] * a[k - j]
            b[k] = acc / k
    return out


def pow_series(const cplx[::1] a, double r, Py_ssize_t n):
    cdef Py_ssize_t k, j, na = a.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] b = out
    cdef cplx acc
    with nogil:
        b[0] = 1.0
        for k in range(1, n):
            acc = 0
            for j in range(1, (k if k < na - 1 else na - 1) + 1):
                acc = acc + (r * j - (k - j)) * a[j] * b[k - j]
            b[k] = acc / k
    return out


def log_derivs(const cplx[::1] p, const double[::1] kappa, const cplx[::1] b,
               double e0, const cplx[::1] c):
    cdef Py_ssize_t n = p.shape[0], m = b.shape[0], nc = c.shape[0]
    cdef Py_ssize_t s, i, k
    f0 = np.empty(n, dtype=np.complex128)
    f1 = np.empty(n, dtype=np.complex128)
    f2 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] v0 = f0, v1 = f1, v2 = f2
    cdef cplx x, d, inv, acc0, acc1, acc2, ip, ipk
    with nogil:
        for s in range(n):
            x = p[s]
            acc0 = 0
            acc1 = 0
            acc2 = 0
            for i in range(m):
                d = x - b[i]
                inv = 1.0 / d
                acc0 = acc0 + kappa[i] * _clog(d)
                acc1 = acc1 + kappa[i] * inv
                acc2 = acc2 - kappa[i] * inv * inv
            ip = 1.0 / x
            if e0 != 0:
                acc0 = acc0 + e0 * _clog(x)
                acc1 = acc1 + e0 * ip
                acc2 = acc2 - e0 * ip * ip
            ipk = ip
            for k in range(1, nc + 1):
                acc0 = acc0 + c[k - 1] * ipk
                acc1 = acc1 - k * c[k - 1] * ipk * ip
                acc2 = acc2 + k * (k + 1) * c[k - 1] * ipk * ip * ip
                ipk = ipk * ip
            v0[s] = acc0
            v1[s] = acc1
            v2[s] = acc2
    return f0, f1, f2


def newton_polish(const cplx[::1] coeffs, const cplx[::1] roots, int iters):
    cdef Py_ssize_t nr = roots.shape[0], deg = coeffs.shape[0] - 1, r, j
    cdef int it
    out = np.array(roots, dtype=np.complex128, copy=True)
    cdef cplx[::1] z = out
    cdef cplx val, der, step, x
    with nogil:
        for r in range(nr):
            x = z[r]
            for it in range(iters):
                val = coeffs[deg]
                der = 0
                for j in range(deg - 1, -1, -1):
                    der = der * x + val
                    val = val * x + coeffs[j]
                if der == 0:
                    break
                step = val / der
                x = x - step
                if hypot(step.real, step.imag) <= 4e-16 * hypot(x.real, x.imag):
                    break
            z[r] = x
    return out
