"""Pure-Python reference versions of the compiled kernels.

Coefficient arrays are complex128, lowest order first. Inputs are not
validated here; ``dtoda.series`` checks domains before calling in.
"""
import numpy as np


def mul_trunc(a, b, n):
    out = np.zeros(n, dtype=np.complex128)
    full = np.convolve(a, b)[:n]
    out[:len(full)] = full
    return out


def inv_series(a, n):
    out = np.zeros(n, dtype=np.complex128)
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        j = min(k, len(a) - 1)
        # sum_{i=1..j} a[i] * out[k-i]
        out[k] = -np.dot(a[1:j + 1], out[k - j:k][::-1]) * out[0]
    return out


def exp_series(a, n):
    out = np.zeros(n, dtype=np.complex128)
    out[0] = 1.0
    ja = np.arange(len(a)) * np.asarray(a)
    for k in range(1, n):
        j = min(k, len(a) - 1)
        out[k] = np.dot(ja[1:j + 1], out[k - j:k][::-1]) / k
    return out


def log_series(a, n):
    out = np.zeros(n, dtype=np.complex128)
    for k in range(1, n):
        acc = k * a[k] if k < len(a) else 0.0
        for j in range(max(1, k - len(a) + 1), k):
            acc -= j * out[j] * a[k - j]
        out[k] = acc / k
    return out


def pow_series(a, r, n):
    out = np.zeros(n, dtype=np.complex128)
    out[0] = 1.0
    for k in range(1, n):
        acc = 0.0
        for j in range(1, min(k, len(a) - 1) + 1):
            acc += (r * j - (k - j)) * a[j] * out[k - j]
        out[k] = acc / k
    return out


def log_derivs(p, kappa, b, e0, c):
    p = np.asarray(p, dtype=np.complex128)
    d = p[:, None] - np.asarray(b)[None, :]
    inv = 1.0 / d
    f0 = np.log(d + 0j) @ kappa  # + 0j turns a -0.0 imaginary part into +0.0
    f1 = inv @ kappa
    f2 = -(inv * inv) @ kappa
    if e0 != 0:
        f0 = f0 + e0 * np.log(p + 0j)
        f1 = f1 + e0 / p
        f2 = f2 - e0 / p**2
    for k, ck in enumerate(c, start=1):
        f0 = f0 + ck * p**-k
        f1 = f1 - k * ck * p**(-k - 1)
        f2 = f2 + k * (k + 1) * ck * p**(-k - 2)
    return f0, f1, f2


def newton_polish(coeffs, roots, iters):
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    out = np.array(roots, dtype=np.complex128, copy=True)
    der_c = coeffs[1:] * np.arange(1, len(coeffs))
    for i, x in enumerate(out):
        for _ in range(iters):
            val = np.polynomial.polynomial.polyval(x, coeffs)
            der = np.polynomial.polynomial.polyval(x, der_c)
            if der == 0:
                break
            step = val / der
            x = x - step
            if abs(step) <= 4e-16 * abs(x):
                break
        out[i] = x
    return out
