"""Reduced Lax functions z(p), zbar(p), flow generators and the evolution
equations they induce on the natural parameters.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ResidualError, ValidationError, WindowError
from .potential import LGPotential, principal_log
from .series import (AT_INFINITY, AT_ZERO, LaurentPoly, TruncatedSeries, log_one_minus,
                     series_exp, series_pow, split_parts)

Z = "z"
ZBAR = "zbar"
_SIDE_ALIASES = {"z": Z, "t": Z, "zbar": ZBAR, "tbar": ZBAR}


def side_of(side: str) -> str:
    try:
        return _SIDE_ALIASES[side]
    except KeyError:
        raise ValidationError(f"unknown side {side!r}; use 'z'/'t' or 'zbar'/'tbar'") from None


def default_window(P: LGPotential, n_max: int = 1) -> int:
    return 2 * n_max + P.K + 4


@dataclass(frozen=True, eq=False)
class LaxExpansion:
    side: str
    series: TruncatedSeries
    u1: complex | None = None
    u2: complex | None = None
    phi: complex | None = None


def log_prod_neg_b(P: LGPotential) -> complex:
    """``sum_i kappa_i Log(-b_i)``, principal logarithm per factor."""
    return complex(sum(k * complex(principal_log(-bi)) for k, bi in zip(P.kappa, P.b)))


def phi_value(P: LGPotential) -> complex:
    """Principal phi with exp(N phi) = prod (-b_i)**kappa_i (I) or c_N (II)."""
    if P.case == "I":
        prod = cmath.exp(log_prod_neg_b(P))
        return complex(principal_log(prod)) / P.N
    return complex(principal_log(P.c[-1])) / P.N


def _z_series(P: LGPotential, L: int) -> TruncatedSeries:
    S = TruncatedSeries.zero(AT_INFINITY, L)
    for kap, bi in zip(P.kappa, P.b):
        S = S + kap * log_one_minus(AT_INFINITY, bi, L)
    if len(P.c):
        S = S + TruncatedSeries.from_powers(AT_INFINITY, {-(k + 1): ck for k, ck in enumerate(P.c)}, L)
    E = series_exp(S * (1.0 / P.Mtilde))
    return TruncatedSeries(AT_INFINITY, -1, E.coeffs)


def _zbar_series(P: LGPotential, L: int) -> TruncatedSeries:
    phi = phi_value(P)
    T = TruncatedSeries.zero(AT_ZERO, L)
    for kap, bi in zip(P.kappa, P.b):
        T = T + kap * log_one_minus(AT_ZERO, 1.0 / bi, L)
    if P.case == "I":
        E = series_exp(T * (1.0 / P.N))
    else:
        cN = complex(P.c[-1])
        u = np.zeros(L, dtype=np.complex128)
        u[0] = 1.0
        for j in range(1, min(P.N, L)):
            u[j] = P.c[P.N - j - 1] / cN
        if P.N < L:
            u[P.N] = log_prod_neg_b(P) / cN
        for j in range(P.N + 1, L):
            u[j] = T.w_coeff(j - P.N) / cN
        E = series_pow(TruncatedSeries(AT_ZERO, 0, u), 1.0 / P.N)
    return TruncatedSeries(AT_ZERO, -1, cmath.exp(phi) * E.coeffs)


def expand_lax(P: LGPotential, side: str, L: int | None = None) -> LaxExpansion:
    """Laurent expansion of z at infinity or of zbar at zero.

    Case I: z = lambda**(1/Mtilde), zbar = lambda**(1/N).
    Case II: z = lambda**(1/Mtilde), zbar = (log lambda)**(1/N).
    """
    side = side_of(side)
    L = default_window(P) if L is None else L
    if L < 4:
        raise WindowError("Lax expansions need a window of at least 4 terms")
    return _expand_cached(P, side, L)


@lru_cache(maxsize=512)
def _expand_cached(P: LGPotential, side: str, L: int) -> LaxExpansion:
    if side == Z:
        z = _z_series(P, L)
        return LaxExpansion(Z, z, u1=z.coeff(0), u2=z.coeff(-1))
    return LaxExpansion(ZBAR, _zbar_series(P, L), phi=phi_value(P))


def generator(P: LGPotential, side: str, n: int, L: int | None = None) -> LaurentPoly:
    """B_n = (z**n)_{>=0} as a polynomial in p, or Bbar_n = (zbar**n)_{<0} in 1/p."""
    side = side_of(side)
    if n < 1:
        raise ValidationError("flow index must be positive")
    L = default_window(P, n) if L is None else L
    if L < n + P.K + 2:
        raise WindowError(f"window {L} too small for generator {n} (need {n + P.K + 2})")
    return _generator_cached(P, side, n, L)


@lru_cache(maxsize=1024)
def _generator_cached(P: LGPotential, side: str, n: int, L: int) -> LaurentPoly:
    s = expand_lax(P, side, L).series ** n
    poly, neg = split_parts(s)
    if side == Z:
        kept, comp = poly, neg
        if comp.powers() and max(comp.powers()) >= 0:
            raise ResidualError("complement of B_n is not O(1/p)")
    else:
        kept, comp = neg, poly
        if comp.powers() and min(comp.powers()) < 0:
            raise ResidualError("complement of Bbar_n is not O(1)")
    out = kept.polynomial()
    if side == Z and out.high != n:
        raise ResidualError(f"deg B_{n} = {out.high}, expected {n}")
    return out


def _generator_sderiv(P: LGPotential, side: str, n: int, L: int, theta_s: np.ndarray, h: float) -> LaurentPoly:
    """Directional central difference of the generator along theta_s."""
    ts = np.max(np.abs(theta_s))
    if ts == 0:
        return LaurentPoly(0, np.zeros(1, dtype=np.complex128))
    eps = h * max(np.max(np.abs(P.theta)), 1.0) / ts
    th = P.theta
    Bp = generator(P.with_theta(th + eps * theta_s), side, n, L)
    Bm = generator(P.with_theta(th - eps * theta_s), side, n, L)
    return (Bp - Bm) * (1.0 / (2 * eps))


def bracket_with_log(P: LGPotential, B: LaurentPoly, Bs: LaurentPoly, theta_s, p) -> np.ndarray:
    """``{B, log lambda}(p) = p (B_p d_s log lambda - B_s d_p log lambda)``."""
    p = np.atleast_1d(np.asarray(p, dtype=np.complex128))
    Ls = P.dlog_dtheta(p) @ np.asarray(theta_s, dtype=np.complex128)
    Lp = P.log_derivs(p)[1]
    return p * (B.deriv()(p) * Ls - Bs(p) * Lp)


def _principal_part_at_zero(P: LGPotential, B: LaurentPoly, Bs: LaurentPoly, theta_s) -> dict[int, complex]:
    dB = B.deriv()
    depth = max(0, -dB.low, -Bs.low) + P.N + 4
    order = depth + 2

    def poly(lp: LaurentPoly) -> TruncatedSeries:
        return TruncatedSeries.from_powers(AT_ZERO, {lp.low + i: c for i, c in enumerate(lp.coeffs)}, order + depth)

    def simple_pole(bi) -> TruncatedSeries:
        # 1/(p - b) = -(1/b) sum_j (p/b)**j
        j = np.arange(order + depth)
        return TruncatedSeries.normalized(AT_ZERO, 0, -(1.0 / bi) * (1.0 / bi) ** j)

    theta_s = np.asarray(theta_s, dtype=np.complex128)
    Ls = TruncatedSeries.zero(AT_ZERO, order + depth)
    Lp = TruncatedSeries.zero(AT_ZERO, order + depth)
    for i, (kap, bi) in enumerate(zip(P.kappa, P.b)):
        pole = simple_pole(bi)
        Ls = Ls + pole * (-kap * theta_s[i])
        Lp = Lp + pole * kap
    if P.case == "I":
        Lp = Lp + TruncatedSeries.from_powers(AT_ZERO, {-1: -P.N}, order + depth)
    else:
        Ls = Ls + TruncatedSeries.from_powers(
            AT_ZERO, {-(k + 1): theta_s[P.M + k] for k in range(P.N)}, order + depth)
        Lp = Lp + TruncatedSeries.from_powers(
            AT_ZERO, {-(k + 2): -(k + 1) * ck for k, ck in enumerate(P.c)}, order + depth)
    pfac = TruncatedSeries.from_powers(AT_ZERO, {1: 1.0}, order + 2 * depth)
    br = pfac * (poly(dB) * Ls - poly(Bs) * Lp)
    return {k: v for k, v in br.powers().items() if k < 0}


def evolution_rhs(P: LGPotential, s_derivs, flow, L: int | None = None, h: float = 1e-6,
                  tol: float = 1e-6):
    """Right-hand sides of the reduced flow ``(side, n)``.

    Returns ``(F, G)`` with ``d b_i / dt_n = F[i]`` and ``d c_k / dt_n = G[k-1]``
    (``G`` empty in Case I), read off from the partial-fraction form
    ``{B_n, log lambda} = -sum_i kappa_i F_i/(p - b_i) + sum_k G_k p**(-k)``.
    """
    side, n = flow
    side = side_of(side)
    theta_s = np.asarray(s_derivs, dtype=np.complex128)
    if theta_s.shape != (len(P.theta),):
        raise ValidationError(f"expected {len(P.theta)} s-derivatives")
    L = default_window(P, n) if L is None else L
    B = generator(P, side, n, L)
    Bs = _generator_sderiv(P, side, n, L, theta_s, h)
    dB = B.deriv()
    F = np.array([bi * (dB(bi) * theta_s[i] + Bs(bi)) for i, bi in enumerate(P.b)],
                 dtype=np.complex128).reshape(-1)
    principal = _principal_part_at_zero(P, B, Bs, theta_s)
    Nmax = P.N if P.case == "II" else 0
    G = np.array([principal.get(-(k + 1), 0j) for k in range(Nmax)], dtype=np.complex128)
    stray = [abs(v) for k, v in principal.items() if -k > Nmax]

    # the reassembled partial fractions must reproduce the bracket everywhere
    rad = 2.5 * max(P.scale, 1.0)
    pts = rad * np.exp(2j * np.pi * (np.arange(8) + 0.3) / 8)
    pts = np.concatenate([pts, 0.37 * np.min(np.abs(P.b)) * np.exp(1j * np.array([0.4, 2.1, 3.9]))])
    exact = bracket_with_log(P, B, Bs, theta_s, pts)
    kap = np.array(P.kappa)
    recon = -(kap * F / (pts[:, None] - P.b[None, :])).sum(axis=1)
    recon = recon + sum(G[k] * pts ** -(k + 1) for k in range(len(G)))
    scale = max(np.max(np.abs(exact)), np.max(np.abs(recon)), 1e-300)
    remainder = max(np.max(np.abs(exact - recon)) / scale, max(stray, default=0.0) / scale)
    if np.any(theta_s) and remainder > tol:
        raise ResidualError(f"bracket has a nonvanishing polynomial remainder ({remainder:.2e})")
    return F, G
