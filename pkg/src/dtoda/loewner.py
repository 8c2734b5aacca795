"""Radial Loewner coefficients and finite-difference checks of the identities
they satisfy in the critical-value coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._fd import LambdaProbe, Residual, compare, sample_points
from ._hp import HPPoint, HPProbe, ctx, log_refs
from .errors import FrameError, ValidationError
from .lax import expand_lax, log_prod_neg_b
from .potential import CriticalFrame, LGPotential, critical_frame

DEFAULT_H = 1e-5


def _probe(P, F, precision):
    if precision == "extended":
        return HPProbe(P, F)
    if precision == "double":
        return LambdaProbe(P, F)
    raise ValidationError("precision must be 'extended' or 'double'")


@dataclass(frozen=True, eq=False)
class LownerFrame:
    alpha: np.ndarray
    frame: CriticalFrame
    fd_step: float = DEFAULT_H

    @property
    def gamma(self) -> np.ndarray:
        return self.frame.gamma

    @property
    def lam(self) -> np.ndarray:
        return self.frame.lam


def alpha_coeffs(F: CriticalFrame, fd_step: float = DEFAULT_H) -> LownerFrame:
    """alpha_n = 1/(gamma_n lambda''(gamma_n))."""
    d2 = np.asarray(F.d2)
    if np.any(np.abs(d2) <= 1e-14 * np.maximum(np.abs(F.lam) / np.abs(F.gamma) ** 2, 1e-300)):
        raise FrameError("degenerate critical point: lambda'' vanishes")
    return LownerFrame(1.0 / (F.gamma * d2), F, fd_step)


def exp_N_phi(P: LGPotential) -> complex:
    """e^{N phi}: prod (-b_i)**kappa_i in Case I, c_N in Case II."""
    if P.case == "I":
        return complex(np.exp(log_prod_neg_b(P)))
    return complex(P.c[-1])


def loewner_residual(P: LGPotential, p_samples=None, h: float = DEFAULT_H, seed: int = 0,
                     precision: str = "extended") -> Residual:
    """FD of lambda(p) in lambda_n against alpha_n p/(p - gamma_n) lambda'(p)."""
    F = critical_frame(P)
    A = alpha_coeffs(F, h)
    if p_samples is None:
        p_samples = sample_points(P, 8, np.random.default_rng(seed), F)
    p = np.asarray(p_samples, dtype=np.complex128)
    avoid = np.concatenate([[0.0], P.b, F.gamma])
    if np.min(np.abs(p[:, None] - avoid[None, :])) < 1e-6 * max(P.scale, 1.0):
        raise ValidationError("sample points must avoid 0, b_i and gamma_n")
    if precision == "extended":
        pm = [ctx.mpc(complex(x)) for x in p]
        refs = log_refs(P, p)
        fd = HPProbe(P, F).jacobian(lambda q: [q.lam_at(x, r) for x, r in zip(pm, refs)], h)
    else:
        fd = _probe(P, F, precision).jacobian(lambda Q, _: Q(p), h)
    lp = P.dlambda(p)
    exact = A.alpha[:, None] * p[None, :] / (p[None, :] - F.gamma[:, None]) * lp[None, :]
    scale = np.abs(P(p))[None, :] / np.abs(F.lam)[:, None]
    return compare(fd, exact, scale)


def _off_diag(K: int) -> np.ndarray:
    return ~np.eye(K, dtype=bool)


def gt_exact(A: LownerFrame) -> dict[str, np.ndarray]:
    """Closed-form right-hand sides indexed [m, n] (diagonal meaningless)."""
    g, a = A.gamma, A.alpha
    gm, gn = g[:, None], g[None, :]
    am, an = a[:, None], a[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        d = gm - gn
        return {
            "gamma": am * gn / d,
            "alpha": am * an * (gm + gn) / d ** 2,
            "alpha_gamma": 2 * (am * gm) * (an * gn) / d ** 2,
            "alpha_over_gamma": 2 * gm * gn / d ** 2 * (am / gm) * (an / gn),
        }


def _gt_quantities(Q: LGPotential, F: CriticalFrame) -> np.ndarray:
    a = alpha_coeffs(F).alpha
    return np.stack([F.gamma, a, a * F.gamma, a / F.gamma])


def _gt_quantities_hp(q: HPPoint) -> list:
    a = q.alpha
    g = q.gamma
    return g + a + [x * y for x, y in zip(a, g)] + [x / y for x, y in zip(a, g)]


def gt_residual(P: LGPotential, h: float = DEFAULT_H, precision: str = "extended") -> dict[str, Residual]:
    """FD checks of the Gibbons-Tsarev system and its product/quotient forms."""
    F = critical_frame(P)
    keys = ("gamma", "alpha", "alpha_gamma", "alpha_over_gamma")
    if P.K < 2:
        return {k: Residual(0.0, 0.0) for k in keys}
    A = alpha_coeffs(F, h)
    base = _gt_quantities(P, F)
    if precision == "extended":
        fd = HPProbe(P, F).jacobian(_gt_quantities_hp, h).reshape(P.K, 4, P.K)  # [m, q, n]
    else:
        fd = _probe(P, F, precision).jacobian(_gt_quantities, h)
    exact = gt_exact(A)
    mask = _off_diag(P.K)
    out = {}
    for q, key in enumerate(keys):
        scale = np.abs(base[q])[None, :] / np.abs(F.lam)[:, None]
        out[key] = compare(fd[:, q, :][mask], exact[key][mask], scale[mask] * np.ones_like(mask)[mask])
    # potential existence: d(alpha_n gamma_n)/d lambda_m symmetric in (m, n)
    sym = fd[:, 2, :]
    out["alpha_gamma_symmetry"] = compare(sym, sym.T, np.abs(sym).max())
    return out


def _lax_potentials(Q: LGPotential, F: CriticalFrame) -> np.ndarray:
    z = expand_lax(Q, "z")
    return np.array([z.u1, z.u2, exp_N_phi(Q)])


def _lax_potentials_hp(q: HPPoint) -> list:
    # closed forms of the two leading coefficients of z = p exp(S/Mtilde)
    P = q.P
    Mt = P.Mtilde
    s1 = -ctx.fsum(k * bi for k, bi in zip(P.kappa, q.b))
    s2 = -ctx.fsum(k * bi ** 2 for k, bi in zip(P.kappa, q.b)) / 2
    if P.case == "II":
        s1 += q.c[0]
        if P.N >= 2:
            s2 += q.c[1]
        eN = q.c[-1]
    else:
        eN = ctx.fprod((-bi) ** k for k, bi in zip(P.kappa, q.b))
    return [s1 / Mt, s2 / Mt + s1 ** 2 / (2 * Mt ** 2), eN]


def potential_relations_residual(P: LGPotential, h: float = DEFAULT_H,
                                 precision: str = "extended") -> dict[str, Residual]:
    """alpha_n = du1/dlambda_n, alpha_n gamma_n = du2/dlambda_n, alpha_n/gamma_n = dphi/dlambda_n."""
    F = critical_frame(P)
    A = alpha_coeffs(F, h)
    base = _lax_potentials(P, F)
    if precision == "extended":
        fd = HPProbe(P, F).jacobian(_lax_potentials_hp, h)  # [n, q]
    else:
        fd = _probe(P, F, precision).jacobian(_lax_potentials, h)
    a, g = A.alpha, A.gamma
    e = base[2]
    dphi = fd[:, 2] / (P.N * e)
    inv = 1.0 / np.abs(F.lam)
    return {
        "u1": compare(fd[:, 0], a, np.abs(base[0]) * inv),
        "u2": compare(fd[:, 1], a * g, np.abs(base[1]) * inv),
        "phi": compare(dphi, a / g, inv / abs(P.N)),
    }


def alpha_limit_ratio(P: LGPotential, n: int, eps: float = 1e-3, h: float = DEFAULT_H) -> complex:
    """[d lambda(p)/d lambda_n] / (alpha_n p/(p - gamma_n) lambda'(p)) at p = gamma_n (1 + eps)."""
    F = critical_frame(P)
    A = alpha_coeffs(F, h)
    p = F.gamma[n] * (1 + eps)
    pm = ctx.mpc(complex(p))
    ref = log_refs(P, p)[0]
    fd = HPProbe(P, F).partial(lambda q: [q.lam_at(pm, ref)], n, h)[0]
    return complex(fd / (A.alpha[n] * p / (p - F.gamma[n]) * P.dlambda(p)[0]))
