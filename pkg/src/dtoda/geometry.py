"""Lame coefficients of the three diagonal metrics carried by the critical
values, their rotation coefficients, and FD checks of the Darboux, Egorov,
Combescure and homogeneity identities.

Branch policy: sigma_n is the principal root of alpha_n/gamma_n, and the other
two Lame sequences are derived from it, sigma_tilde = sigma gamma and
sigma_hat = sigma sqrt(lambda_n) (principal sqrt(lambda_n)). At probe points
every root is continued from the base point by picking the sign nearest it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._fd import Residual, compare
from ._hp import HPPoint, HPProbe, ctx
from .loewner import DEFAULT_H, LownerFrame, alpha_coeffs
from .potential import LGPotential, critical_frame


@dataclass(frozen=True, eq=False)
class MetricFrame:
    sigma: np.ndarray
    sigma_tilde: np.ndarray
    sigma_hat: np.ndarray
    sqrt_lam: np.ndarray
    beta: np.ndarray
    beta_hat: np.ndarray
    loewner: LownerFrame

    @property
    def h(self):
        return self.sigma

    @property
    def h_tilde(self):
        return self.sigma_tilde

    @property
    def h_hat(self):
        return self.sigma_hat

    @property
    def combescure_ratio(self) -> np.ndarray:
        return self.sigma_tilde / self.sigma


def principal_sqrt(x) -> np.ndarray:
    """Principal root, with numerically real inputs snapped onto the real axis
    so that roundoff in the sign of a zero imaginary part cannot flip it."""
    x = np.asarray(x, dtype=np.complex128)
    real = np.abs(x.imag) <= 1e-13 * np.abs(x)
    return np.sqrt(np.where(real, x.real + 0j, x))


def _near_root(x, ref):
    s = principal_sqrt(x)
    if ref is None:
        return s
    return np.where(np.abs(s - ref) <= np.abs(s + ref), s, -s)


def beta_formula(sigma, gamma) -> np.ndarray:
    """beta_mn = sigma_m sigma_n gamma_m gamma_n/(gamma_m - gamma_n)**2, zero diagonal."""
    K = len(gamma)
    out = np.zeros((K, K), dtype=np.complex128)
    off = ~np.eye(K, dtype=bool)
    sg = sigma * gamma
    d = gamma[:, None] - gamma[None, :]
    out[off] = (sg[:, None] * sg[None, :])[off] / d[off] ** 2
    return out


def metric_frames(L: LownerFrame, reference: MetricFrame | None = None) -> MetricFrame:
    g, a, lam = L.gamma, L.alpha, L.lam
    sigma = _near_root(a / g, None if reference is None else reference.sigma)
    sq = _near_root(lam, None if reference is None else reference.sqrt_lam)
    beta = beta_formula(sigma, g)
    return MetricFrame(sigma, sigma * g, sigma * sq, sq, beta, sq[:, None] * sq[None, :] * beta, L)


# extended-precision quantities on probe points ------------------------------------


def _hp_near_root(x, ref):
    s = ctx.sqrt(x)
    return s if abs(s - ref) <= abs(s + ref) else -s


def _hp_geometry(base: MetricFrame):
    K = len(base.sigma)

    def fn(q: HPPoint):
        a, g, lam = q.alpha, q.gamma, q.lam
        x = [ai / gi for ai, gi in zip(a, g)]
        sig = [_hp_near_root(xi, complex(r)) for xi, r in zip(x, base.sigma)]
        sq = [_hp_near_root(li, complex(r)) for li, r in zip(lam, base.sqrt_lam)]
        beta = [[0 if m == n else sig[m] * sig[n] * g[m] * g[n] / (g[m] - g[n]) ** 2 for n in range(K)]
                for m in range(K)]
        bhat = [[sq[m] * sq[n] * beta[m][n] for n in range(K)] for m in range(K)]
        return (list(g) + x + [ai * gi for ai, gi in zip(a, g)] + [li * xi for li, xi in zip(lam, x)]
                + [v for row in beta for v in row] + [v for row in bhat for v in row])

    def split(arr):
        # arr [..., 4K + 2K^2] -> dict of views
        return {"gamma": arr[..., :K], "x": arr[..., K:2 * K], "ag": arr[..., 2 * K:3 * K],
                "lx": arr[..., 3 * K:4 * K],
                "beta": arr[..., 4 * K:4 * K + K * K].reshape(arr.shape[:-1] + (K, K)),
                "bhat": arr[..., 4 * K + K * K:].reshape(arr.shape[:-1] + (K, K))}

    return fn, split


def _setup(P: LGPotential, h: float):
    F = critical_frame(P)
    L = alpha_coeffs(F, h)
    MF = metric_frames(L)
    probe = HPProbe(P, F)
    fn, split = _hp_geometry(MF)
    return F, L, MF, probe, fn, split


def rotation_check(P: LGPotential, h: float = DEFAULT_H) -> dict[str, Residual]:
    """Rotation coefficients from FD of the Lame coefficients against the closed formula."""
    if P.K < 2:
        z = Residual(0.0, 0.0)
        return {"h": z, "h_tilde": z, "h_hat": z}
    F, L, MF, probe, fn, split = _setup(P, h)
    d = split(probe.jacobian(fn, h))          # [m, ...]
    dl = split(probe.jacobian(fn, h, log=True))
    off = ~np.eye(P.K, dtype=bool)
    g, a, lam = F.gamma, L.alpha, F.lam
    ratio = lambda s: s[None, :] / s[:, None]
    b_h = ratio(MF.sigma) * 0.5 * d["x"] / (a / g)[None, :]
    b_t = ratio(MF.sigma_tilde) * 0.5 * d["ag"] / (a * g)[None, :]
    b_hat = ratio(MF.sigma_hat) * 0.5 * dl["lx"] / (lam * a / g)[None, :]
    scale = np.abs(MF.beta).max()
    scale_hat = np.abs(MF.beta_hat).max()
    return {"h": compare(b_h[off], MF.beta[off], scale),
            "h_tilde": compare(b_t[off], MF.beta[off], scale),
            "h_hat": compare(b_hat[off], MF.beta_hat[off], scale_hat)}


def geometry_residuals(P: LGPotential, h: float = DEFAULT_H) -> dict:
    """Residual record; entries that need more indices than K provides are None."""
    F, L, MF, probe, fn, split = _setup(P, h)
    K = P.K
    out = {"darboux": None, "log_darboux": None, "log_darboux_opposite_sign": None, "egorov": None,
           "combescure": None, "combescure_vs_gt": None, "flatness_sum": None, "hat_homogeneity": None}
    if K < 2:
        return out
    d = split(probe.jacobian(fn, h))            # d/d lambda_k, leading axis k
    dl = split(probe.jacobian(fn, h, log=True))  # d/d log lambda_k
    g, a, lam = F.gamma, L.alpha, F.lam
    beta, bhat = MF.beta, MF.beta_hat
    off = ~np.eye(K, dtype=bool)

    if K >= 3:
        fd, ex, exh, fdh, flipped, sc, sch = [], [], [], [], [], [], []
        for k in range(K):
            for m in range(K):
                for n in range(K):
                    if len({k, m, n}) < 3:
                        continue
                    fd.append(d["beta"][k, m, n])
                    ex.append(beta[m, k] * beta[k, n])
                    sc.append(abs(beta[m, n]) / abs(lam[k]))
                    fdh.append(dl["bhat"][k, m, n])
                    exh.append(bhat[m, k] * bhat[k, n])
                    sch.append(abs(bhat[m, n]))
                    flipped.append(dl["bhat"][k, m, n] + bhat[m, k] * bhat[k, n])
        out["darboux"] = compare(fd, ex, sc)
        out["log_darboux"] = compare(fdh, exh, sch)
        # sign-flipped variant dbhat/dlog + bhat bhat, reported raw; it does not vanish
        out["log_darboux_opposite_sign"] = float(np.max(np.abs(flipped)))

    # Egorov: d(h_n^2)/d lambda_m symmetric
    dx = d["x"]
    out["egorov"] = compare(dx[off], dx.T[off], np.abs(dx).max())

    # Combescure with w = gamma: (1/(w_m - w_n)) dw_n/dlambda_m = dlog h_n/dlambda_m
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = d["gamma"] / (g[:, None] - g[None, :])
        gt = a[:, None] * g[None, :] / (g[:, None] - g[None, :]) ** 2
    rhs = 0.5 * dx / (a / g)[None, :]
    out["combescure"] = compare(lhs[off], rhs[off], np.abs(gt[off]))
    out["combescure_vs_gt"] = compare(lhs[off], gt[off], np.abs(gt[off]))

    flat = d["beta"].sum(axis=0)
    out["flatness_sum"] = {"max_abs": float(np.max(np.abs(flat[off]))),
                           "relative": float(np.max(np.abs(flat[off])) / np.max(np.abs(d["beta"])))}
    homog = dl["bhat"].sum(axis=0)
    out["hat_homogeneity"] = compare(homog[off], np.zeros(off.sum()), np.abs(bhat[off]))
    return out
