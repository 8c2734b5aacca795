"""Extended-precision re-inversion for lambda-coordinate finite differences.

In double precision a central difference at relative step 1e-5 carries
roundoff ~1e-11, comparable to its own truncation error, so observed
convergence orders are noise. Probes here are re-inverted and evaluated at
40 digits; only the final difference quotient is rounded to complex128.
"""
from __future__ import annotations

import mpmath
import numpy as np

from .errors import ConvergenceError
from .potential import CriticalFrame, LGPotential, critical_frame, envelope_jacobian, principal_log

ctx = mpmath.MPContext()
ctx.dps = 40


def log_refs(P: LGPotential, points) -> np.ndarray:
    """Float principal ``arg(p - b_i)`` at base points, rows indexed by point."""
    points = np.atleast_1d(np.asarray(points, dtype=np.complex128))
    return principal_log(points[:, None] - P.b[None, :]).imag


class HPPoint:
    """Natural parameters with their critical frame, all as mpc.

    ``refs`` pins the branch of each log(gamma_n - b_i) to the float principal
    value at the base point, so probes on a branch cut stay continuous.
    """

    def __init__(self, P: LGPotential, b, c, gamma, lam=None, refs=None):
        self.P = P
        self.b = list(b)
        self.c = list(c)
        self.gamma = list(gamma)
        self.lam = lam
        self.refs = refs

    def f0(self, p, ref=None):
        """log lambda(p); each log(p - b_i) taken nearest to ``ref[i]`` when given."""
        P = self.P
        logs = [ctx.log(p - bi) for bi in self.b]
        if ref is not None:
            two_pi = 2 * ctx.pi
            logs = [t + 1j * two_pi * round(float((r - t.imag) / two_pi)) for t, r in zip(logs, ref)]
        s = ctx.fsum(k * t for k, t in zip(P.kappa, logs))
        if P.case == "I":
            return s - P.N * ctx.log(p)
        return s + ctx.fsum(ck * p ** -(k + 1) for k, ck in enumerate(self.c))

    def f1(self, p):
        P = self.P
        s = ctx.fsum(k / (p - bi) for k, bi in zip(P.kappa, self.b))
        if P.case == "I":
            return s - P.N / p
        return s - ctx.fsum((k + 1) * ck * p ** -(k + 2) for k, ck in enumerate(self.c))

    def f2(self, p):
        P = self.P
        s = -ctx.fsum(k / (p - bi) ** 2 for k, bi in zip(P.kappa, self.b))
        if P.case == "I":
            return s + P.N / p ** 2
        return s + ctx.fsum((k + 1) * (k + 2) * ck * p ** -(k + 3) for k, ck in enumerate(self.c))

    def lam_at(self, p, ref=None):
        return ctx.exp(self.f0(p, ref))

    def dlam_at(self, p, ref=None):
        return self.lam_at(p, ref) * self.f1(p)

    def refine(self, iters: int = 60):
        tol = ctx.mpf(10) ** (-ctx.dps + 6)
        g = []
        for x in self.gamma:
            for _ in range(iters):
                dx = self.f1(x) / self.f2(x)
                x = x - dx
                if abs(dx) <= tol * abs(x):
                    break
            g.append(x)
        self.gamma = g
        refs = self.refs if self.refs is not None else [None] * len(g)
        self.lam = [self.lam_at(x, r) for x, r in zip(g, refs)]
        return self

    @property
    def alpha(self):
        return [1 / (g * lam * self.f2(g)) for g, lam in zip(self.gamma, self.lam)]

    def theta(self):
        return self.b + self.c


def to_hp(P: LGPotential, F: CriticalFrame) -> HPPoint:
    mk = lambda xs: [ctx.mpc(complex(x)) for x in xs]
    return HPPoint(P, mk(P.b), mk(P.c), mk(F.gamma), refs=log_refs(P, F.gamma)).refine()


def hp_invert(base: HPPoint, J: np.ndarray, target, max_iter: int = 40) -> HPPoint:
    """Quasi-Newton in theta with the base envelope Jacobian, residuals at full precision."""
    Jinv = np.linalg.inv(J)
    Jm = [[ctx.mpc(complex(v)) for v in row] for row in Jinv]
    M = base.P.M
    th = base.theta()
    pt = base
    tol = ctx.mpf(10) ** (-ctx.dps + 4)
    scale = max(abs(t) for t in target)
    for _ in range(max_iter):
        r = [l - t for l, t in zip(pt.lam, target)]
        if max(abs(x) for x in r) <= tol * scale:
            return pt
        th = [th[i] - ctx.fsum(Jm[i][j] * r[j] for j in range(len(r))) for i in range(len(th))]
        pt = HPPoint(base.P, th[:M], th[M:], pt.gamma, refs=base.refs).refine()
    raise ConvergenceError("extended-precision re-inversion did not converge")


class HPProbe:
    """Central differences in lambda_m with extended-precision probes."""

    def __init__(self, P: LGPotential, F: CriticalFrame | None = None):
        F = critical_frame(P) if F is None else F
        self.P, self.F = P, F
        self.base = to_hp(P, F)
        self.J = envelope_jacobian(P, F)

    def partial(self, func, m: int, h: float, log: bool = False) -> np.ndarray:
        lam = list(self.base.lam)
        up, dn = lam[:], lam[:]
        if log:
            up[m] = lam[m] * ctx.exp(h)
            dn[m] = lam[m] * ctx.exp(-h)
            width = ctx.mpf(2 * h)
        else:
            d = ctx.mpf(h) * abs(lam[m])
            up[m] = lam[m] + d
            dn[m] = lam[m] - d
            width = 2 * d
        fp = func(hp_invert(self.base, self.J, up))
        fm = func(hp_invert(self.base, self.J, dn))
        return np.array([complex((a - b) / width) for a, b in zip(fp, fm)], dtype=np.complex128)

    def jacobian(self, func, h: float, log: bool = False) -> np.ndarray:
        return np.stack([self.partial(func, m, h, log) for m in range(self.P.K)])
