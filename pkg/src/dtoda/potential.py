"""Landau-Ginzburg potentials of Cases I and II and their critical frames.

Case I:  lambda(p) = p**(-N) * prod_i (p - b_i)**kappa_i
Case II: lambda(p) = prod_i (p - b_i)**kappa_i * exp(sum_k c_k p**(-k))

The natural parameters ``theta`` are ``b`` (Case I) or ``b`` followed by
``c`` (Case II). Their number always equals the number ``K`` of critical
points, so the critical values form a coordinate system.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import linear_sum_assignment

from . import _kernels as K
from .errors import ConvergenceError, DegeneracyError, FrameError, ValidationError

COLLISION_TOL = 1e-8
CASES = ("I", "II")


def principal_log(z):
    """Principal logarithm with arguments in (-pi, pi], whatever the sign of a zero imaginary part."""
    return np.log(np.asarray(z, dtype=np.complex128) + 0j)


@dataclass(frozen=True, eq=False)
class LGPotential:
    case: str
    N: int
    kappa: tuple
    b: np.ndarray
    c: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128))

    def __post_init__(self):
        object.__setattr__(self, "kappa", tuple(float(k) for k in self.kappa))
        object.__setattr__(self, "b", np.array(self.b, dtype=np.complex128).reshape(-1))
        object.__setattr__(self, "c", np.array(self.c, dtype=np.complex128).reshape(-1))
        problems = _check(self)
        if problems:
            raise ValidationError("; ".join(problems))

    @property
    def M(self) -> int:
        return len(self.kappa)

    @property
    def Mtilde(self) -> float:
        s = float(sum(self.kappa))
        return s - self.N if self.case == "I" else s

    @property
    def K(self) -> int:
        return self.M if self.case == "I" else self.M + self.N

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([self.b, self.c])

    @property
    def labels(self) -> list[str]:
        return [f"b{i + 1}" for i in range(self.M)] + [f"c{k + 1}" for k in range(len(self.c))]

    @cached_property
    def _kappa_arr(self) -> np.ndarray:
        return np.array(self.kappa, dtype=np.float64)

    @property
    def scale(self) -> float:
        """Typical size of p on the parameter configuration."""
        sizes = [abs(x) for x in self.b]
        sizes += [abs(ck) ** (1.0 / (k + 1)) for k, ck in enumerate(self.c)]
        return max(sizes + [1e-300])

    def with_theta(self, theta) -> "LGPotential":
        theta = np.asarray(theta, dtype=np.complex128)
        return LGPotential(self.case, self.N, self.kappa, theta[: self.M], theta[self.M:])

    def scaled(self, rho: complex) -> "LGPotential":
        """Image under the homogeneity action b -> rho b, c_k -> rho**k c_k."""
        k = np.arange(1, len(self.c) + 1)
        return LGPotential(self.case, self.N, self.kappa, rho * self.b, self.c * rho**k)

    # evaluation -------------------------------------------------------

    def log_derivs(self, p):
        """``(log lambda, (log lambda)', (log lambda)'')`` at the points ``p``.

        Principal branch for every ``log(p - b_i)`` and for ``log p``.
        """
        p = np.atleast_1d(np.asarray(p, dtype=np.complex128))
        if np.any(p == 0) or np.any(p[:, None] == self.b[None, :]):
            raise ValidationError("log-derivatives evaluated at a pole or zero of lambda")
        e0 = -float(self.N) if self.case == "I" else 0.0
        return K.log_derivs(p, self._kappa_arr, self.b, e0, self.c)

    def log_lambda(self, p):
        return self.log_derivs(p)[0]

    def __call__(self, p):
        """lambda(p)."""
        return np.exp(self.log_derivs(p)[0])

    def dlambda(self, p):
        f0, f1, _ = self.log_derivs(p)
        return np.exp(f0) * f1

    def dlog_dtheta(self, p) -> np.ndarray:
        """Matrix ``d log lambda(p_s) / d theta_j`` with rows indexed by ``p``."""
        p = np.atleast_1d(np.asarray(p, dtype=np.complex128))
        cols = [-kap / (p - bi) for kap, bi in zip(self.kappa, self.b)]
        cols += [p ** -(k + 1) for k in range(len(self.c))]
        return np.stack(cols, axis=1)

    @cached_property
    def Q(self) -> np.ndarray:
        """Numerator of d log lambda / dp, ascending coefficients."""
        full = npoly.polyfromroots(self.b) if self.M else np.ones(1)
        partial = np.zeros(1, dtype=np.complex128)
        for i, kap in enumerate(self.kappa):
            others = np.delete(self.b, i)
            partial = npoly.polyadd(partial, kap * (npoly.polyfromroots(others) if len(others) else np.ones(1)))
        if self.case == "I":
            q = npoly.polyadd(-self.N * full, npoly.polymulx(partial))
        else:
            shift = np.zeros(self.N + 2, dtype=np.complex128)
            shift[-1] = 1.0
            poles = np.zeros(self.N + 1, dtype=np.complex128)
            for k, ck in enumerate(self.c, start=1):
                poles[self.N - k] = k * ck
            q = npoly.polysub(npoly.polymul(shift, partial), npoly.polymul(poles, full))
        q = np.asarray(q, dtype=np.complex128)
        return q[: self.K + 1]


def _check(P: LGPotential) -> list[str]:
    problems = []
    if P.case not in CASES:
        return [f"case must be one of {CASES}, got {P.case!r}"]
    if int(P.N) != P.N:
        problems.append("N must be an integer")
    if P.case == "I" and P.N == 0:
        problems.append("N must be nonzero")
    if P.case == "II" and P.N <= 0:
        problems.append("N must be positive")
    if P.M == 0:
        problems.append("at least one factor (p - b_i) is required")
    if len(P.b) != P.M:
        problems.append(f"expected {P.M} values b_i, got {len(P.b)}")
    if any(k == 0 for k in P.kappa):
        problems.append("kappa_i must be nonzero")
    if P.Mtilde <= 0:
        problems.append("Mtilde must be positive")
    if np.any(P.b == 0):
        problems.append("b_i must be nonzero")
    if len(set(P.b.tolist())) != len(P.b):
        problems.append("b_i must be pairwise distinct")
    if P.case == "I" and len(P.c):
        problems.append("Case I takes no coefficients c_k")
    if P.case == "II":
        if len(P.c) != P.N:
            problems.append(f"expected N = {P.N} coefficients c_k, got {len(P.c)}")
        elif P.c[-1] == 0:
            problems.append("c_N must be nonzero")
    return problems


def validate_potential(case, N, kappa, b, c=()) -> LGPotential:
    """Build a potential from raw parameters, naming every violated condition."""
    case = str(case).upper().replace("CASE", "").strip()
    return LGPotential(case, int(N), tuple(kappa), b, c)


@dataclass(frozen=True, eq=False)
class CriticalFrame:
    gamma: np.ndarray
    lam: np.ndarray
    d2: np.ndarray
    separation: float
    Qcoeffs: np.ndarray
    loglam: np.ndarray

    @property
    def K(self) -> int:
        return len(self.gamma)


def _lex_order(gamma: np.ndarray) -> np.ndarray:
    scale = max(np.max(np.abs(gamma)), 1e-300)
    return np.lexsort((gamma.imag, np.round(gamma.real / scale, 9)))


def match_order(reference: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Permutation of ``gamma`` nearest to ``reference`` pointwise."""
    cost = np.abs(reference[:, None] - gamma[None, :])
    _, perm = linear_sum_assignment(cost)
    return perm


def critical_frame(P: LGPotential, reference: CriticalFrame | None = None) -> CriticalFrame:
    """Critical points, values and second derivatives of ``P``.

    Ordered lexicographically (real part, then imaginary part) unless a
    ``reference`` frame is given, in which case the ordering follows it.
    """
    q = P.Q
    if len(q) != P.K + 1 or q[-1] == 0:
        raise FrameError("numerator polynomial has the wrong degree")
    gamma = npoly.polyroots(q)
    gamma = K.newton_polish(q, gamma, 8)
    if reference is not None:
        gamma = gamma[match_order(reference.gamma, gamma)]
    else:
        gamma = gamma[_lex_order(gamma)]
    scale = max(np.max(np.abs(gamma)), 1e-300)
    if P.K > 1:
        diff = np.abs(gamma[:, None] - gamma[None, :]) + np.diag(np.full(P.K, np.inf))
        separation = float(diff.min())
    else:
        separation = float("inf")
    if separation <= COLLISION_TOL * scale:
        raise FrameError("critical points collide: assumption 'has M distinct zeroes' violated")
    if np.any(np.abs(gamma) <= 1e-12 * max(scale, P.scale)):
        raise FrameError("critical point at p = 0")
    if np.any(np.abs(gamma[:, None] - P.b[None, :]) <= 1e-12 * max(scale, P.scale)):
        raise FrameError("critical point coincides with some b_i")
    qnorm = np.max(np.abs(q)) * max(1.0, scale) ** P.K
    if np.max(np.abs(npoly.polyval(gamma, q))) > 1e-8 * qnorm:
        raise FrameError("critical points fail lambda'(gamma) = 0")
    f0, _, f2 = P.log_derivs(gamma)
    lam = np.exp(f0)
    return CriticalFrame(gamma, lam, lam * f2, separation, q, f0)


def envelope_jacobian(P: LGPotential, F: CriticalFrame | None = None) -> np.ndarray:
    """``d lambda_n / d theta_j``; criticality removes the gamma-dependence."""
    F = critical_frame(P) if F is None else F
    return F.lam[:, None] * P.dlog_dtheta(F.gamma)


def params_from_lambda(template: LGPotential, lam_target, guess_frame: CriticalFrame | None = None,
                       tol: float = 1e-13, max_iter: int = 60):
    """Natural parameters with prescribed critical values.

    Newton iteration in ``theta`` starting from ``template``; each iterate's
    critical points are matched to the previous ones so the index ``n`` of
    ``lambda_n`` follows the guess frame. Returns ``(potential, frame)``.
    """
    target = np.asarray(lam_target, dtype=np.complex128)
    if target.shape != (template.K,):
        raise ValidationError(f"expected {template.K} critical values")
    lscale = max(np.max(np.abs(target)), 1e-300)
    if template.K > 1:
        gaps = np.abs(target[:, None] - target[None, :]) + np.diag(np.full(template.K, np.inf))
        if gaps.min() <= 1e-12 * lscale:
            raise ValidationError("critical values must be pairwise distinct")
    P = template
    F = critical_frame(P) if guess_frame is None else guess_frame
    res = np.max(np.abs(F.lam - target))
    polish_left = 1
    for _ in range(max_iter):
        converged = res <= tol * lscale
        if converged and polish_left == 0:
            return P, F
        J = envelope_jacobian(P, F)
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[-1] <= 1e-14 * sv[0]:
            raise DegeneracyError("singular envelope Jacobian in params_from_lambda")
        step = np.linalg.solve(J, target - F.lam)
        t = 1.0
        for _ in range(30):
            try:
                Pn = P.with_theta(P.theta + t * step)
                Fn = critical_frame(Pn, reference=F)
                rn = np.max(np.abs(Fn.lam - target))
            except (ValidationError, FrameError):
                rn = np.inf
            if rn < res:
                break
            t *= 0.5
        else:
            if converged:
                return P, F
            raise ConvergenceError("damped Newton stalled in params_from_lambda")
        P, F, res = Pn, Fn, rn
        if converged:
            polish_left -= 1
    if res <= tol * lscale:
        return P, F
    raise ConvergenceError(f"params_from_lambda did not converge (residual {res:.3e})")
