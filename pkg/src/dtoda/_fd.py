"""Finite differences in the critical-value coordinates lambda_n.

Every probe moves one lambda_m (additively by h|lambda_m|, or multiplicatively
by exp(+-h) for log-derivatives) and re-inverts to natural parameters from the
base point, so frames stay matched to the base indexing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potential import CriticalFrame, LGPotential, critical_frame, params_from_lambda


@dataclass(frozen=True)
class Residual:
    abs: float
    rel: float

    def __float__(self):
        return self.rel

    def __repr__(self):
        return f"Residual(abs={self.abs:.3e}, rel={self.rel:.3e})"

    @staticmethod
    def combine(items) -> "Residual":
        items = list(items)
        return Residual(max((r.abs for r in items), default=0.0), max((r.rel for r in items), default=0.0))


def compare(fd, exact, scale) -> Residual:
    """Max absolute and relative mismatch; ``scale`` guards near-zero exact values."""
    fd = np.asarray(fd)
    exact = np.asarray(exact)
    err = np.abs(fd - exact)
    den = np.maximum(np.abs(exact), np.asarray(scale, dtype=float))
    den = np.where(den > 0, den, 1.0)
    return Residual(float(np.max(err, initial=0.0)), float(np.max(err / den, initial=0.0)))


class LambdaProbe:
    """Central differences of functions of (potential, frame) in lambda-coordinates."""

    def __init__(self, P: LGPotential, frame: CriticalFrame | None = None, tol: float = 1e-14):
        self.P = P
        self.frame = critical_frame(P) if frame is None else frame
        self.tol = tol

    @property
    def lam(self) -> np.ndarray:
        return self.frame.lam

    def at(self, lam):
        return params_from_lambda(self.P, lam, guess_frame=self.frame, tol=self.tol)

    def partial(self, func, m: int, h: float, log: bool = False):
        """d func / d lambda_m (or lambda_m d/d lambda_m when ``log``)."""
        lam = self.lam
        if log:
            up, dn = lam.copy(), lam.copy()
            up[m] = lam[m] * np.exp(h)
            dn[m] = lam[m] * np.exp(-h)
            width = 2 * h
        else:
            d = h * abs(lam[m])
            up, dn = lam.copy(), lam.copy()
            up[m] = lam[m] + d
            dn[m] = lam[m] - d
            width = up[m] - dn[m]
        fp = np.asarray(func(*self.at(up)))
        fm = np.asarray(func(*self.at(dn)))
        return (fp - fm) / width

    def jacobian(self, func, h: float, log: bool = False) -> np.ndarray:
        """Stack of partials, leading axis m."""
        return np.stack([self.partial(func, m, h, log) for m in range(self.P.K)])

    def directional(self, func, direction, h: float):
        """Derivative along ``d lambda = direction`` (scaled to relative size h)."""
        direction = np.asarray(direction, dtype=np.complex128)
        eps = h * np.max(np.abs(self.lam)) / np.max(np.abs(direction))
        fp = np.asarray(func(*self.at(self.lam + eps * direction)))
        fm = np.asarray(func(*self.at(self.lam - eps * direction)))
        return (fp - fm) / (2 * eps)


def sample_points(P: LGPotential, count: int, rng: np.random.Generator, frame: CriticalFrame | None = None,
                  margin: float = 0.15) -> np.ndarray:
    """Random points in an annulus around the singular set, away from 0, b_i and gamma_n."""
    F = critical_frame(P) if frame is None else frame
    avoid = np.concatenate([[0.0], P.b, F.gamma])
    R = 1.5 * max(P.scale, np.max(np.abs(F.gamma)), 1e-3)
    minr = margin * R
    out = []
    while len(out) < count:
        p = R * np.sqrt(rng.uniform(0.05, 1.0)) * np.exp(2j * np.pi * rng.uniform())
        if np.min(np.abs(p - avoid)) > minr:
            out.append(p)
    return np.array(out, dtype=np.complex128)
