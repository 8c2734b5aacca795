"""Truncated Laurent series at p = infinity and p = 0.

A series is stored in its local variable ``w`` (``w = 1/p`` at infinity,
``w = p`` at zero) as ``sum_j coeffs[j] * w**(lead + j)``. It is exact
modulo ``w**order`` with ``order = lead + L``; every operation returns the
largest window it can certify and never pads beyond it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from numbers import Number

import numpy as np

from . import _kernels as K
from .errors import SeriesError, WindowError

UNIT_TOL = 1e-12


class Center(enum.Enum):
    AT_INFINITY = "inf"
    AT_ZERO = "zero"


AT_INFINITY = Center.AT_INFINITY
AT_ZERO = Center.AT_ZERO


def _as_coeffs(values) -> np.ndarray:
    return np.array(values, dtype=np.complex128).reshape(-1)


@dataclass(frozen=True, eq=False)
class LaurentPoly:
    """Exact Laurent polynomial ``sum_k coeffs[k - low] * p**k``."""

    low: int
    coeffs: np.ndarray

    @classmethod
    def from_powers(cls, powers: dict[int, complex]) -> "LaurentPoly":
        if not powers:
            return cls(0, np.zeros(1, dtype=np.complex128))
        low, high = min(powers), max(powers)
        c = np.zeros(high - low + 1, dtype=np.complex128)
        for k, v in powers.items():
            c[k - low] = v
        return cls(low, c)

    @property
    def high(self) -> int:
        return self.low + len(self.coeffs) - 1

    def coeff(self, k: int) -> complex:
        i = k - self.low
        return complex(self.coeffs[i]) if 0 <= i < len(self.coeffs) else 0j

    def __call__(self, p):
        p = np.asarray(p, dtype=np.complex128)
        acc = np.zeros_like(p)
        for c in self.coeffs[::-1]:
            acc = acc * p + c
        return acc * p ** self.low

    def deriv(self) -> "LaurentPoly":
        k = np.arange(self.low, self.high + 1)
        return LaurentPoly(self.low - 1, self.coeffs * k)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        keys = set(range(self.low, self.high + 1)) | set(range(other.low, other.high + 1))
        return LaurentPoly.from_powers({k: self.coeff(k) - other.coeff(k) for k in keys})

    def __mul__(self, scalar) -> "LaurentPoly":
        return LaurentPoly(self.low, self.coeffs * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        terms = [f"({c:.6g})p^{self.low + i}" for i, c in enumerate(self.coeffs) if c != 0]
        return "LaurentPoly(" + (" + ".join(terms) or "0") + ")"


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    center: Center
    lead: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = _as_coeffs(self.coeffs)
        if len(c) == 0:
            raise SeriesError("a truncated series needs at least one coefficient")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "lead", int(self.lead))

    # construction -----------------------------------------------------

    @classmethod
    def normalized(cls, center: Center, lead: int, coeffs) -> "TruncatedSeries":
        """Build a series, stripping exactly-zero leading coefficients."""
        c = _as_coeffs(coeffs)
        order = lead + len(c)
        nz = np.flatnonzero(c)
        if len(nz) == 0:
            return cls.zero(center, order)
        return cls(center, lead + int(nz[0]), c[nz[0]:])

    @classmethod
    def zero(cls, center: Center, order: int) -> "TruncatedSeries":
        lead = min(0, order - 1)
        return cls(center, lead, np.zeros(order - lead, dtype=np.complex128))

    @classmethod
    def constant(cls, center: Center, value: complex, L: int) -> "TruncatedSeries":
        return cls.normalized(center, 0, [value] + [0] * (L - 1))

    @classmethod
    def from_powers(cls, center: Center, powers: dict[int, complex], order: int) -> "TruncatedSeries":
        """Series from ``{k: coefficient of p**k}``, exact modulo ``w**order``."""
        wpow = {(-k if center is AT_INFINITY else k): v for k, v in powers.items()}
        wpow = {m: v for m, v in wpow.items() if m < order}
        if not wpow:
            return cls.zero(center, order)
        lead = min(wpow)
        c = np.zeros(order - lead, dtype=np.complex128)
        for m, v in wpow.items():
            c[m - lead] += v
        return cls.normalized(center, lead, c)

    # views ------------------------------------------------------------

    @property
    def L(self) -> int:
        return len(self.coeffs)

    @property
    def order(self) -> int:
        return self.lead + self.L

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def w_coeff(self, m: int) -> complex:
        if m >= self.order:
            raise WindowError(f"w^{m} lies outside the truncation window (order {self.order})")
        j = m - self.lead
        return complex(self.coeffs[j]) if j >= 0 else 0j

    def p_power(self, j: int) -> int:
        """Exponent of p carried by coefficient index ``j``."""
        m = self.lead + j
        return -m if self.center is AT_INFINITY else m

    def coeff(self, k: int) -> complex:
        """Coefficient of ``p**k``."""
        return self.w_coeff(-k if self.center is AT_INFINITY else k)

    def known(self, k: int) -> bool:
        m = -k if self.center is AT_INFINITY else k
        return m < self.order

    def powers(self) -> dict[int, complex]:
        return {self.p_power(j): complex(c) for j, c in enumerate(self.coeffs) if c != 0}

    def __call__(self, p):
        """Partial sum of the retained terms at ``p``."""
        p = np.asarray(p, dtype=np.complex128)
        w = 1.0 / p if self.center is AT_INFINITY else p
        acc = np.zeros_like(w)
        for c in self.coeffs[::-1]:
            acc = acc * w + c
        return acc * w ** self.lead

    def __repr__(self):
        terms = [f"({c:.6g})p^{k}" for k, c in sorted(self.powers().items(), reverse=True)]
        return (f"TruncatedSeries[{self.center.value}, L={self.L}]("
                + (" + ".join(terms) or "0") + f" + O(w^{self.order}))")

    def allclose(self, other: "TruncatedSeries", atol: float = 1e-12) -> bool:
        _check_center(self, other)
        lo = min(self.lead, other.lead)
        hi = min(self.order, other.order)
        return all(abs(self.w_coeff(m) - other.w_coeff(m)) <= atol for m in range(lo, hi))

    def truncate(self, order: int) -> "TruncatedSeries":
        """Drop terms at and beyond ``w**order``."""
        order = min(order, self.order)
        if order <= self.lead:
            return TruncatedSeries.zero(self.center, order)
        return TruncatedSeries(self.center, self.lead, self.coeffs[: order - self.lead])

    # arithmetic -------------------------------------------------------

    def __neg__(self):
        return TruncatedSeries(self.center, self.lead, -self.coeffs)

    def __add__(self, other):
        if isinstance(other, Number):
            return self._add_scalar(complex(other))
        _check_center(self, other)
        order = min(self.order, other.order)
        lead = min(self.lead, other.lead)
        if lead >= order:
            return TruncatedSeries.zero(self.center, order)
        c = np.zeros(order - lead, dtype=np.complex128)
        for s in (self, other):
            n = min(s.L, order - s.lead)
            c[s.lead - lead: s.lead - lead + n] += s.coeffs[:n]
        return TruncatedSeries.normalized(self.center, lead, c)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _add_scalar(self, value: complex):
        if value == 0 or self.order <= 0:
            return self
        lead = min(self.lead, 0)
        c = np.zeros(self.order - lead, dtype=np.complex128)
        c[self.lead - lead:] = self.coeffs
        c[-lead] += value
        return TruncatedSeries.normalized(self.center, lead, c)

    def __mul__(self, other):
        if isinstance(other, Number):
            if other == 0:
                return TruncatedSeries.zero(self.center, self.order)
            return TruncatedSeries(self.center, self.lead, self.coeffs * complex(other))
        _check_center(self, other)
        if self.is_zero or other.is_zero:
            # a zero series is only known to be O(w**order)
            lead_a = self.order if self.is_zero else self.lead
            lead_b = other.order if other.is_zero else other.lead
            return TruncatedSeries.zero(self.center, min(lead_a + other.order, lead_b + self.order, lead_a + lead_b + min(self.L, other.L)))
        L = min(self.L, other.L)
        c = K.mul_trunc(self.coeffs, other.coeffs, L)
        return TruncatedSeries.normalized(self.center, self.lead + other.lead, c)

    __rmul__ = __mul__

    def invert(self) -> "TruncatedSeries":
        if self.is_zero:
            raise SeriesError("cannot invert a series with vanishing leading coefficient")
        return TruncatedSeries(self.center, -self.lead, K.inv_series(self.coeffs, self.L))

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self * (1.0 / complex(other))
        return self * other.invert()

    def __rtruediv__(self, other):
        return self.invert() * other

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)):
            raise SeriesError("use series_pow for non-integer exponents")
        if n < 0:
            return self.invert() ** (-n)
        result = TruncatedSeries.constant(self.center, 1.0, self.L)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # calculus ---------------------------------------------------------

    def derivative(self) -> "TruncatedSeries":
        """d/dp, exact on the retained window."""
        m = np.arange(self.lead, self.order)
        if self.center is AT_INFINITY:
            return TruncatedSeries.normalized(self.center, self.lead + 1, -m * self.coeffs)
        return TruncatedSeries.normalized(self.center, self.lead - 1, m * self.coeffs)

    def polynomial(self) -> LaurentPoly:
        return LaurentPoly.from_powers(self.powers())


def _check_center(a: TruncatedSeries, b) -> None:
    if not isinstance(b, TruncatedSeries):
        raise SeriesError(f"cannot combine a series with {type(b).__name__}")
    if a.center is not b.center:
        raise SeriesError(f"center mismatch: {a.center.value} vs {b.center.value}")


# module-level operations -------------------------------------------------

def series_arith(op: str, A: TruncatedSeries, B=None) -> TruncatedSeries:
    """Dispatch ``add``, ``sub``, ``mul``, ``scale`` or ``invert``."""
    if op == "add":
        return A + B
    if op == "sub":
        return A - B
    if op == "mul":
        return A * B
    if op == "scale":
        if not isinstance(B, Number):
            raise SeriesError("scale expects a scalar")
        return A * B
    if op == "invert":
        return A.invert()
    raise SeriesError(f"unknown arithmetic op {op!r}")


def _unit_coeffs(A: TruncatedSeries, what: str) -> np.ndarray:
    if A.lead != 0 or abs(A.coeffs[0] - 1) > UNIT_TOL:
        raise SeriesError(f"{what} needs a series of the form 1 + (vanishing part)")
    c = A.coeffs.copy()
    c[0] = 1.0
    return c


def series_exp(A: TruncatedSeries) -> TruncatedSeries:
    if A.is_zero:
        return TruncatedSeries.constant(A.center, 1.0, max(A.order, 1))
    if A.lead < 1:
        raise SeriesError("exp needs a series vanishing at its center")
    a = np.zeros(A.order, dtype=np.complex128)
    a[A.lead:] = A.coeffs
    return TruncatedSeries(A.center, 0, K.exp_series(a, A.order))


def series_log(A: TruncatedSeries) -> TruncatedSeries:
    c = _unit_coeffs(A, "log")
    return TruncatedSeries.normalized(A.center, 0, K.log_series(c, A.L))


def series_pow(A: TruncatedSeries, r: float) -> TruncatedSeries:
    c = _unit_coeffs(A, "pow")
    return TruncatedSeries(A.center, 0, K.pow_series(c, float(r), A.L))


def series_transcend(kind: str, A: TruncatedSeries, r: float | None = None) -> TruncatedSeries:
    if kind == "exp":
        return series_exp(A)
    if kind == "log":
        return series_log(A)
    if kind == "pow":
        if r is None:
            raise SeriesError("pow needs an exponent")
        return series_pow(A, r)
    raise SeriesError(f"unknown transcendental op {kind!r}")


def series_revert(A: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse.

    ``A`` must have a simple zero or pole at its center (``lead = +-1``).
    The inverse lives at zero when ``A`` vanishes at its center and at
    infinity when ``A`` blows up there; it takes values near the original
    center, so ``revert(revert(A))`` returns ``A``.
    """
    if A.lead not in (1, -1) or A.is_zero:
        raise SeriesError("reversion needs a simple zero or simple pole at the center")
    Y = A if A.lead == 1 else A.invert()
    L = A.L
    h = K.inv_series(Y.coeffs, L)
    x = np.zeros(L, dtype=np.complex128)
    hk = np.zeros(L, dtype=np.complex128)
    hk[0] = 1.0
    for k in range(1, L + 1):
        hk = K.mul_trunc(hk, h, L)
        x[k - 1] = hk[k - 1] / k
    out_center = AT_ZERO if A.lead == 1 else AT_INFINITY
    X = TruncatedSeries(out_center, 1, x)
    return X if A.center is AT_ZERO else X.invert()


def series_compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """``outer(inner(.))``; ``inner`` must take values at ``outer``'s center."""
    W = inner if outer.center is AT_ZERO else inner.invert()
    if W.is_zero or W.lead < 1:
        raise SeriesError("inner series does not approach the outer center")
    acc = TruncatedSeries.constant(W.center, complex(outer.coeffs[-1]), W.L)
    for c in outer.coeffs[-2::-1]:
        acc = acc * W + complex(c)
    if outer.lead:
        acc = acc * (W ** outer.lead)
    return acc.truncate(outer.lead * W.lead + min(W.L, W.lead * outer.L))


def split_parts(A: TruncatedSeries) -> tuple[TruncatedSeries, TruncatedSeries]:
    """``(non-negative p-powers, negative p-powers)``; both keep A's window."""
    poly, neg = {}, {}
    for j, c in enumerate(A.coeffs):
        k = A.p_power(j)
        (poly if k >= 0 else neg)[k] = c
    return (TruncatedSeries.from_powers(A.center, poly, A.order),
            TruncatedSeries.from_powers(A.center, neg, A.order))


def log_one_minus(center: Center, a: complex, order: int) -> TruncatedSeries:
    """``log(1 - a*w)`` in the local variable, exact modulo ``w**order``."""
    m = np.arange(1, max(order, 1))
    c = -(complex(a) ** m) / m
    if order <= 1:
        return TruncatedSeries.zero(center, order)
    return TruncatedSeries.normalized(center, 1, c)
