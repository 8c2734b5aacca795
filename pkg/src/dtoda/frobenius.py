"""Residue pairings, cubic forms and flat coordinates on the space of
potentials.

Both forms are finite sums over the critical points: at gamma_n the angle
form contributes (d_X lambda d_Y lambda)(gamma_n) alpha_n/gamma_n and the
round form (d_X log lambda d_Y log lambda)(gamma_n) lambda_n alpha_n/gamma_n.
"""
from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegeneracyError, ValidationError
from .lax import expand_lax, phi_value
from .loewner import alpha_coeffs, exp_N_phi
from .potential import LGPotential, critical_frame, envelope_jacobian, match_order, principal_log
from .series import AT_ZERO, TruncatedSeries, series_compose, series_revert


class Chart(enum.Enum):
    NATURAL = "natural"
    LAMBDA = "lambda"
    FLAT = "flat"


class Form(enum.Enum):
    ANGLE = "angle"
    ROUND = "round"


class FlatKind(enum.Enum):
    DZ_CASE_I = "DZCaseI"
    CASE_II = "CaseII"
    CASE_I_LOG_B = "CaseILogB"


def _form(form) -> Form:
    try:
        return Form(form.value if isinstance(form, Form) else form)
    except ValueError:
        raise ValidationError(f"unknown form {form!r}") from None


def _chart(chart) -> Chart:
    try:
        return Chart(chart.value if isinstance(chart, Chart) else chart)
    except ValueError:
        raise ValidationError(f"unknown chart {chart!r}") from None


def default_form(P: LGPotential) -> Form:
    return Form.ANGLE if P.case == "I" else Form.ROUND


@dataclass(frozen=True, eq=False)
class TangentVector:
    chart: Chart
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "chart", _chart(self.chart))
        object.__setattr__(self, "components", np.asarray(self.components, dtype=np.complex128).reshape(-1))


@dataclass(frozen=True, eq=False)
class FlatChart:
    kind: FlatKind
    labels: list
    values: np.ndarray
    jacobian: np.ndarray   # d q / d theta
    potential: LGPotential


# residue data at the critical points ---------------------------------------------


def _weights(P: LGPotential, form: Form, degree: int):
    """Per-critical-point weights multiplying products of d log lambda."""
    F = critical_frame(P)
    A = alpha_coeffs(F)
    if form is Form.ANGLE:
        if P.case == "II":
            raise ValidationError("angle form is not defined for Case II potentials "
                                  "(essential singularity at p = 0)")
        return F, A.alpha / F.gamma * F.lam ** degree
    return F, A.alpha / F.gamma * F.lam


def chart_jacobian(P: LGPotential, chart, flat: FlatChart | None = None) -> np.ndarray:
    """d theta / d x for the chart coordinates x (columns are basis vectors)."""
    chart = _chart(chart)
    if chart is Chart.NATURAL:
        return np.eye(len(P.theta), dtype=np.complex128)
    if chart is Chart.LAMBDA:
        J = envelope_jacobian(P)
    else:
        J = (flat if flat is not None else flat_coordinates(P)).jacobian
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] <= 1e-13 * sv[0]:
        raise DegeneracyError(f"singular {chart.value} chart Jacobian")
    return np.linalg.inv(J)


def _dlog_basis(P: LGPotential, F, chart, flat=None) -> np.ndarray:
    """[n, a] = d log lambda/d x_a at gamma_n."""
    return P.dlog_dtheta(F.gamma) @ chart_jacobian(P, chart, flat)


def _to_natural(P: LGPotential, X: TangentVector, flat=None) -> np.ndarray:
    if X.components.shape != (len(P.theta),):
        raise ValidationError(f"tangent vectors need {len(P.theta)} components")
    return chart_jacobian(P, X.chart, flat) @ X.components


def pairing(P: LGPotential, form, X: TangentVector, Y: TangentVector, flat=None) -> complex:
    form = _form(form)
    F, w = _weights(P, form, 2)
    D = P.dlog_dtheta(F.gamma)
    return complex(np.sum(w * (D @ _to_natural(P, X, flat)) * (D @ _to_natural(P, Y, flat))))


def cubic(P: LGPotential, form, X: TangentVector, Y: TangentVector, Z: TangentVector, flat=None) -> complex:
    form = _form(form)
    F, w = _weights(P, form, 3)
    D = P.dlog_dtheta(F.gamma)
    x, y, z = (D @ _to_natural(P, V, flat) for V in (X, Y, Z))
    return complex(np.sum(w * x * y * z))


def metric_matrix(P: LGPotential, form, chart, flat: FlatChart | None = None) -> np.ndarray:
    form = _form(form)
    F, w = _weights(P, form, 2)
    D = _dlog_basis(P, F, chart, flat)
    return np.einsum("n,na,nb->ab", w, D, D)


def cubic_tensor(P: LGPotential, form, chart, flat: FlatChart | None = None) -> np.ndarray:
    form = _form(form)
    F, w = _weights(P, form, 3)
    D = _dlog_basis(P, F, chart, flat)
    return np.einsum("n,na,nb,nc->abc", w, D, D, D)


def case1_round_natural(P: LGPotential) -> np.ndarray:
    """Closed form of the Case I round form in the b-chart."""
    k = np.array(P.kappa)
    b = P.b
    G = np.outer(k, k) / (P.N * np.outer(b, b))
    G[np.diag_indices_from(G)] = (k - P.N) * k / (P.N * b ** 2)
    return G


# flat coordinates -------------------------------------------------------------------


def _is_dz(P: LGPotential) -> bool:
    return P.case == "I" and all(k == 1 for k in P.kappa) and P.N >= 1


def flat_kind_for(P: LGPotential, form=None) -> FlatKind:
    form = default_form(P) if form is None else _form(form)
    if P.case == "II":
        if form is not Form.ROUND:
            raise ValidationError("Case II flat coordinates exist for the round form only")
        return FlatKind.CASE_II
    if form is Form.ROUND:
        return FlatKind.CASE_I_LOG_B
    if not _is_dz(P):
        raise ValidationError("flat coordinates of the angle form are only constructed for kappa_i = 1, "
                              "N >= 1; for other (kappa, N) the metric need not be flat")
    return FlatKind.DZ_CASE_I


def _phi_near(P: LGPotential, ref: complex | None) -> complex:
    phi = phi_value(P)
    if ref is None:
        return phi
    step = 2j * np.pi / P.N
    return phi + step * round(((ref - phi) / step).imag)


def _coords(P: LGPotential, kind: FlatKind, phi_ref: complex | None = None) -> np.ndarray:
    """Raw flat-coordinate values; phi continued from ``phi_ref`` when given."""
    if kind is FlatKind.CASE_I_LOG_B:
        return principal_log(P.b)
    phi = _phi_near(P, phi_ref)
    twist = cmath.exp(phi - phi_value(P))      # e^phi relative to the principal choice
    nbar = P.N if kind is FlatKind.DZ_CASE_I else P.N - 1
    zb = expand_lax(P, "zbar", max(nbar, 1) + P.K + 4).series
    qbar = [phi] + [(zb ** n).coeff(0) * twist ** n / n for n in range(1, nbar + 1)]
    if kind is FlatKind.DZ_CASE_I:
        Mt = int(round(P.Mtilde))
        z = expand_lax(P, "z", Mt + P.K + 4).series
        q = [-(z ** n).coeff(0) / n for n in range(1, Mt)]
        return np.array(q + qbar, dtype=np.complex128)
    return np.array(list(principal_log(P.b)) + qbar, dtype=np.complex128)


def _labels(P: LGPotential, kind: FlatKind) -> list[str]:
    if kind is FlatKind.CASE_I_LOG_B:
        return [f"log b{i + 1}" for i in range(P.M)]
    if kind is FlatKind.DZ_CASE_I:
        Mt = int(round(P.Mtilde))
        return [f"q{n}" for n in range(1, Mt)] + [f"qbar{n}" for n in range(P.N + 1)]
    return [f"log b{i + 1}" for i in range(P.M)] + [f"qbar{n}" for n in range(P.N)]


def _five_point(f, theta: np.ndarray, h: float) -> np.ndarray:
    """Columns d f/d theta_j by the fourth-order central stencil."""
    cols = []
    for j in range(len(theta)):
        d = h * max(abs(theta[j]), 1e-3)
        e = np.zeros(len(theta), dtype=np.complex128)
        e[j] = d
        cols.append((-f(theta + 2 * e) + 8 * f(theta + e) - 8 * f(theta - e) + f(theta - 2 * e)) / (12 * d))
    return np.stack(cols, axis=1)


def flat_coordinates(P: LGPotential, form=None, h: float = 1e-3) -> FlatChart:
    """Flat coordinates of the angle form (Case I, kappa_i = 1) or round form.

    q_n = -(1/n)[p^0] z^n (n = 1..Mtilde-1), qbar_0 = phi, qbar_n = (1/n)[p^0] zbar^n.
    The Jacobian to natural parameters uses a five-point stencil.
    """
    kind = flat_kind_for(P, form)
    vals = _coords(P, kind)
    phi0 = None if kind is FlatKind.CASE_I_LOG_B else vals[P.M if kind is FlatKind.CASE_II else int(round(P.Mtilde)) - 1]
    f = lambda th: _coords(P.with_theta(th), kind, phi0)
    J = _five_point(f, P.theta, h)
    if kind is FlatKind.CASE_I_LOG_B:
        J = np.diag(1.0 / P.b)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise DegeneracyError("flat-coordinate Jacobian is singular")
    return FlatChart(kind, _labels(P, kind), vals, J, P)


def flat_constants(P: LGPotential, kind: FlatKind) -> np.ndarray:
    """Constant Gram matrices the flat charts must reproduce."""
    K, N = P.K, P.N
    G = np.zeros((K, K), dtype=np.complex128)
    if kind is FlatKind.DZ_CASE_I:
        Mt = int(round(P.Mtilde))
        for m in range(1, Mt):
            G[m - 1, Mt - m - 1] = Mt
        off = Mt - 1
        for m in range(N + 1):
            G[off + m, off + N - m] = N
        return G
    k = np.array(P.kappa)
    if kind is FlatKind.CASE_I_LOG_B:
        return np.outer(k, k) / N + np.diag(-k)
    # the (log b_i, qbar_0) entry is +kappa_i: the residue at p = 0 of
    # (-kappa_i/(p - b_i)) (-1) dp/p is -kappa_i/b_i
    M = P.M
    G[:M, :M] = np.diag(-k)
    G[:M, M] = k
    G[M, :M] = k
    for m in range(N):
        if 0 < N - m < N:
            G[M + m, M + N - m] = N
    return G


def potential_from_flat(template: LGPotential, q, tol: float = 1e-13, max_iter: int = 50) -> LGPotential:
    """Case II inverse map (log b, qbar_0..qbar_{N-1}) -> (b, c).

    Starts from the triangular leading structure
    qbar_n ~ (1/N) e^{(n-N) phi} c_{N-n} and polishes with Newton in c.
    """
    if template.case != "II":
        raise ValidationError("inverse flat map is implemented for Case II")
    q = np.asarray(q, dtype=np.complex128)
    M, N = template.M, template.N
    b = np.exp(q[:M])
    phi = q[M]
    c = np.zeros(N, dtype=np.complex128)
    c[N - 1] = np.exp(N * phi)
    for n in range(1, N):
        c[N - n - 1] = N * np.exp((N - n) * phi) * q[M + n]
    target = q[M:]

    def qbar(cv):
        P = LGPotential("II", N, template.kappa, b, cv)
        return _coords(P, FlatKind.CASE_II, phi)[M:]

    r = qbar(c) - target
    for _ in range(max_iter):
        res = np.max(np.abs(r))
        if res <= tol * max(1.0, np.max(np.abs(target))):
            return LGPotential("II", N, template.kappa, b, c)
        J = _five_point(qbar, c, 1e-4)
        step = np.linalg.solve(J, -r)
        t = 1.0
        for _ in range(30):
            try:
                rn = qbar(c + t * step) - target
                if np.max(np.abs(rn)) < res:
                    break
            except ValidationError:
                pass
            t *= 0.5
        else:
            break
        c, r = c + t * step, rn
    raise ConvergenceError("Case II flat-coordinate inversion did not converge")


def flat_metric_report(P: LGPotential, form=None, samples: int = 5, seed: int = 0, spread: float = 0.1) -> dict:
    """Metric in the flat chart at P and at nearby random points, against the constants."""
    form = default_form(P) if form is None else _form(form)
    rng = np.random.default_rng(seed)
    chart = flat_coordinates(P, form)
    G = metric_matrix(P, form, Chart.FLAT, chart)
    const = flat_constants(P, chart.kind)
    dev_const = float(np.max(np.abs(G - const)))
    variation = 0.0
    for _ in range(samples):
        for _attempt in range(20):
            th = P.theta * (1 + spread * (rng.standard_normal(len(P.theta)) + 1j * rng.standard_normal(len(P.theta))))
            try:
                Q = P.with_theta(th)
                Gq = metric_matrix(Q, form, Chart.FLAT, flat_coordinates(Q, form))
                break
            except (ValidationError, DegeneracyError):
                continue
        else:
            raise ConvergenceError("could not draw valid nearby parameter points")
        variation = max(variation, float(np.max(np.abs(Gq - G))), float(np.max(np.abs(Gq - const))))
    return {"kind": chart.kind.value, "labels": chart.labels, "values": chart.values, "matrix": G,
            "expected": const, "max_deviation": dev_const, "max_variation": variation}


# product structure, homogeneity, asymptotics -------------------------------------------


def product_structure(P: LGPotential, form, chart, flat: FlatChart | None = None):
    """Structure constants c[l, j, k] of d_j o d_k = sum_l c[l, j, k] d_l, and the
    associativity residual (relative to the size of the products)."""
    G = metric_matrix(P, form, chart, flat)
    C = cubic_tensor(P, form, chart, flat)
    sv = np.linalg.svd(G, compute_uv=False)
    if sv[-1] <= 1e-13 * sv[0]:
        raise DegeneracyError("metric is singular in this chart")
    c = np.einsum("lm,mjk->ljk", np.linalg.inv(G), C)
    left = np.einsum("lij,mlk->mijk", c, c)    # (d_i o d_j) o d_k
    right = np.einsum("ljk,mil->mijk", c, c)   # d_i o (d_j o d_k)
    scale = max(np.max(np.abs(left)), np.max(np.abs(right)), 1e-300)
    return c, float(np.max(np.abs(left - right)) / scale)


def euler_homogeneity_residual(P: LGPotential, rho: complex = 1.05, h: float = 1e-5) -> dict:
    """lambda_n(rho . theta) = rho**Mtilde lambda_n, gamma_n -> rho gamma_n, and E(lambda_n) = lambda_n."""
    F = critical_frame(P)
    Ps = P.scaled(rho)
    Fs = critical_frame(Ps)
    perm = match_order(rho * F.gamma, Fs.gamma)
    gs = Fs.gamma[perm]
    lam_s = np.exp(Ps.log_derivs(gs)[0])
    # rho**Mtilde with the principal log branch matches principal logs of the factors
    expect = F.lam * np.exp(P.Mtilde * np.log(rho))
    out = {"lambda_scaling": float(np.max(np.abs(lam_s - expect) / np.abs(expect))),
           "gamma_scaling": float(np.max(np.abs(gs - rho * F.gamma) / np.abs(F.gamma)))}
    k = np.concatenate([np.ones(P.M), np.arange(1, len(P.c) + 1)])
    E = k * P.theta / P.Mtilde   # Euler field in natural components
    El = envelope_jacobian(P, F) @ E
    # FD of lambda_n along the one-parameter scaling, exp(t/Mtilde) . theta
    up, dn = P.scaled(np.exp(h / P.Mtilde)), P.scaled(np.exp(-h / P.Mtilde))
    lu = np.exp(up.log_derivs(critical_frame(up, reference=F).gamma)[0])
    ld = np.exp(dn.log_derivs(critical_frame(dn, reference=F).gamma)[0])
    fd = (lu - ld) / (2 * h)
    out["euler_field"] = float(np.max(np.abs(El - F.lam) / np.abs(F.lam)))
    out["euler_fd"] = float(np.max(np.abs(fd - F.lam) / np.abs(F.lam)))
    return out


def qbar_N(P: LGPotential) -> complex:
    """First unused coefficient (1/N)[p^0] zbar^N of a Case II potential."""
    if P.case != "II":
        raise ValidationError("qbar_N is defined for Case II")
    zb = expand_lax(P, "zbar", P.N + P.K + 4).series
    return (zb ** P.N).coeff(0) / P.N


def thermodynamic_check(P: LGPotential, L: int | None = None) -> np.ndarray:
    """Coefficients of zeta^0..zeta^-N of d log lambda/d qbar_n divided by p d_p log lambda,
    written in zeta = zbar(p). Row n should be -delta_{kn}. Case II only."""
    if P.case != "II":
        raise ValidationError("the asymptotic check applies to Case II")
    M, N = P.M, P.N
    L = 3 * N + P.K + 6 if L is None else L
    chart = flat_coordinates(P, Form.ROUND)
    dth = np.linalg.inv(chart.jacobian)        # columns: d theta/d q_a
    zb = expand_lax(P, "zbar", L).series
    pbar = series_revert(zb)
    # p d_p log lambda = -sum k c_k p^-k + sum kappa_i p/(p - b_i), as a series at 0
    den = TruncatedSeries.from_powers(AT_ZERO, {-k: -k * ck for k, ck in enumerate(P.c, start=1)}, L - N)
    for kap, bi in zip(P.kappa, P.b):
        j = np.arange(1, L)
        den = den + TruncatedSeries.from_powers(AT_ZERO, {int(jj): -kap * bi ** -float(jj) for jj in j}, L - N)
    rows = []
    for n in range(N):
        dc = dth[M:, M + n]          # d c_k / d qbar_n with b fixed
        num = TruncatedSeries.from_powers(AT_ZERO, {-k: dc[k - 1] for k in range(1, N + 1)}, L - N)
        R = series_compose(num / den, pbar)
        # R lives at zeta = infinity; p-power -k there is zeta^-k
        rows.append([R.coeff(-k) for k in range(N + 1)])
    return np.array(rows, dtype=np.complex128)


def residue_theorem_check(P: LGPotential, pair, radius: float = 0.25, nodes: int = 256) -> float:
    """Case II round form: the closed-form critical-point sum against minus the
    residues at the finite poles 0 and b_i, those taken by trapezoid quadrature.

    ``pair`` is a pair of natural-parameter indices, e.g. (i, j) or (i, M + N - 1).
    """
    if P.case != "II":
        raise ValidationError("residue-theorem check is written for Case II")
    a, b = pair
    ea = np.zeros(len(P.theta))
    eb = np.zeros(len(P.theta))
    ea[a] = 1
    eb[b] = 1
    X, Y = TangentVector(Chart.NATURAL, ea), TangentVector(Chart.NATURAL, eb)
    crit = pairing(P, Form.ROUND, X, Y)
    F, w = _weights(P, Form.ROUND, 2)
    Dg = P.dlog_dtheta(F.gamma)
    # the critical-point terms can cancel, so scale by their size rather than their sum
    size = float(np.sum(np.abs(w * Dg[:, a] * Dg[:, b])))

    def omega(p):
        D = P.dlog_dtheta(p)
        return D[:, a] * D[:, b] / (p ** 2 * P.log_derivs(p)[1])

    poles = np.concatenate([[0.0], P.b])
    others = np.concatenate([poles, F.gamma])
    total = 0j
    t = 2 * np.pi * np.arange(nodes) / nodes
    for c0 in poles:
        d = np.abs(others - c0)
        r = radius * np.min(d[d > 0])
        p = c0 + r * np.exp(1j * t)
        total += np.mean(omega(p) * r * np.exp(1j * t))
    return float(abs(crit + total) / max(abs(crit), abs(total), size, 1e-300))
