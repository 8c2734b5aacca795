"""Characteristic speeds, hodograph solutions and residual checks of the
hydrodynamic and Lax equations on solved fields.
"""
from __future__ import annotations

import itertools
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._fd import LambdaProbe, Residual, compare
from .errors import ConvergenceError, DegeneracyError, FrameError, ValidationError
from .lax import Z, ZBAR, bracket_with_log, evolution_rhs, generator, side_of
from .potential import CriticalFrame, LGPotential, critical_frame, params_from_lambda

_AXIS = re.compile(r"^(s|t|tbar)(\d*)$")


@dataclass(frozen=True)
class SpaceTimePoint:
    s: float
    t: dict = field(default_factory=dict)
    tbar: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("t", "tbar"):
            d = {int(k): float(v) for k, v in getattr(self, name).items() if float(v) != 0.0}
            if any(k < 1 for k in d):
                raise ValidationError("time indices start at 1")
            object.__setattr__(self, name, d)

    def flows(self):
        """Nonzero times as ``((side, k), value)`` pairs."""
        return [((Z, k), v) for k, v in sorted(self.t.items())] + \
               [((ZBAR, k), v) for k, v in sorted(self.tbar.items())]

    def get(self, axis: str) -> float:
        kind, k = parse_axis(axis)
        if kind == "s":
            return self.s
        return (self.t if kind == "t" else self.tbar).get(k, 0.0)

    def replace(self, **axes) -> "SpaceTimePoint":
        s, t, tbar = self.s, dict(self.t), dict(self.tbar)
        for axis, value in axes.items():
            kind, k = parse_axis(axis)
            if kind == "s":
                s = value
            else:
                (t if kind == "t" else tbar)[k] = value
        return SpaceTimePoint(s, t, tbar)

    def lerp(self, other: "SpaceTimePoint", frac: float) -> "SpaceTimePoint":
        keys_t = set(self.t) | set(other.t)
        keys_b = set(self.tbar) | set(other.tbar)
        mix = lambda a, b: a + frac * (b - a)
        return SpaceTimePoint(mix(self.s, other.s),
                              {k: mix(self.t.get(k, 0.0), other.t.get(k, 0.0)) for k in keys_t},
                              {k: mix(self.tbar.get(k, 0.0), other.tbar.get(k, 0.0)) for k in keys_b})


def parse_axis(axis: str):
    m = _AXIS.match(axis)
    if not m or (m.group(1) != "s" and not m.group(2)) or (m.group(1) == "s" and m.group(2)):
        raise ValidationError(f"bad axis name {axis!r}; use s, t<k> or tbar<k>")
    kind = m.group(1)
    return kind, (int(m.group(2)) if m.group(2) else 0)


def axis_flow(axis: str):
    kind, k = parse_axis(axis)
    if kind == "s":
        raise ValidationError("s is not a flow time")
    return (Z if kind == "t" else ZBAR, k)


@dataclass(frozen=True)
class HodographData:
    """F_n = a0 + sum_k a_k V_kn + sum_k abar_k Vbar_kn."""
    a0: complex = 0.0
    a: dict = field(default_factory=dict)
    abar: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "a0", complex(self.a0))
        for name in ("a", "abar"):
            d = {int(k): complex(v) for k, v in getattr(self, name).items()}
            if any(k < 1 for k in d):
                raise ValidationError("speed indices start at 1")
            object.__setattr__(self, name, d)

    def flows(self):
        return [((Z, k), v) for k, v in sorted(self.a.items())] + \
               [((ZBAR, k), v) for k, v in sorted(self.abar.items())]


def speeds(P: LGPotential, flow, frame: CriticalFrame | None = None) -> np.ndarray:
    """V_kn = gamma_n B_k'(gamma_n) (side z) or Vbar_kn = gamma_n Bbar_k'(gamma_n)."""
    side, k = flow
    F = critical_frame(P) if frame is None else frame
    B = generator(P, side_of(side), k)
    return F.gamma * B.deriv()(F.gamma)


def hodograph_F(P: LGPotential, data: HodographData, frame: CriticalFrame | None = None) -> np.ndarray:
    F = critical_frame(P) if frame is None else frame
    out = np.full(P.K, data.a0, dtype=np.complex128)
    for flow, coef in data.flows():
        out = out + coef * speeds(P, flow, F)
    return out


def hodograph_residual(P: LGPotential, point: SpaceTimePoint, data: HodographData,
                       frame: CriticalFrame | None = None) -> np.ndarray:
    """r_n = s + sum t_k V_kn + sum tbar_k Vbar_kn - F_n."""
    F = critical_frame(P) if frame is None else frame
    r = np.full(P.K, point.s, dtype=np.complex128)
    for flow, t in point.flows():
        r = r + t * speeds(P, flow, F)
    return r - hodograph_F(P, data, F)


def seed_data(P: LGPotential, point: SpaceTimePoint, fixed: HodographData, free) -> HodographData:
    """Hodograph data for which ``P`` solves ``point`` exactly.

    ``fixed`` carries the prescribed coefficients; ``a0`` and the coefficients
    of the flows listed in ``free`` (K - 1 of them) are determined by the K
    linear equations r_n(P) = 0.
    """
    free = [(side_of(s), int(k)) for s, k in free]
    if len(free) != P.K - 1:
        raise ValidationError(f"need exactly K - 1 = {P.K - 1} free flows")
    F = critical_frame(P)
    rhs = hodograph_residual(P, point, HodographData(0.0, fixed.a, fixed.abar), F)
    cols = [np.ones(P.K, dtype=np.complex128)] + [speeds(P, f, F) for f in free]
    A = np.stack(cols, axis=1)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise DegeneracyError("seed system is singular for the chosen free flows")
    x = np.linalg.solve(A, rhs)
    a, abar = dict(fixed.a), dict(fixed.abar)
    for (side, k), v in zip(free, x[1:]):
        (a if side == Z else abar)[k] = (a if side == Z else abar).get(k, 0.0) + v
    return HodographData(fixed.a0 + x[0], a, abar)


@dataclass(frozen=True, eq=False)
class HodographSolution:
    potential: LGPotential
    frame: CriticalFrame
    iters: int
    residual: float


def hodograph_solve(template: LGPotential, point: SpaceTimePoint, data: HodographData,
                    guess: tuple | None = None, tol: float = 1e-12, max_iter: int = 30,
                    h: float = 1e-6, cond_max: float = 1e8) -> HodographSolution:
    """Damped Newton for r_n = 0 in the unknowns lambda_n.

    ``guess`` is ``(potential, frame)``; by default the template itself.
    The Jacobian is a finite difference whose relative noise is ~1e-10, so
    condition numbers above ``cond_max`` are treated as singular.
    """
    P, F = guess if guess is not None else (template, critical_frame(template))
    scale = max(1.0, abs(point.s), abs(data.a0))
    r = hodograph_residual(P, point, data, F)
    res = float(np.max(np.abs(r)))
    resid = lambda Q, G: hodograph_residual(Q, point, data, G)
    for it in range(max_iter + 1):
        if res <= tol * scale:
            return HodographSolution(P, F, it, res)
        if it == max_iter:
            break
        J = LambdaProbe(P, F).jacobian(resid, h).T  # [n, m] = d r_n / d lambda_m
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[0] == 0 or sv[-1] <= sv[0] / cond_max:
            raise DegeneracyError("hodograph Jacobian is singular: non-degeneracy condition violated")
        step = np.linalg.solve(J, -r)
        t = 1.0
        for _ in range(20):
            try:
                Pn, Fn = params_from_lambda(P, F.lam + t * step, guess_frame=F)
                rn = hodograph_residual(Pn, point, data, Fn)
                resn = float(np.max(np.abs(rn)))
            except (ValidationError, FrameError, ConvergenceError, DegeneracyError):
                resn = np.inf
            if resn < res:
                break
            t *= 0.5
        else:
            raise ConvergenceError(f"hodograph Newton stalled at residual {res:.3e}")
        P, F, r, res = Pn, Fn, rn, resn
    raise ConvergenceError(f"hodograph Newton did not converge (residual {res:.3e})")


class ContinuationError(ConvergenceError):
    def __init__(self, msg, last_good=None):
        super().__init__(msg)
        self.last_good = last_good


def continue_to(template: LGPotential, start: SpaceTimePoint, sol: HodographSolution, target: SpaceTimePoint,
                data: HodographData, tol: float = 1e-12, max_halvings: int = 6) -> HodographSolution:
    """Move a solution from ``start`` to ``target``, halving the step on failure."""
    done, step, halvings = 0.0, 1.0, 0
    cur = sol
    while done < 1.0:
        frac = min(1.0, done + step)
        pt = start.lerp(target, frac) if frac < 1.0 else target
        try:
            nxt = hodograph_solve(template, pt, data, guess=(cur.potential, cur.frame), tol=tol)
        except (ConvergenceError, FrameError, ValidationError) as exc:
            halvings += 1
            if halvings > max_halvings:
                raise ContinuationError(f"continuation broke down before {target}: {exc}",
                                        last_good=(start.lerp(target, done), cur)) from exc
            step *= 0.5
            continue
        cur, done = nxt, frac
    return cur


@dataclass(frozen=True, eq=False)
class SolutionField:
    axes: tuple          # ((name, values), ...) with values as float arrays
    points: list
    potentials: list
    frames: list
    iters: np.ndarray
    residual: np.ndarray

    @property
    def shape(self) -> tuple:
        return tuple(len(v) for _, v in self.axes)

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.axes]

    @property
    def lam(self) -> np.ndarray:
        return np.array([F.lam for F in self.frames])

    def index(self, multi) -> int:
        return int(np.ravel_multi_index(tuple(multi), self.shape))

    def spacing(self, axis: str) -> float:
        vals = dict(self.axes)[axis]
        d = np.diff(vals)
        if len(vals) < 3 or not np.allclose(d, d[0], rtol=1e-9, atol=0):
            raise ValidationError(f"axis {axis} needs at least 3 uniformly spaced values")
        return float(d[0])

    def interior(self, *axes):
        """Multi-indices with both neighbours present along each given axis."""
        pos = [self.names.index(a) for a in axes]
        for multi in itertools.product(*[range(n) for n in self.shape]):
            if all(0 < multi[p] < self.shape[p] - 1 for p in pos):
                yield multi

    def neighbours(self, multi, axis):
        p = self.names.index(axis)
        up, dn = list(multi), list(multi)
        up[p] += 1
        dn[p] -= 1
        return self.index(up), self.index(dn)


def parse_grid(spec) -> tuple:
    """``"s=1.5:2.5:0.1,t1=1"`` or a mapping axis -> values, to ``((axis, array), ...)``."""
    if isinstance(spec, str):
        items = []
        for part in filter(None, (x.strip() for x in spec.split(","))):
            if "=" not in part:
                raise ValidationError(f"bad grid entry {part!r}")
            name, rng = (x.strip() for x in part.split("=", 1))
            bits = rng.split(":")
            try:
                if len(bits) == 1:
                    vals = np.array([float(bits[0])])
                elif len(bits) == 3:
                    lo, hi, st = map(float, bits)
                    if st <= 0 or hi < lo:
                        raise ValueError
                    n = int(np.floor((hi - lo) / st + 1e-9)) + 1
                    vals = lo + st * np.arange(n)
                else:
                    raise ValueError
            except ValueError:
                raise ValidationError(f"bad range {rng!r} for axis {name}") from None
            items.append((name, vals))
    else:
        items = [(k, np.atleast_1d(np.asarray(v, dtype=float))) for k, v in dict(spec).items()]
    names = [n for n, _ in items]
    for n in names:
        parse_axis(n)
    if len(set(names)) != len(names):
        raise ValidationError("repeated grid axis")
    if "s" not in names:
        items.insert(0, ("s", np.array([0.0])))
    else:
        items.insert(0, items.pop(names.index("s")))
    return tuple(items)


def _predecessor(multi):
    """s first; on the s = s_0 spine step back along the first nonzero other axis."""
    multi = list(multi)
    if multi[0] > 0:
        multi[0] -= 1
        return tuple(multi)
    for i in range(1, len(multi)):
        if multi[i] > 0:
            multi[i] -= 1
            return tuple(multi)
    return None


def hodograph_sweep(template: LGPotential, grid, data: HodographData, seed: HodographSolution | None = None,
                    tol: float = 1e-12, workers: int = 1) -> SolutionField:
    """Solve the hodograph relations over a product grid by continuation.

    The s = s_0 spine is solved serially; each s-line then continues from its
    spine point and lines may run concurrently. Results are placed by grid
    index, so the field does not depend on ``workers``.
    """
    axes = parse_grid(grid)
    shape = tuple(len(v) for _, v in axes)
    names = [n for n, _ in axes]

    def point_at(multi) -> SpaceTimePoint:
        return SpaceTimePoint(0.0).replace(**{n: float(axes[i][1][j]) for i, (n, j) in enumerate(zip(names, multi))})

    total = int(np.prod(shape))
    sols: list = [None] * total
    first = (0,) * len(shape)
    p0 = point_at(first)
    if seed is None:
        seed = hodograph_solve(template, p0, data, tol=tol)
    elif float(np.max(np.abs(hodograph_residual(seed.potential, p0, data, seed.frame)))) > tol * max(1.0, abs(p0.s)):
        seed = hodograph_solve(template, p0, data, guess=(seed.potential, seed.frame), tol=tol)
    flat = lambda m: int(np.ravel_multi_index(m, shape))
    sols[flat(first)] = seed

    def solve_from(multi):
        prev = _predecessor(multi)
        return continue_to(template, point_at(prev), sols[flat(prev)], point_at(multi), data, tol=tol)

    spine = [m for m in itertools.product(*[range(n) for n in shape]) if m[0] == 0 and m != first]
    for m in spine:
        sols[flat(m)] = solve_from(m)

    def line(root):
        for j in range(1, shape[0]):
            m = (j,) + root[1:]
            sols[flat(m)] = solve_from(m)

    roots = [m for m in itertools.product(*[range(n) for n in shape]) if m[0] == 0]
    if workers > 1 and shape[0] > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(line, roots))
    else:
        for r in roots:
            line(r)

    points = [point_at(m) for m in itertools.product(*[range(n) for n in shape])]
    return SolutionField(axes, points, [s.potential for s in sols], [s.frame for s in sols],
                         np.array([s.iters for s in sols]), np.array([s.residual for s in sols]))


# residual checks on solved fields ------------------------------------------------


def pde_residual(field: SolutionField, flow_axis: str) -> Residual:
    """d lambda_n/dt_k = V_kn d lambda_n/ds by central differences on the field."""
    flow = axis_flow(flow_axis)
    hs, ht = field.spacing("s"), field.spacing(flow_axis)
    lam = field.lam
    out = []
    for multi in field.interior("s", flow_axis):
        i = field.index(multi)
        su, sd = field.neighbours(multi, "s")
        tu, td = field.neighbours(multi, flow_axis)
        ds = (lam[su] - lam[sd]) / (2 * hs)
        dt = (lam[tu] - lam[td]) / (2 * ht)
        V = speeds(field.potentials[i], flow, field.frames[i])
        out.append(compare(dt, V * ds, np.abs(dt)))
    if not out:
        raise ValidationError("field has no interior stencil points")
    return Residual.combine(out)


def _s_derivatives(field: SolutionField, multi, axis: str):
    up, dn = field.neighbours(multi, axis)
    h = field.spacing(axis)
    Pu, Pd = field.potentials[up], field.potentials[dn]
    return Pu, Pd, (Pu.theta - Pd.theta) / (2 * h), h


def lax_flow_residual(field: SolutionField, flow_axis: str, p_samples) -> Residual:
    """FD of d log lambda(p)/dt_k against {B_k, log lambda}(p) built from s-derivatives."""
    side, k = axis_flow(flow_axis)
    p = np.asarray(p_samples, dtype=np.complex128)
    out = []
    for multi in field.interior("s", flow_axis):
        i = field.index(multi)
        P = field.potentials[i]
        Psu, Psd, th_s, hs = _s_derivatives(field, multi, "s")
        Ptu, Ptd, _, ht = _s_derivatives(field, multi, flow_axis)
        dt_log = (Ptu(p) - Ptd(p)) / (2 * ht * P(p))
        B = generator(P, side, k)
        Bs = (generator(Psu, side, k) - generator(Psd, side, k)) * (1.0 / (2 * hs))
        rhs = bracket_with_log(P, B, Bs, th_s, p)
        out.append(compare(dt_log, rhs, np.abs(dt_log)))
    if not out:
        raise ValidationError("field has no interior stencil points")
    return Residual.combine(out)


def evolution_consistency(field: SolutionField, flow_axis: str) -> Residual:
    """Field t-derivatives of (b, c) against lax.evolution_rhs at interior points."""
    flow = axis_flow(flow_axis)
    out = []
    for multi in field.interior("s", flow_axis):
        P = field.potentials[field.index(multi)]
        _, _, th_s, _ = _s_derivatives(field, multi, "s")
        _, _, th_t, _ = _s_derivatives(field, multi, flow_axis)
        Fb, Gc = evolution_rhs(P, th_s, flow)
        pred = np.concatenate([Fb, Gc])
        out.append(compare(th_t, pred, np.abs(th_t)))
    if not out:
        raise ValidationError("field has no interior stencil points")
    return Residual.combine(out)


def speed_structure_residual(P: LGPotential, flows=((Z, 2),), data: HodographData | None = None,
                             h: float = 1e-5) -> dict[str, Residual]:
    """(1/(V_km - V_kn)) dV_kn/dlambda_m = alpha_m gamma_n/(gamma_m - gamma_n)**2, m != n.

    Compared in the multiplied-out form, since F_m - F_n may vanish. The same
    equation is checked for the hodograph combination F of ``data``.
    """
    from .loewner import alpha_coeffs

    F = critical_frame(P)
    if P.K < 2:
        return {}
    A = alpha_coeffs(F)
    g, a = F.gamma, A.alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = a[:, None] * g[None, :] / (g[:, None] - g[None, :]) ** 2
    mask = ~np.eye(P.K, dtype=bool)
    rhs[~mask] = 0
    probe = LambdaProbe(P, F)
    funcs = {f"V{'' if side_of(s) == Z else 'bar'}{k}": (lambda Q, G, fl=(s, k): speeds(Q, fl, G))
             for s, k in [(Z, 1)] + list(flows)}
    if data is not None:
        funcs["F"] = lambda Q, G: hodograph_F(Q, data, G)
    out = {}
    for name, fn in funcs.items():
        V = fn(P, F)
        dV = probe.jacobian(fn, h)  # [m, n]
        diff = V[:, None] - V[None, :]
        scale = np.abs(V)[None, :] / np.abs(F.lam)[:, None] * np.ones_like(rhs.real)
        out[name] = compare(dV[mask], (diff * rhs)[mask], scale[mask])
    return out
