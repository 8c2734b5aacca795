"""Command line front end: ``check``, ``solve`` and ``metric``.

Exit status: 0 when every asserted identity passes, 1 when one fails,
2 for configuration or model errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import frobenius as fb
from ._fd import Residual, sample_points
from .errors import DegeneracyError, DTodaError, ValidationError
from .geometry import geometry_residuals, rotation_check
from .hydro import HodographData, hodograph_sweep, speed_structure_residual
from .lax import log_prod_neg_b
from .loewner import gt_residual, loewner_residual, potential_relations_residual
from .models import load_hodograph, load_model, model_to_dict

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    model: str
    out: str
    tol: float = 1e-8
    fd_step: float = 1e-5
    window: int | None = None
    seed: int = 7
    trials: int = 20
    fmt: str = "json"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValidationError("--tol must be positive")
        if not self.fd_step > 0:
            raise ValidationError("--fd-step must be positive")
        if self.window is not None and self.window < 4:
            raise ValidationError("--window must be at least 4")
        if self.trials < 1:
            raise ValidationError("--trials must be at least 1")


def _num(x):
    """JSON-friendly number: floats stay floats, complex becomes [re, im]."""
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, np.ndarray):
        return [_num(v) for v in x.tolist()] if x.dtype != object else [_num(v) for v in x]
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


class Report:
    def __init__(self, tol: float):
        self.tol = tol
        self.entries = []

    def add(self, tag: str, value, asserted: bool = True, tol: float | None = None, note: str | None = None):
        tol = self.tol if tol is None else tol
        entry = {"tag": tag}
        if value is None:
            entry.update(status="n/a")
        elif isinstance(value, Residual):
            entry.update(residual=value.rel, abs_residual=value.abs, tolerance=tol)
            entry["status"] = ("pass" if value.rel <= tol else "fail") if asserted else "reported"
        else:
            v = float(value)
            entry.update(residual=v, tolerance=tol)
            entry["status"] = ("pass" if v <= tol else "fail") if asserted else "reported"
        if note:
            entry["note"] = note
        self.entries.append(entry)

    @property
    def passed(self) -> bool:
        return all(e["status"] != "fail" for e in self.entries)


def run_check(cfg: RunConfig) -> dict:
    P = load_model(cfg.model)
    rng = np.random.default_rng(cfg.seed)
    h = cfg.fd_step
    rep = Report(cfg.tol)
    # FD residuals are O(h^2); scale the bar with the step unless it is tighter already
    fd_tol = max(cfg.tol, 100 * h * h)

    samples = sample_points(P, max(cfg.trials, 1), rng)
    rep.add("loewner_equation", loewner_residual(P, samples, h), tol=fd_tol)
    if P.K >= 2:
        for key, r in gt_residual(P, h).items():
            rep.add(f"gibbons_tsarev.{key}", r, tol=fd_tol)
    else:
        rep.add("gibbons_tsarev", None)
    for key, r in potential_relations_residual(P, h).items():
        rep.add(f"lax_potential.{key}", r, tol=fd_tol)

    if P.K >= 2:
        for key, r in rotation_check(P, h).items():
            rep.add(f"rotation_coefficients.{key}", r, tol=fd_tol)
        geo = geometry_residuals(P, h)
        for key in ("darboux", "log_darboux", "egorov", "combescure", "combescure_vs_gt", "hat_homogeneity"):
            rep.add(f"geometry.{key}", geo[key], tol=fd_tol)
        rep.add("geometry.flatness_sum", None if geo["flatness_sum"] is None else geo["flatness_sum"]["max_abs"],
                asserted=False)
        if geo["log_darboux_opposite_sign"] is not None:
            rep.add("geometry.log_darboux_opposite_sign", geo["log_darboux_opposite_sign"], asserted=False,
                    note="dbhat/dlog lambda_k + bhat bhat, which does not vanish")
        for key, r in speed_structure_residual(P, h=h).items():
            rep.add(f"speed_structure.{key}", r, tol=fd_tol)
    else:
        for tag in ("rotation_coefficients", "geometry", "speed_structure"):
            rep.add(tag, None)

    # pairing checks in the lambda chart and symmetry on random vectors
    forms = [fb.Form.ROUND] + ([fb.Form.ANGLE] if P.case == "I" else [])
    from .loewner import alpha_coeffs
    from .potential import critical_frame
    F = critical_frame(P)
    A = alpha_coeffs(F)
    for form in forms:
        G = fb.metric_matrix(P, form, "lambda")
        C = fb.cubic_tensor(P, form, "lambda")
        diag = A.alpha / F.gamma * (1.0 if form is fb.Form.ANGLE else 1.0 / F.lam)
        cdiag = A.alpha / F.gamma * (1.0 if form is fb.Form.ANGLE else 1.0 / F.lam ** 2)
        idx = np.arange(P.K)
        Cexp = np.zeros_like(C)
        Cexp[idx, idx, idx] = cdiag
        rep.add(f"pairing.{form.value}.lambda_chart", _rel(G, np.diag(diag)), tol=1e-10)
        rep.add(f"cubic.{form.value}.lambda_chart", _rel(C, Cexp), tol=1e-10)
        worst = 0.0
        for _ in range(cfg.trials):
            X, Y, Z = (fb.TangentVector("natural", rng.standard_normal(P.K) + 1j * rng.standard_normal(P.K))
                       for _ in range(3))
            s1 = fb.cubic(P, form, X, Y, Z)
            s2 = fb.cubic(P, form, Z, X, Y)
            p1 = fb.pairing(P, form, X, Y)
            p2 = fb.pairing(P, form, Y, X)
            worst = max(worst, abs(s1 - s2) / max(abs(s1), 1e-300), abs(p1 - p2) / max(abs(p1), 1e-300))
        rep.add(f"pairing.{form.value}.symmetry", worst, tol=1e-10)
        if P.case == "I" and form is fb.Form.ROUND:
            Gn = fb.metric_matrix(P, form, "natural")
            rep.add("pairing.round.case1_closed_form", _rel(Gn, fb.case1_round_natural(P)), tol=1e-8)
    for form in forms:
        try:
            rep_flat = fb.flat_metric_report(P, form, samples=3, seed=cfg.seed)
        except ValidationError as exc:
            rep.add(f"flat_chart.{form.value}", None, note=str(exc))
            continue
        scale = max(1.0, float(np.max(np.abs(rep_flat["expected"]))))
        rep.add(f"flat_chart.{form.value}.constants", rep_flat["max_deviation"] / scale, tol=1e-8)
        rep.add(f"flat_chart.{form.value}.constancy", rep_flat["max_variation"] / scale, tol=1e-8)
    eh = fb.euler_homogeneity_residual(P)
    for key, v in eh.items():
        rep.add(f"euler_homogeneity.{key}", v, tol=max(cfg.tol, 1e-9) if key != "euler_fd" else fd_tol)
    if P.case == "II":
        T = fb.thermodynamic_check(P)
        rep.add("case2.log_pbar_asymptotics", float(np.max(np.abs(T + np.eye(*T.shape)))), tol=1e-6)
        eN = np.exp(P.N * fb.qbar_N(P))
        prod = np.exp(log_prod_neg_b(P))
        rep.add("case2.qbar_N_product", abs(eN - prod) / abs(prod), tol=1e-10)
    return {"command": "check", "model": model_to_dict(P),
            "config": {"tol": cfg.tol, "fd_step": h, "seed": cfg.seed, "trials": cfg.trials},
            "checks": rep.entries, "passed": rep.passed}


def _rel(A, B) -> float:
    return float(np.max(np.abs(A - B)) / max(np.max(np.abs(B)), 1e-300))


def run_metric(cfg: RunConfig, chart: str, form: str | None) -> dict:
    P = load_model(cfg.model)
    form = fb.default_form(P) if form is None else fb.Form(form)
    out = {"command": "metric", "model": model_to_dict(P), "form": form.value, "chart": chart}
    flat = None
    if chart == "flat":
        flat = fb.flat_coordinates(P, form)
        rep = fb.flat_metric_report(P, form, samples=5, seed=cfg.seed)
        scale = max(1.0, float(np.max(np.abs(rep["expected"]))))
        out.update(kind=rep["kind"], labels=rep["labels"], values=_num(rep["values"]),
                   expected=_num(rep["expected"]), max_deviation=rep["max_deviation"],
                   max_variation=rep["max_variation"])
        out["passed"] = bool(max(rep["max_deviation"], rep["max_variation"]) / scale <= cfg.tol)
    else:
        out["labels"] = P.labels if chart == "natural" else [f"lambda{n + 1}" for n in range(P.K)]
        out["passed"] = True
    G = fb.metric_matrix(P, form, chart, flat)
    out["matrix"] = _num(G)
    _, assoc = fb.product_structure(P, form, chart, flat)
    out["associativity_residual"] = assoc
    return out


def run_solve(cfg: RunConfig, hodograph: str, grid: str, workers: int) -> tuple[list, list, bool]:
    P = load_model(cfg.model)
    data = load_hodograph(hodograph, P)
    field = hodograph_sweep(P, grid, data, workers=workers)
    tnames = [n for n, _ in field.axes if n != "s"]
    header = ["s"] + tnames
    header += [f"{part}_b{i + 1}" for i in range(P.M) for part in ("Re", "Im")]
    header += [f"{part}_c{k + 1}" for k in range(len(P.c)) for part in ("Re", "Im")]
    header += [f"{part}_lambda{n + 1}" for n in range(P.K) for part in ("Re", "Im")]
    header += ["residual", "iters"]
    rows = []
    for pt, Q, F, r, it in zip(field.points, field.potentials, field.frames, field.residual, field.iters):
        row = [float(pt.s)] + [float(pt.get(n)) for n in tnames]
        for z in list(Q.b) + list(Q.c) + list(F.lam):
            row += [float(z.real), float(z.imag)]
        rows.append(row + [float(r), int(it)])
    ok = bool(np.all(field.residual <= 1e-10 * np.maximum(1.0, np.abs([p.s for p in field.points]))))
    return header, rows, ok


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dtoda", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--window", type=int, default=None)

    p = sub.add_parser("check", help="run the identity suites on one model")
    common(p)
    p.add_argument("--fd-step", type=float, default=1e-5)
    p.add_argument("--trials", type=int, default=20)

    p = sub.add_parser("solve", help="hodograph sweep over a grid")
    common(p)
    p.add_argument("--hodograph", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("metric", help="metric matrix in a chart")
    common(p)
    p.add_argument("--chart", choices=["flat", "lambda", "natural"], default="flat")
    p.add_argument("--form", choices=["round", "angle"], default=None)
    return ap


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = RunConfig(args.command, args.model, args.out, tol=args.tol, window=args.window, seed=args.seed,
                        fd_step=getattr(args, "fd_step", 1e-5), trials=getattr(args, "trials", 20))
        if args.command == "check":
            report = run_check(cfg)
            _write_json(cfg.out, report)
            ok = report["passed"]
        elif args.command == "metric":
            report = run_metric(cfg, args.chart, args.form)
            _write_json(cfg.out, report)
            ok = report["passed"]
        else:
            header, rows, ok = run_solve(cfg, args.hodograph, args.grid, args.workers)
            with open(cfg.out, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in rows])
    except DegeneracyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DTodaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
