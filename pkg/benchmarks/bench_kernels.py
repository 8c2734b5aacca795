"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called with inputs sized like the inner loops of the solver
(series windows of 16-64 terms, a few hundred evaluation points, degree 3-6
polynomials) and both backends must agree before they are timed.
"""
import argparse
import timeit

import numpy as np

from dtoda import _kernels


def cases(rng):
    def cx(n):
        return rng.standard_normal(n) + 1j * rng.standard_normal(n)

    for L in (16, 64):
        a, b = cx(L), cx(L)
        u = cx(L) * 0.1
        u[0] = 1.0
        e = cx(L) * 0.1
        e[0] = 0.0
        yield f"mul_trunc L={L}", "mul_trunc", (a, b, L)
        yield f"inv_series L={L}", "inv_series", (u, L)
        yield f"exp_series L={L}", "exp_series", (e, L)
        yield f"log_series L={L}", "log_series", (u, L)
        yield f"pow_series L={L}", "pow_series", (u, 1.0 / 3.0, L)
    p = cx(400) * 3
    kappa = np.array([1.0, 2.0, 0.5])
    yield "log_derivs 400 pts", "log_derivs", (p, kappa, cx(3), -1.0, cx(2))
    q = cx(6)
    roots = np.polynomial.polynomial.polyroots(q)
    yield "newton_polish deg 5", "newton_polish", (q, roots, 8)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels.compiled is None:
        print("compiled extension not available; only the fallback can be timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'python us':>12}{'compiled us':>14}{'speedup':>10}")
    for label, name, inputs in cases(rng):
        py = getattr(_kernels.python, name)
        t_py = min(timeit.repeat(lambda: py(*inputs), number=50, repeat=args.repeat)) / 50 * 1e6
        if _kernels.compiled is None:
            print(f"{label:<22}{t_py:>12.1f}{'-':>14}{'-':>10}")
            continue
        cc = getattr(_kernels.compiled, name)
        ref, got = py(*inputs), cc(*inputs)
        for r, g in zip(ref if isinstance(ref, tuple) else (ref,), got if isinstance(got, tuple) else (got,)):
            np.testing.assert_allclose(g, r, rtol=1e-10, atol=1e-12)
        t_c = min(timeit.repeat(lambda: cc(*inputs), number=50, repeat=args.repeat)) / 50 * 1e6
        print(f"{label:<22}{t_py:>12.1f}{t_c:>14.1f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
