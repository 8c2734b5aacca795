import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtoda import _kernels

needs_compiled = pytest.mark.skipif(_kernels.compiled is None, reason="compiled extension not built")


def cx(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def unit(rng, n):
    a = cx(rng, n, 0.2)
    a[0] = 1.0
    return a


@needs_compiled
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 40))
@settings(max_examples=40, deadline=None)
def test_series_kernels_agree(seed, n):
    rng = np.random.default_rng(seed)
    a, b = cx(rng, n), cx(rng, n)
    u = unit(rng, n)
    e = cx(rng, n, 0.3)
    e[0] = 0.0
    py, cc = _kernels.python, _kernels.compiled
    for name, args in [("mul_trunc", (a, b, n)), ("inv_series", (u, n)), ("exp_series", (e, n)),
                       ("log_series", (u, n)), ("pow_series", (u, -0.75, n))]:
        np.testing.assert_allclose(getattr(cc, name)(*args), getattr(py, name)(*args), rtol=1e-11, atol=1e-12)


@needs_compiled
def test_log_derivs_and_polish_agree(rng):
    p = cx(rng, 50, 3.0)
    b = cx(rng, 3)
    c = cx(rng, 2)
    kap = np.array([1.0, -0.5, 2.0])
    for e0 in (0.0, -2.0):
        for r, g in zip(_kernels.python.log_derivs(p, kap, b, e0, c), _kernels.compiled.log_derivs(p, kap, b, e0, c)):
            np.testing.assert_allclose(g, r, rtol=1e-12)
    q = cx(rng, 5)
    r0 = np.polynomial.polynomial.polyroots(q) * (1 + 1e-6)
    np.testing.assert_allclose(_kernels.compiled.newton_polish(q, r0, 6), _kernels.python.newton_polish(q, r0, 6),
                               rtol=1e-12)


def test_exp_log_inverse_each_backend(rng):
    for mod in filter(None, (_kernels.python, _kernels.compiled)):
        e = cx(rng, 12, 0.3)
        e[0] = 0.0
        np.testing.assert_allclose(mod.log_series(mod.exp_series(e, 12), 12), e, atol=1e-13)


def test_fallback_selected_by_environment():
    env = dict(os.environ, DTODA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import dtoda; print(dtoda.BACKEND)"], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_kernel_names_exported():
    for name in _kernels.KERNEL_NAMES:
        assert callable(getattr(_kernels, name))
