"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
module is used. Setting ``DTODA_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pykernels as python

try:
    if os.environ.get("DTODA_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as compiled
except ImportError:
    compiled = None

active = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

KERNEL_NAMES = (
    "mul_trunc",
    "inv_series",
    "exp_series",
    "log_series",
    "pow_series",
    "log_derivs",
    "newton_polish",
)

mul_trunc = active.mul_trunc
inv_series = active.inv_series
exp_series = active.exp_series
log_series = active.log_series
pow_series = active.pow_series
log_derivs = active.log_derivs
newton_polish = active.newton_polish
