"""Kernel selection: compiled Lanczos core with a pure-numpy fallback.

The compiled extension (qbattery._lanczos, built from Cython) is used when
importable; otherwise the numpy implementation below takes over with
identical semantics. Set QBATTERY_PURE_PYTHON=1 to force the fallback,
e.g. for benchmarking one against the other.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from . import _lanczos as _compiled
except ImportError:  # extension not built; pure-python install
    _compiled = None

_FORCE_PYTHON = os.environ.get("QBATTERY_PURE_PYTHON", "") not in ("", "0")


def _lanczos_iteration_py(h, v_curr, v_prev, beta_prev, w_out):
    """Numpy reference implementation of one Lanczos step."""
    w = h.dot(v_curr)
    if beta_prev != 0.0:
        w -= beta_prev * v_prev
    alpha = float(np.vdot(v_curr, w).real)
    w -= alpha * v_curr
    beta = float(np.linalg.norm(w))
    w_out[:] = w
    return alpha, beta


def _lanczos_iteration_compiled(h, v_curr, v_prev, beta_prev, w_out):
    return _compiled.lanczos_iteration(
        h.indptr, h.indices, h.data, v_curr, v_prev, beta_prev, w_out
    )


if _compiled is not None and not _FORCE_PYTHON:
    lanczos_iteration = _lanczos_iteration_compiled
else:
    lanczos_iteration = _lanczos_iteration_py


def backend() -> str:
    """Name of the active kernel backend ('compiled' or 'python')."""
    return "compiled" if lanczos_iteration is _lanczos_iteration_compiled else "python"


def compiled_available() -> bool:
    return _compiled is not None
