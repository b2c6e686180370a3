"""Backend selection for tape evaluation.

The compiled Cython kernel is preferred when the extension built; otherwise
the numpy executor is used.  Both produce identical results (same instruction
stream, same summation order); the compiled path only removes per-instruction
dispatch overhead.  Set the environment variable ``DELTAFORMS_PURE=1`` to
force the numpy backend.
"""

from __future__ import annotations

import os

import numpy as np

from . import _tape_numpy
from .tape import Tape

try:
    from . import _evaltape as _compiled
except ImportError:  # pragma: no cover - depends on build host
    _compiled = None


def run_tape_numpy(tape: Tape, points) -> np.ndarray:
    return _tape_numpy.run_tape(tape, np.asarray(points, dtype=np.float64))


def run_tape_compiled(tape: Tape, points) -> np.ndarray:
    if _compiled is None:
        raise RuntimeError("compiled kernel is not available")
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(f"points must be 2-d, got shape {pts.shape}")
    if pts.shape[1] < tape.nvars:
        raise ValueError(f"points provide {pts.shape[1]} vars, tape needs {tape.nvars}")
    return _compiled.run_tape(tape.instrs, tape.consts, tape.out_regs, tape.n_regs, pts)


if _compiled is not None and not os.environ.get("DELTAFORMS_PURE"):
    _BACKEND = "compiled"
    run_tape = run_tape_compiled
else:
    _BACKEND = "numpy"
    run_tape = run_tape_numpy


def backend_name() -> str:
    """Name of the tape backend selected at import time."""
    return _BACKEND
