"""Pure-numpy tape executor (fallback backend)."""

from __future__ import annotations

import numpy as np

from .tape import (
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_DIV,
    OP_EXP,
    OP_MUL,
    OP_NEG,
    OP_POWI,
    OP_SIN,
    OP_SUB,
    OP_VAR,
    Tape,
)

_CHUNK = 16384


def run_tape(tape: Tape, points: np.ndarray) -> np.ndarray:
    """Evaluate all tape outputs at an (N, nvars) point array -> (K, N)."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(f"points must be 2-d, got shape {pts.shape}")
    if pts.shape[1] < tape.nvars:
        raise ValueError(f"points provide {pts.shape[1]} vars, tape needs {tape.nvars}")
    n = pts.shape[0]
    out = np.empty((len(tape.out_regs), n), dtype=np.float64)
    for start in range(0, max(n, 1), _CHUNK):
        stop = min(start + _CHUNK, n)
        if stop > start:
            _run_chunk(tape, pts[start:stop], out[:, start:stop])
    return out


def _run_chunk(tape: Tape, pts: np.ndarray, out: np.ndarray) -> None:
    regs: list[np.ndarray | None] = [None] * tape.n_regs
    consts = tape.consts
    with np.errstate(all="ignore"):
        for op, dst, a, b in tape.instrs:
            if op == OP_ADD:
                regs[dst] = regs[a] + regs[b]
            elif op == OP_MUL:
                regs[dst] = regs[a] * regs[b]
            elif op == OP_SUB:
                regs[dst] = regs[a] - regs[b]
            elif op == OP_VAR:
                regs[dst] = pts[:, a]
            elif op == OP_CONST:
                regs[dst] = np.full(pts.shape[0], consts[a])
            elif op == OP_DIV:
                regs[dst] = regs[a] / regs[b]
            elif op == OP_NEG:
                regs[dst] = -regs[a]
            elif op == OP_SIN:
                regs[dst] = np.sin(regs[a])
            elif op == OP_COS:
                regs[dst] = np.cos(regs[a])
            elif op == OP_EXP:
                regs[dst] = np.exp(regs[a])
            elif op == OP_POWI:
                regs[dst] = regs[a] ** b
            else:  # pragma: no cover
                raise ValueError(f"unknown opcode {op}")
        for i, r in enumerate(tape.out_regs):
            out[i] = regs[r]
