"""Flattening of expression trees into evaluation tapes.

A tape is a register-based instruction list shared by the numpy fallback and
the compiled kernel.  Compiling several expressions together deduplicates
common subtrees, which matters for the pulled-back integrands where the same
chain components appear in every coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Add, Const, Cos, Div, Exp, Mul, Neg, Pow, ScalarField, Sin, Sub, Var

OP_VAR = 0
OP_CONST = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_SIN = 7
OP_COS = 8
OP_EXP = 9
OP_POWI = 10

_BINOPS = {Add: OP_ADD, Sub: OP_SUB, Mul: OP_MUL, Div: OP_DIV}
_UNOPS = {Neg: OP_NEG, Sin: OP_SIN, Cos: OP_COS, Exp: OP_EXP}


@dataclass(frozen=True)
class Tape:
    instrs: np.ndarray  # (M, 4) int32 rows [op, dst, a, b]
    consts: np.ndarray  # (C,) float64
    n_regs: int
    out_regs: np.ndarray  # (K,) int32, one register per compiled expression
    nvars: int


def compile_tape(exprs: list[ScalarField]) -> Tape:
    instrs: list[tuple[int, int, int, int]] = []
    consts: list[float] = []
    const_index: dict[float, int] = {}
    reg_of_key: dict[tuple, int] = {}
    nvars = 0

    def emit(op, a, b) -> int:
        dst = len(instrs)
        instrs.append((op, dst, a, b))
        return dst

    def compile_node(e: ScalarField) -> int:
        nonlocal nvars
        # iterative post-order walk; keys make shared subtrees single registers
        done: dict[int, int] = {}
        stack: list[tuple[ScalarField, bool]] = [(e, False)]
        while stack:
            node, ready = stack.pop()
            if id(node) in done:
                continue
            if not ready:
                stack.append((node, True))
                for child in node.args:
                    stack.append((child, False))
                continue
            if isinstance(node, Const):
                idx = const_index.get(node.value)
                if idx is None:
                    idx = len(consts)
                    consts.append(node.value)
                    const_index[node.value] = idx
                key = ("c", idx)
                if key not in reg_of_key:
                    reg_of_key[key] = emit(OP_CONST, idx, 0)
            elif isinstance(node, Var):
                nvars = max(nvars, node.index + 1)
                key = ("v", node.index)
                if key not in reg_of_key:
                    reg_of_key[key] = emit(OP_VAR, node.index, 0)
            elif type(node) in _BINOPS:
                ra, rb = done[id(node.args[0])], done[id(node.args[1])]
                key = (node.op, ra, rb)
                if key not in reg_of_key:
                    reg_of_key[key] = emit(_BINOPS[type(node)], ra, rb)
            elif type(node) in _UNOPS:
                ra = done[id(node.args[0])]
                key = (node.op, ra)
                if key not in reg_of_key:
                    reg_of_key[key] = emit(_UNOPS[type(node)], ra, 0)
            elif isinstance(node, Pow):
                ra = done[id(node.args[0])]
                key = ("pow", ra, node.exponent)
                if key not in reg_of_key:
                    reg_of_key[key] = emit(OP_POWI, ra, node.exponent)
            else:  # pragma: no cover - exhaustive over node types
                raise TypeError(f"cannot compile node {node!r}")
            done[id(node)] = reg_of_key[key]
        return done[id(e)]

    outs = [compile_node(e) for e in exprs]
    return Tape(
        instrs=np.asarray(instrs, dtype=np.int32).reshape(-1, 4),
        consts=np.asarray(consts, dtype=np.float64),
        n_regs=len(instrs),
        out_regs=np.asarray(outs, dtype=np.int32),
        nvars=nvars,
    )
