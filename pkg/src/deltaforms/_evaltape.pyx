# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled tape executor: same instruction stream as the numpy fallback,
without per-instruction dispatch overhead."""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport cos as c_cos
from libc.math cimport exp as c_exp
from libc.math cimport pow as c_pow
from libc.math cimport sin as c_sin

cnp.import_array()

# opcode values mirror deltaforms.tape
DEF OP_VAR = 0
DEF OP_CONST = 1
DEF OP_ADD = 2
DEF OP_SUB = 3
DEF OP_MUL = 4
DEF OP_DIV = 5
DEF OP_NEG = 6
DEF OP_SIN = 7
DEF OP_COS = 8
DEF OP_EXP = 9
DEF OP_POWI = 10


cdef inline double _powi(double x, int n) noexcept nogil:
    cdef double r = 1.0
    cdef double base = x
    cdef int m = n
    if m < 0:
        base = 1.0 / x
        m = -m
    while m:
        if m & 1:
            r *= base
        base *= base
        m >>= 1
    return r


@cython.boundscheck(False)
def run_tape(instrs, consts, out_regs, int n_regs, points):
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] ins = np.ascontiguousarray(instrs, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] cst = np.ascontiguousarray(consts, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] outs = np.ascontiguousarray(out_regs, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] pts = np.ascontiguousarray(points, dtype=np.float64)

    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t nv = pts.shape[1]
    cdef Py_ssize_t n_ins = ins.shape[0]
    cdef Py_ssize_t n_out = outs.shape[0]

    out_arr = np.empty((n_out, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] out = out_arr

    # registers for one chunk; chunk sized to keep the buffer around 32 MB
    cdef Py_ssize_t chunk = 16384
    if n_regs > 256:
        chunk = max(1024, 4_000_000 // n_regs)
    if chunk > n and n > 0:
        chunk = n
    regs_arr = np.empty((n_regs, chunk), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] regs = regs_arr

    cdef Py_ssize_t start, stop, cl, i, p
    cdef int op, dst, a, b
    cdef double cval
    cdef double* ra
    cdef double* rb
    cdef double* rd

    start = 0
    while start < n:
        stop = start + chunk
        if stop > n:
            stop = n
        cl = stop - start
        with nogil:
            for i in range(n_ins):
                op = ins[i, 0]
                dst = ins[i, 1]
                a = ins[i, 2]
                b = ins[i, 3]
                rd = &regs[dst, 0]
                if op == OP_ADD:
                    ra = &regs[a, 0]
                    rb = &regs[b, 0]
                    for p in range(cl):
                        rd[p] = ra[p] + rb[p]
                elif op == OP_MUL:
                    ra = &regs[a, 0]
                    rb = &regs[b, 0]
                    for p in range(cl):
                        rd[p] = ra[p] * rb[p]
                elif op == OP_SUB:
                    ra = &regs[a, 0]
                    rb = &regs[b, 0]
                    for p in range(cl):
                        rd[p] = ra[p] - rb[p]
                elif op == OP_VAR:
                    for p in range(cl):
                        rd[p] = pts[start + p, a]
                elif op == OP_CONST:
                    cval = cst[a]
                    for p in range(cl):
                        rd[p] = cval
                elif op == OP_DIV:
                    ra = &regs[a, 0]
                    rb = &regs[b, 0]
                    for p in range(cl):
                        rd[p] = ra[p] / rb[p]
                elif op == OP_NEG:
                    ra = &regs[a, 0]
                    for p in range(cl):
                        rd[p] = -ra[p]
                elif op == OP_SIN:
                    ra = &regs[a, 0]
                    for p in range(cl):
                        rd[p] = c_sin(ra[p])
                elif op == OP_COS:
                    ra = &regs[a, 0]
                    for p in range(cl):
                        rd[p] = c_cos(ra[p])
                elif op == OP_EXP:
                    ra = &regs[a, 0]
                    for p in range(cl):
                        rd[p] = c_exp(ra[p])
                elif op == OP_POWI:
                    ra = &regs[a, 0]
                    if -8 <= b <= 8:
                        for p in range(cl):
                            rd[p] = _powi(ra[p], b)
                    else:
                        for p in range(cl):
                            rd[p] = c_pow(ra[p], <double> b)
            for i in range(n_out):
                ra = &regs[outs[i], 0]
                for p in range(cl):
                    out[i, start + p] = ra[p]
        start = stop

    return out_arr
