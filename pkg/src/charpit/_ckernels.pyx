# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled strip kernels: a postfix-tape interpreter and RK4 on the characteristic field."""

import numpy as np

from libc.math cimport sin, cos, exp, sqrt, log, fabs, isfinite, NAN
from libc.stdlib cimport malloc, free

NAME = "cython"

cdef enum:
    OK = 0
    DEGENERATE = 1
    NONFINITE = 2

# opcodes; keep in sync with charpit.program
cdef enum:
    CONST = 0
    VAR = 1
    ADD = 2
    SUB = 3
    MUL = 4
    DIV = 5
    NEG = 6
    POW = 7
    SIN = 8
    COS = 9
    EXP = 10
    SQRT = 11
    LN = 12


cdef inline double _ipow(double a, long n) noexcept nogil:
    cdef double result = 1.0
    cdef double base = a
    cdef bint first = True
    while n:
        if n & 1:
            if first:
                result = base
                first = False
            else:
                result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


cdef double _run(const int[::1] ops, const double[::1] args, Py_ssize_t lo, Py_ssize_t hi,
                 const double* state, double* stack) noexcept nogil:
    cdef Py_ssize_t i
    cdef Py_ssize_t sp = 0
    cdef int op
    cdef double v
    for i in range(lo, hi):
        op = ops[i]
        if op == CONST:
            stack[sp] = args[i]
            sp += 1
        elif op == VAR:
            stack[sp] = state[<int>args[i]]
            sp += 1
        elif op == ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == DIV:
            sp -= 1
            if stack[sp] == 0.0:
                stack[sp - 1] = NAN
            else:
                stack[sp - 1] = stack[sp - 1] / stack[sp]
        elif op == NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == POW:
            stack[sp - 1] = _ipow(stack[sp - 1], <long>args[i])
        elif op == SIN:
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == COS:
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == EXP:
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == SQRT:
            v = stack[sp - 1]
            stack[sp - 1] = sqrt(v) if v >= 0.0 else NAN
        elif op == LN:
            v = stack[sp - 1]
            stack[sp - 1] = log(v) if v > 0.0 else NAN
    return stack[0]


cdef double _field(const int[::1] ops, const double[::1] args, const Py_ssize_t[::1] starts,
                   const double* s, double* out, double* stack, bint unit_speed) noexcept nogil:
    # writes the field into out[0..4]; returns the nondegeneracy margin
    cdef double fx = _run(ops, args, starts[1], starts[2], s, stack)
    cdef double fy = _run(ops, args, starts[2], starts[3], s, stack)
    cdef double fz = _run(ops, args, starts[3], starts[4], s, stack)
    cdef double fp = _run(ops, args, starts[4], starts[5], s, stack)
    cdef double fq = _run(ops, args, starts[5], starts[6], s, stack)
    cdef double p = s[3]
    cdef double q = s[4]
    cdef double speed
    cdef int j
    out[0] = fp
    out[1] = fq
    out[2] = p * fp + q * fq
    out[3] = -fx - p * fz
    out[4] = -fy - q * fz
    speed = sqrt(fp * fp + fq * fq)
    if unit_speed and speed > 0.0:
        for j in range(5):
            out[j] = out[j] / speed
    return fabs(fp) if fabs(fp) > fabs(fq) else fabs(fq)


cdef inline bint _finite5(const double* v) noexcept nogil:
    cdef int j
    for j in range(5):
        if not isfinite(v[j]):
            return False
    return True


def integrate(program, state0, double h, long nsteps, double inv_tol, bint unit_speed=False):
    """Classical RK4 on the characteristic field; returns (samples, status)."""
    cdef const int[::1] ops = program.ops
    cdef const double[::1] args = program.args
    cdef const Py_ssize_t[::1] starts = program.starts
    out_arr = np.empty((nsteps + 1, 5))
    cdef double[:, ::1] out = out_arr
    cdef double s[5]
    cdef double tmp[5]
    cdef double k1[5]
    cdef double k2[5]
    cdef double k3[5]
    cdef double k4[5]
    cdef double half = 0.5 * h
    cdef double sixth = h / 6.0
    cdef double margin
    cdef long i
    cdef int j
    cdef int status = OK
    cdef long done = nsteps
    cdef double* stack = <double*>malloc(max(program.stack_size, 1) * sizeof(double))
    if stack == NULL:
        raise MemoryError()
    for j in range(5):
        s[j] = state0[j]
        out[0, j] = s[j]
    try:
        with nogil:
            for i in range(nsteps):
                margin = _field(ops, args, starts, s, k1, stack, unit_speed)
                if margin <= inv_tol:
                    status = DEGENERATE
                    done = i
                    break
                for j in range(5):
                    tmp[j] = s[j] + half * k1[j]
                _field(ops, args, starts, tmp, k2, stack, unit_speed)
                for j in range(5):
                    tmp[j] = s[j] + half * k2[j]
                _field(ops, args, starts, tmp, k3, stack, unit_speed)
                for j in range(5):
                    tmp[j] = s[j] + h * k3[j]
                _field(ops, args, starts, tmp, k4, stack, unit_speed)
                for j in range(5):
                    tmp[j] = s[j] + sixth * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                if not (_finite5(tmp) and _finite5(k1) and _finite5(k2)
                        and _finite5(k3) and _finite5(k4)):
                    status = NONFINITE
                    done = i
                    break
                for j in range(5):
                    s[j] = tmp[j]
                    out[i + 1, j] = s[j]
    finally:
        free(stack)
    return out_arr[: done + 1], status


def eval_tape(program, int which, states):
    """Value of tape ``which`` (0 = psi) at each row of ``states``; NaN where undefined."""
    cdef const int[::1] ops = program.ops
    cdef const double[::1] args = program.args
    cdef const Py_ssize_t[::1] starts = program.starts
    cdef const double[:, ::1] st = np.ascontiguousarray(states, dtype=np.float64)
    cdef long m = st.shape[0]
    res_arr = np.empty(m)
    cdef double[::1] res = res_arr
    cdef long i
    cdef Py_ssize_t lo = starts[which]
    cdef Py_ssize_t hi = starts[which + 1]
    cdef double* stack = <double*>malloc(max(program.stack_size, 1) * sizeof(double))
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(m):
                res[i] = _run(ops, args, lo, hi, &st[i, 0], stack)
    finally:
        free(stack)
    return res_arr
