# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled assignment-enumeration kernel.

Behaviorally identical to ``_enumpure`` (same odometer order, budget
accounting, and wrap-around int64 arithmetic); this version runs the hot
per-assignment evaluation loop in C.
"""

import numpy as np

cdef enum:
    PUSH_CONST = 0
    PUSH_VAR = 1
    OP_ADD = 2
    OP_SUB = 3
    OP_MUL = 4
    OP_DIV = 5
    OP_EQ = 6
    OP_NE = 7
    OP_LT = 8
    OP_LE = 9
    OP_NOT = 12
    OP_NEG = 13
    OP_BOOL = 14
    OP_ANDN = 15
    OP_ORN = 16

ctypedef long long i64
ctypedef unsigned long long u64

cdef i64 I64_MIN = <i64>(<u64>1 << 63)


cdef inline i64 _div_trunc(i64 a, i64 b) nogil:
    if b == 0:
        return 0
    if a == I64_MIN and b == -1:
        return I64_MIN
    return a / b  # C division truncates toward zero


cdef i64 _eval(const int[:] code, const i64[:] args, const i64[:] values,
               i64[:] stack) nogil:
    cdef Py_ssize_t k, n = code.shape[0]
    cdef Py_ssize_t sp = 0
    cdef int op
    cdef i64 a, lhs, rhs, res
    cdef Py_ssize_t i
    for k in range(n):
        op = code[k]
        a = args[k]
        if op == PUSH_CONST:
            stack[sp] = a
            sp += 1
        elif op == PUSH_VAR:
            stack[sp] = values[<Py_ssize_t>a]
            sp += 1
        elif op == OP_ANDN:
            res = 1
            for i in range(<Py_ssize_t>a):
                if stack[sp - 1 - i] == 0:
                    res = 0
                    break
            sp -= <Py_ssize_t>a
            stack[sp] = res
            sp += 1
        elif op == OP_ORN:
            res = 0
            for i in range(<Py_ssize_t>a):
                if stack[sp - 1 - i] != 0:
                    res = 1
                    break
            sp -= <Py_ssize_t>a
            stack[sp] = res
            sp += 1
        elif op == OP_NOT:
            stack[sp - 1] = 1 if stack[sp - 1] == 0 else 0
        elif op == OP_BOOL:
            stack[sp - 1] = 1 if stack[sp - 1] != 0 else 0
        elif op == OP_NEG:
            stack[sp - 1] = <i64>(0 - <u64>stack[sp - 1])
        else:
            rhs = stack[sp - 1]
            lhs = stack[sp - 2]
            sp -= 1
            if op == OP_ADD:
                res = <i64>(<u64>lhs + <u64>rhs)
            elif op == OP_SUB:
                res = <i64>(<u64>lhs - <u64>rhs)
            elif op == OP_MUL:
                res = <i64>(<u64>lhs * <u64>rhs)
            elif op == OP_DIV:
                res = _div_trunc(lhs, rhs)
            elif op == OP_EQ:
                res = 1 if lhs == rhs else 0
            elif op == OP_NE:
                res = 1 if lhs != rhs else 0
            elif op == OP_LT:
                res = 1 if lhs < rhs else 0
            else:
                res = 1 if lhs <= rhs else 0
            stack[sp - 1] = res
    return stack[sp - 1]


def run_query(c_code, c_args, m_code, m_args, f_code, f_args,
              dom_flat, dom_off, nvars, mode, budget, stack_size):
    """See ``_enumpure.run_query``; same contract, compiled loop."""
    cdef const int[:] cc = np.ascontiguousarray(c_code, dtype=np.int32)
    cdef const i64[:] ca = np.ascontiguousarray(c_args, dtype=np.int64)
    cdef const int[:] mc = np.ascontiguousarray(m_code, dtype=np.int32)
    cdef const i64[:] ma = np.ascontiguousarray(m_args, dtype=np.int64)
    cdef const int[:] fc = np.ascontiguousarray(f_code, dtype=np.int32)
    cdef const i64[:] fa = np.ascontiguousarray(f_args, dtype=np.int64)
    cdef const i64[:] flat = np.ascontiguousarray(dom_flat, dtype=np.int64)
    cdef const int[:] off = np.ascontiguousarray(dom_off, dtype=np.int32)

    cdef Py_ssize_t nv = nvars
    cdef int md = mode
    cdef i64 bud = budget
    cdef i64 used = 0

    stack_arr = np.zeros(max(stack_size, 1), dtype=np.int64)
    idx_arr = np.zeros(max(nv, 1), dtype=np.int64)
    values_arr = np.zeros(max(nv, 1), dtype=np.int64)
    cdef i64[:] stack = stack_arr
    cdef i64[:] idx = idx_arr
    cdef i64[:] values = values_arr

    cdef Py_ssize_t i, pos
    cdef int width
    for i in range(nv):
        if off[i] < off[i + 1]:
            values[i] = flat[off[i]]

    collected = set()

    while True:
        if used >= bud:
            return (2, used, None)
        used += 1
        if _eval(cc, ca, values, stack) != 0:
            if _eval(mc, ma, values, stack) != 0:
                if md == 0:
                    return (0, used, [values[i] for i in range(nv)])
                collected.add(_eval(fc, fa, values, stack))
        pos = nv - 1
        while pos >= 0:
            idx[pos] += 1
            width = off[pos + 1] - off[pos]
            if idx[pos] < width:
                values[pos] = flat[off[pos] + idx[pos]]
                break
            idx[pos] = 0
            values[pos] = flat[off[pos]]
            pos -= 1
        if pos < 0:
            break

    if md == 0:
        return (1, used, None)
    return (0, used, sorted(collected))
