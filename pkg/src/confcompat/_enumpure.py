"""Pure-Python assignment-enumeration kernel.

Interface and observable behavior are identical to the compiled kernel in
``_enumcore``: same odometer order, same budget accounting, same int64
wrap-around arithmetic.  ``confcompat.solver`` picks whichever is importable.

Programs are flat postfix instruction streams produced by
``solver._compile``; all values are int64 (strings arrive pre-interned).
"""

from __future__ import annotations

from .semantics import wrap64

# opcodes (shared with _enumcore.pyx — keep in sync)
PUSH_CONST = 0
PUSH_VAR = 1
ADD = 2
SUB = 3
MUL = 4
DIV = 5
EQ = 6
NE = 7
LT = 8
LE = 9
NOT = 12
NEG = 13
BOOL = 14
ANDN = 15
ORN = 16

STATUS_OK = 0  # sat (mode 0) / sweep complete (mode 1)
STATUS_UNSAT = 1
STATUS_BUDGET = 2

MODE_SAT = 0
MODE_ENUM = 1


def _eval(code, args, values, stack):
    sp = 0
    for k in range(len(code)):
        op = code[k]
        a = args[k]
        if op == PUSH_CONST:
            stack[sp] = a
            sp += 1
        elif op == PUSH_VAR:
            stack[sp] = values[a]
            sp += 1
        elif op == ANDN:
            res = 1
            for i in range(a):
                if stack[sp - 1 - i] == 0:
                    res = 0
                    break
            sp -= a
            stack[sp] = res
            sp += 1
        elif op == ORN:
            res = 0
            for i in range(a):
                if stack[sp - 1 - i] != 0:
                    res = 1
                    break
            sp -= a
            stack[sp] = res
            sp += 1
        elif op == NOT:
            stack[sp - 1] = 1 if stack[sp - 1] == 0 else 0
        elif op == BOOL:
            stack[sp - 1] = 1 if stack[sp - 1] != 0 else 0
        elif op == NEG:
            stack[sp - 1] = wrap64(-stack[sp - 1])
        else:
            rhs = stack[sp - 1]
            lhs = stack[sp - 2]
            sp -= 1
            if op == ADD:
                res = wrap64(lhs + rhs)
            elif op == SUB:
                res = wrap64(lhs - rhs)
            elif op == MUL:
                res = wrap64(lhs * rhs)
            elif op == DIV:
                if rhs == 0:
                    res = 0
                else:
                    q = abs(lhs) // abs(rhs)
                    res = wrap64(-q if (lhs < 0) != (rhs < 0) else q)
            elif op == EQ:
                res = 1 if lhs == rhs else 0
            elif op == NE:
                res = 1 if lhs != rhs else 0
            elif op == LT:
                res = 1 if lhs < rhs else 0
            elif op == LE:
                res = 1 if lhs <= rhs else 0
            else:
                raise ValueError(f"bad opcode {op}")
            stack[sp - 1] = res
    return stack[sp - 1]


def run_query(
    c_code,
    c_args,
    m_code,
    m_args,
    f_code,
    f_args,
    dom_flat,
    dom_off,
    nvars,
    mode,
    budget,
    stack_size,
):
    """Enumerate the assignment grid in odometer order (last var fastest).

    mode 0: stop at the first consistent satisfying assignment.
    mode 1: full sweep collecting focus values on satisfying assignments.
    Returns (status, assignments_used, payload).
    """
    c_code = list(c_code)
    c_args = list(c_args)
    m_code = list(m_code)
    m_args = list(m_args)
    f_code = list(f_code)
    f_args = list(f_args)
    dom_flat = list(dom_flat)
    dom_off = list(dom_off)

    stack = [0] * max(stack_size, 1)
    idx = [0] * nvars
    values = [dom_flat[dom_off[i]] if dom_off[i] < dom_off[i + 1] else 0 for i in range(nvars)]
    collected: set[int] = set()
    used = 0

    while True:
        if used >= budget:
            return (STATUS_BUDGET, used, None)
        used += 1
        if _eval(c_code, c_args, values, stack) != 0:
            if _eval(m_code, m_args, values, stack) != 0:
                if mode == MODE_SAT:
                    return (STATUS_OK, used, list(values))
                collected.add(_eval(f_code, f_args, values, stack))
        # advance odometer
        pos = nvars - 1
        while pos >= 0:
            idx[pos] += 1
            width = dom_off[pos + 1] - dom_off[pos]
            if idx[pos] < width:
                values[pos] = dom_flat[dom_off[pos] + idx[pos]]
                break
            idx[pos] = 0
            values[pos] = dom_flat[dom_off[pos]]
            pos -= 1
        if pos < 0:
            break

    if mode == MODE_SAT:
        return (STATUS_UNSAT, used, None)
    return (STATUS_OK, used, sorted(collected))
