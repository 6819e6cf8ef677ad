"""Shared concrete value semantics for the mini-IR.

Both decision procedures in this package — the backward engine's
finite-domain solver and the forward enumeration oracle — must agree on how
expressions evaluate, which values count as true, and which finite domains
variables range over.  Centralizing those definitions here is what makes the
backward/forward equivalence property testable at all.

Value model:
  * integers are signed 64-bit with wrap-around arithmetic,
  * strings compare by value and only via (in)equality,
  * ``null`` is a reserved integer outside the 32-bit literal range,
  * division by zero yields 0 (total semantics; nothing traps).
"""

from __future__ import annotations

from . import ir
from .ir import AttrRef, IntLit, IrClass, NullLit, StrLit, VarRef

_U64 = 1 << 64
_I64_MIN = -(1 << 63)

#: Encoding of the ``null`` literal.  Outside the 32-bit literal range, so it
#: can never collide with an integer written in snapshot source.
NULL_VALUE = -(1 << 40) - 41

#: APIs whose return value is a string; everything else is treated as an
#: integer-valued unknown.
STRING_APIS = frozenset({"getName"})

INT_SORT = "int"
STR_SORT = "str"

Value = int | str


def wrap64(x: int) -> int:
    """Reduce an unbounded int to signed 64-bit two's complement."""
    return ((x - _I64_MIN) % _U64) + _I64_MIN


def truthy(v: Value) -> bool:
    """Branch-condition truth: nonzero integers; strings are object-like."""
    if isinstance(v, str):
        return True
    return v != 0


def apply_unary(op: str, v: Value) -> Value:
    if op != "neg":
        raise ValueError(f"unknown unary operator {op!r}")
    if isinstance(v, str):
        return 0
    return wrap64(-v)


def _div_trunc(a: int, b: int) -> int:
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return wrap64(-q if (a < 0) != (b < 0) else q)


def apply_binary(op: str, a: Value, b: Value) -> Value:
    if op == "==":
        return int(type(a) is type(b) and a == b)
    if op == "!=":
        return int(not (type(a) is type(b) and a == b))
    if op == "&&":
        return int(truthy(a) and truthy(b))
    if op == "||":
        return int(truthy(a) or truthy(b))
    if op in ("<", "<="):
        if isinstance(a, str) or isinstance(b, str):
            return 0
        return int(a < b if op == "<" else a <= b)
    # arithmetic: any string operand degrades to 0
    if isinstance(a, str) or isinstance(b, str):
        return 0
    if op == "+":
        return wrap64(a + b)
    if op == "-":
        return wrap64(a - b)
    if op == "*":
        return wrap64(a * b)
    if op == "/":
        return _div_trunc(a, b)
    raise ValueError(f"unknown binary operator {op!r}")


def str_eq_value(v: Value, literal: str) -> int:
    return int(isinstance(v, str) and v == literal)


def api_sort(api: str) -> str:
    return STR_SORT if api in STRING_APIS else INT_SORT


def operand_sort(op: ir.Operand, sorts: dict[str, str]) -> str:
    if isinstance(op, StrLit):
        return STR_SORT
    if isinstance(op, VarRef):
        return sorts.get(op.name, INT_SORT)
    return INT_SORT


def var_sorts(cls: IrClass) -> dict[tuple[str, str], str]:
    """Static sort assignment for every variable of every method.

    A variable is string-sorted when the method's code treats it like a
    string: it is the probed operand of a strEq, is assigned a string
    literal or a string-returning API, is copied from a string variable, or
    is equality-compared against one.  Runs to a fixpoint per method; both
    engines consult the same map, so disagreement is impossible even where
    the inference is imprecise.
    """
    out: dict[tuple[str, str], str] = {}
    for m in cls.methods:
        strs: set[str] = set()
        changed = True
        while changed:
            changed = False

            def mark(name: str) -> None:
                nonlocal changed
                if name not in strs:
                    strs.add(name)
                    changed = True

            for stmt in m.body:
                match stmt:
                    case ir.StrEqAssign(_, src, _):
                        mark(src.name)
                    case ir.Copy(dst, VarRef(name), None):
                        # copies transmit stringness both ways: the backward
                        # substitution can move a string use onto the source
                        if name in strs:
                            mark(dst)
                        if dst in strs:
                            mark(name)
                    case ir.Copy(dst, StrLit(_), None):
                        mark(dst)
                    case ir.ApiAssign(dst, api, _):
                        if api_sort(api) == STR_SORT:
                            mark(dst)
                    case ir.Binary(_, lhs, op, rhs) if op in ("==", "!="):
                        for a, b in ((lhs, rhs), (rhs, lhs)):
                            if isinstance(a, VarRef) and (
                                isinstance(b, StrLit)
                                or (isinstance(b, VarRef) and b.name in strs)
                            ):
                                mark(a.name)
        for name in strs:
            out[(m.name, name)] = STR_SORT
    return out


def class_pools(
    cls: IrClass, attr_consts: dict[str, int]
) -> tuple[tuple[int, ...], tuple[str, ...]]:
    """Class-wide constant pools: the shared seed for enumeration domains.

    Integers: every integer literal plus the ids of attribute constants the
    class references, plus the null encoding when ``null`` occurs.  Strings:
    every string literal, including strEq probes.
    """
    ints: set[int] = set()
    strs: set[str] = set()
    for m in cls.methods:
        for stmt in m.body:
            if isinstance(stmt, ir.StrEqAssign):
                strs.add(stmt.literal)
            for op in ir.stmt_operands(stmt):
                if isinstance(op, IntLit):
                    ints.add(op.value)
                elif isinstance(op, StrLit):
                    strs.add(op.value)
                elif isinstance(op, AttrRef):
                    ints.add(attr_consts[op.name])
                elif isinstance(op, NullLit):
                    ints.add(NULL_VALUE)
    return tuple(sorted(ints)), tuple(sorted(strs))


def int_witness(pool) -> int:
    """A fresh integer strictly greater than everything in the pool."""
    return max(pool, default=0) + 1


def str_witness(pool) -> str:
    w = "<fresh>"
    while w in pool:
        w += "'"
    return w
