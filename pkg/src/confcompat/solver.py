"""Finite-domain satisfiability and value enumeration for path constraints.

Replaces a general SMT solver: the atoms produced by the transformer table
only relate terms to constants appearing in the program, so enumerating
each variable over the constants occurring in the formula (plus one fresh
witness per sort, shared by all variables) decides them.

``symbolize`` prepares a path constraint: every distinct API-call term
becomes one fresh integer/string variable (congruent call terms share a
variable), attribute constants become their declared integer ids, and null
becomes its reserved integer encoding.

The per-assignment evaluation loop is the package's hot kernel.  A compiled
extension (``_enumcore``, Cython) is used when available, with a pure-Python
fallback (``_enumpure``); both implement the identical contract and the
selection happens once at import.  Set ``CONFCOMPAT_KERNEL=pure`` to force
the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import formula as F
from . import semantics
from ._enumpure import (
    ADD,
    ANDN,
    BOOL,
    DIV,
    EQ,
    LE,
    LT,
    MODE_ENUM,
    MODE_SAT,
    MUL,
    NE,
    NEG,
    NOT,
    ORN,
    PUSH_CONST,
    PUSH_VAR,
    STATUS_BUDGET,
    STATUS_OK,
    STATUS_UNSAT,
    SUB,
)
from .errors import ContractViolation

if os.environ.get("CONFCOMPAT_KERNEL") == "pure":
    from . import _enumpure as _kernel

    KERNEL = "pure"
else:
    try:
        from . import _enumcore as _kernel  # type: ignore[no-redef]

        KERNEL = "compiled"
    except ImportError:
        from . import _enumpure as _kernel  # type: ignore[no-redef]

        KERNEL = "pure"

DEFAULT_BUDGET = 1_000_000

_BINOPS = {"+": ADD, "-": SUB, "*": MUL, "/": DIV, "==": EQ, "!=": NE, "<": LT, "<=": LE}


# ---------------------------------------------------------------------------
# Symbolization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Symbolized:
    """A formula over plain variables plus the API-call table behind them."""

    formula: F.Formula
    calls: dict[F.Var, F.ApiCall]

    def call_sort(self, var: F.Var) -> str:
        return semantics.api_sort(self.calls[var].api)


def symbolize(f: F.Formula, attr_ids: dict[str, int] | None = None) -> Symbolized:
    """Replace API calls by fresh variables (one per distinct call term),
    attribute constants by their integer ids, and null by its encoding.

    Without an id table, attribute constants get deterministic ids outside
    the literal range, by sorted name.
    """
    calls: dict[F.ApiCall, F.Var] = {}
    interned: dict[str, int] = {}

    def attr_id(name: str) -> int:
        if attr_ids is not None:
            if name not in attr_ids:
                raise ContractViolation(f"no declared id for {name}")
            return attr_ids[name]
        if name not in interned:
            interned[name] = semantics.NULL_VALUE - 1 - len(interned)
        return interned[name]

    def sym_term(t: F.Term) -> F.Term:
        if isinstance(t, F.ApiCall):
            args = tuple(sym_term(a) for a in t.args)
            key = F.ApiCall(t.api, args)
            if key not in calls:
                calls[key] = F.Var(f"$c{len(calls)}_{t.api}", "$call")
            return calls[key]
        if isinstance(t, F.AttrConst):
            return F.IntConst(attr_id(t.name))
        if isinstance(t, F.NullConst):
            return F.IntConst(semantics.NULL_VALUE)
        if isinstance(t, F.Unary):
            return F.Unary(t.op, sym_term(t.operand))
        if isinstance(t, F.BinTerm):
            return F.BinTerm(sym_term(t.lhs), t.op, sym_term(t.rhs))
        if isinstance(t, F.StrEqTerm):
            return F.StrEqTerm(sym_term(t.operand), t.literal)
        return t

    def sym_formula(f: F.Formula) -> F.Formula:
        if isinstance(f, (F.TrueAtom, F.FalseAtom)):
            return f
        if isinstance(f, F.IntCmp):
            return F.atom_int_cmp(sym_term(f.lhs), f.rel, sym_term(f.rhs))
        if isinstance(f, F.StrEq):
            return F.atom_str_eq(sym_term(f.term), f.literal)
        if isinstance(f, F.BoolAtom):
            return F.atom_bool(sym_term(f.term))
        if isinstance(f, F.TargetAtom):
            return F.TargetAtom(
                f.api,
                sym_term(f.attr_arg),
                tuple(sym_term(a) for a in f.extra_args),
                f.site,
            )
        if isinstance(f, F.Not):
            return F.make_not(sym_formula(f.child))
        if isinstance(f, F.And):
            return F.make_and([sym_formula(c) for c in f.children])
        if isinstance(f, F.Or):
            return F.make_or([sym_formula(c) for c in f.children])
        raise TypeError(f"not a formula: {f!r}")

    out = sym_formula(f)
    return Symbolized(out, {v: k for k, v in calls.items()})


# ---------------------------------------------------------------------------
# Queries and outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverQuery:
    """A satisfiability / value-enumeration request.

    ``formula`` must be symbolized.  ``int_seed``/``str_seed`` extend the
    enumeration domains beyond the formula's own constants (the extraction
    pipeline seeds class-wide pools so backward and forward analyses share
    domains).  ``calls`` enables functional-consistency filtering: two
    variables standing for the same API over equal argument values must
    agree.  ``var_sorts`` overrides the formula-context sort inference.
    """

    formula: F.Formula
    focus: F.Term | None = None
    budget: int = DEFAULT_BUDGET
    int_seed: tuple[int, ...] = ()
    str_seed: tuple[str, ...] = ()
    calls: dict[F.Var, F.ApiCall] | None = None
    var_sorts: dict[F.Var, str] | None = None

    def __post_init__(self):
        if self.budget < 1:
            raise ContractViolation("budget must be >= 1")


@dataclass(frozen=True)
class Sat:
    model: dict[F.Var, semantics.Value]


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class BudgetExceeded:
    used: int


@dataclass(frozen=True)
class ValueSet:
    values: tuple
    closed: bool


@dataclass(frozen=True)
class Undecidable:
    reason: str = "budget"


# ---------------------------------------------------------------------------
# Compilation to kernel programs
# ---------------------------------------------------------------------------


@dataclass
class _Prep:
    order: list[F.Var]
    index: dict[F.Var, int]
    sorts: dict[F.Var, str]
    int_domain: list[int]
    str_domain: list[str]
    intern: dict[str, int]
    int_witness: int
    str_witness: str
    dom_flat: list[int]
    dom_off: list[int]
    grid: int
    consist: tuple[list[int], list[int]]


def _infer_var_sorts(f: F.Formula, focus: F.Term | None) -> dict[F.Var, str]:
    sorts: dict[F.Var, str] = {}

    def mark_str(t: F.Term) -> None:
        if isinstance(t, F.Var):
            sorts[t] = semantics.STR_SORT

    def walk_term(t: F.Term) -> None:
        if isinstance(t, F.StrEqTerm):
            mark_str(t.operand)
            walk_term(t.operand)
        elif isinstance(t, F.BinTerm):
            if t.op in ("==", "!="):
                if isinstance(t.lhs, F.StrConst):
                    mark_str(t.rhs)
                if isinstance(t.rhs, F.StrConst):
                    mark_str(t.lhs)
            walk_term(t.lhs)
            walk_term(t.rhs)
        elif isinstance(t, F.Unary):
            walk_term(t.operand)
        elif isinstance(t, F.ApiCall):
            for a in t.args:
                walk_term(a)

    for atom in F.formula_atoms(f):
        if isinstance(atom, F.StrEq):
            mark_str(atom.term)
        if isinstance(atom, F.IntCmp) and atom.rel in ("==", "!="):
            if isinstance(atom.lhs, F.StrConst):
                mark_str(atom.rhs)
            if isinstance(atom.rhs, F.StrConst):
                mark_str(atom.lhs)
        for t in F.formula_terms(atom):
            walk_term(t)
    if focus is not None:
        walk_term(focus)
    return sorts


def _term_sort(t: F.Term, sorts: dict[F.Var, str]) -> str:
    if isinstance(t, F.Var):
        return sorts.get(t, semantics.INT_SORT)
    if isinstance(t, F.StrConst):
        return semantics.STR_SORT
    if isinstance(t, (F.IntConst, F.NullConst, F.Unary, F.BinTerm, F.StrEqTerm)):
        return semantics.INT_SORT
    raise ContractViolation(f"term not symbolized: {t!r}")


class _Emitter:
    def __init__(self, prep: _Prep):
        self.prep = prep
        self.code: list[int] = []
        self.args: list[int] = []

    def emit(self, op: int, arg: int = 0) -> None:
        self.code.append(op)
        self.args.append(arg)

    def const(self, value: int) -> None:
        self.emit(PUSH_CONST, value)

    def term(self, t: F.Term) -> None:
        p = self.prep
        if isinstance(t, F.Var):
            self.emit(PUSH_VAR, p.index[t])
        elif isinstance(t, F.IntConst):
            self.const(semantics.wrap64(t.value))
        elif isinstance(t, F.StrConst):
            self.const(p.intern[t.value])
        elif isinstance(t, F.NullConst):
            self.const(semantics.NULL_VALUE)
        elif isinstance(t, F.Unary):
            if _term_sort(t.operand, p.sorts) == semantics.STR_SORT:
                self.const(0)
            else:
                self.term(t.operand)
                self.emit(NEG)
        elif isinstance(t, F.StrEqTerm):
            if _term_sort(t.operand, p.sorts) == semantics.STR_SORT:
                self.term(t.operand)
                self.const(p.intern[t.literal])
                self.emit(EQ)
            else:
                self.const(0)
        elif isinstance(t, F.BinTerm):
            ls = _term_sort(t.lhs, p.sorts)
            rs = _term_sort(t.rhs, p.sorts)
            if t.op in ("&&", "||"):
                self._truthy(t.lhs, ls)
                self._truthy(t.rhs, rs)
                self.emit(ANDN if t.op == "&&" else ORN, 2)
            elif t.op in ("==", "!="):
                if ls != rs:
                    self.const(1 if t.op == "!=" else 0)
                else:
                    self.term(t.lhs)
                    self.term(t.rhs)
                    self.emit(_BINOPS[t.op])
            elif ls == semantics.STR_SORT or rs == semantics.STR_SORT:
                # arithmetic and ordering degrade to 0 on strings
                self.const(0)
            else:
                self.term(t.lhs)
                self.term(t.rhs)
                self.emit(_BINOPS[t.op])
        else:
            raise ContractViolation(f"term not symbolized: {t!r}")

    def _truthy(self, t: F.Term, sort: str) -> None:
        if sort == semantics.STR_SORT:
            self.const(1)
        else:
            self.term(t)
            self.emit(BOOL)

    def formula(self, f: F.Formula) -> None:
        p = self.prep
        if isinstance(f, (F.TrueAtom, F.TargetAtom)):
            self.const(1)
        elif isinstance(f, F.FalseAtom):
            self.const(0)
        elif isinstance(f, F.IntCmp):
            ls = _term_sort(f.lhs, p.sorts)
            rs = _term_sort(f.rhs, p.sorts)
            if f.rel in ("==", "!="):
                if ls != rs:
                    self.const(1 if f.rel == "!=" else 0)
                else:
                    self.term(f.lhs)
                    self.term(f.rhs)
                    self.emit(_BINOPS[f.rel])
            elif ls == semantics.STR_SORT or rs == semantics.STR_SORT:
                self.const(0)
            else:
                self.term(f.lhs)
                self.term(f.rhs)
                self.emit(_BINOPS[f.rel])
        elif isinstance(f, F.StrEq):
            if _term_sort(f.term, p.sorts) == semantics.STR_SORT:
                self.term(f.term)
                self.const(p.intern[f.literal])
                self.emit(EQ)
            else:
                self.const(0)
        elif isinstance(f, F.BoolAtom):
            self._truthy(f.term, _term_sort(f.term, p.sorts))
        elif isinstance(f, F.Not):
            self.formula(f.child)
            self.emit(NOT)
        elif isinstance(f, F.And):
            for c in f.children:
                self.formula(c)
            self.emit(ANDN, len(f.children))
        elif isinstance(f, F.Or):
            for c in f.children:
                self.formula(c)
            self.emit(ORN, len(f.children))
        else:
            raise TypeError(f"not a formula: {f!r}")


def _closure_vars(visible: set[F.Var], calls: dict[F.Var, F.ApiCall] | None):
    """Variables reachable from the visible set through call arguments."""
    out = set(visible)
    if not calls:
        return out
    pending = [v for v in out if v in calls]
    while pending:
        v = pending.pop()
        acc: set[F.Var] = set()
        for a in calls[v].args:
            F.term_vars(a, acc)
        for u in acc:
            if u not in out:
                out.add(u)
                if u in calls:
                    pending.append(u)
    return out


def _prepare(q: SolverQuery) -> _Prep:
    f = q.formula
    visible = F.free_vars(f)
    if q.focus is not None:
        F.term_vars(q.focus, visible)
    all_vars = _closure_vars(visible, q.calls)
    order = sorted(all_vars, key=lambda v: (v.scope, v.name))
    index = {v: i for i, v in enumerate(order)}

    # precedence: API return sorts, then a caller-provided static map, then
    # formula-context inference for anything left (standalone queries)
    sorts = _infer_var_sorts(f, q.focus)
    if q.var_sorts:
        sorts.update(q.var_sorts)
    if q.calls:
        for v in all_vars:
            if v in q.calls:
                sorts[v] = semantics.api_sort(q.calls[v].api)

    ints, strs = F.formula_constants(f)
    if q.focus is not None:
        F._collect_consts(q.focus, ints, strs)
    if q.calls:
        for v in all_vars:
            if v in q.calls:
                for a in q.calls[v].args:
                    F._collect_consts(a, ints, strs)
    ints.update(q.int_seed)
    strs.update(q.str_seed)

    int_pool = sorted(ints)
    str_pool = sorted(strs)
    int_w = semantics.int_witness(int_pool)
    str_w = semantics.str_witness(str_pool)
    int_domain = int_pool + [int_w]
    str_domain = str_pool + [str_w]
    intern = {s: i for i, s in enumerate(str_domain)}

    dom_flat: list[int] = []
    dom_off: list[int] = [0]
    grid = 1
    for v in order:
        if sorts.get(v, semantics.INT_SORT) == semantics.STR_SORT:
            dom = [intern[s] for s in str_domain]
        else:
            dom = list(int_domain)
        dom_flat.extend(dom)
        dom_off.append(len(dom_flat))
        grid *= len(dom)

    prep = _Prep(
        order=order,
        index=index,
        sorts=sorts,
        int_domain=int_domain,
        str_domain=str_domain,
        intern=intern,
        int_witness=int_w,
        str_witness=str_w,
        dom_flat=dom_flat,
        dom_off=dom_off,
        grid=grid,
        consist=([], []),
    )

    # functional consistency: same API, elementwise-equal argument values
    # must yield equal results
    em = _Emitter(prep)
    npairs = 0
    if q.calls:
        called = [v for v in order if v in q.calls]
        for i, v1 in enumerate(called):
            c1 = q.calls[v1]
            for v2 in called[i + 1 :]:
                c2 = q.calls[v2]
                if c1.api != c2.api or len(c1.args) != len(c2.args):
                    continue
                for a1, a2 in zip(c1.args, c2.args):
                    if _term_sort(a1, prep.sorts) != _term_sort(a2, prep.sorts):
                        em.const(0)
                    else:
                        em.term(a1)
                        em.term(a2)
                        em.emit(EQ)
                em.emit(ANDN, len(c1.args))  # vacuously true for nullary
                em.emit(NOT)
                em.term(v1)
                em.term(v2)
                em.emit(EQ)
                em.emit(ORN, 2)
                npairs += 1
    if npairs == 0:
        em = _Emitter(prep)
        em.const(1)
    else:
        em.emit(ANDN, npairs)
    prep.consist = (em.code, em.args)
    return prep


def _compile_main(prep: _Prep, f: F.Formula) -> tuple[list[int], list[int]]:
    em = _Emitter(prep)
    em.formula(f)
    return em.code, em.args


def _compile_focus(prep: _Prep, focus: F.Term) -> tuple[list[int], list[int]]:
    em = _Emitter(prep)
    em.term(focus)
    return em.code, em.args


def _run(prep: _Prep, main, focus, mode: int, budget: int):
    c_code, c_args = prep.consist
    m_code, m_args = main
    f_code, f_args = focus if focus is not None else ([PUSH_CONST], [0])
    stack_size = max(len(c_code), len(m_code), len(f_code), 1)
    return _kernel.run_query(
        c_code,
        c_args,
        m_code,
        m_args,
        f_code,
        f_args,
        prep.dom_flat,
        prep.dom_off,
        len(prep.order),
        mode,
        budget,
        stack_size,
    )


def _decode(prep: _Prep, var: F.Var, raw: int) -> semantics.Value:
    if prep.sorts.get(var, semantics.INT_SORT) == semantics.STR_SORT:
        return prep.str_domain[raw]
    return raw


def check_sat(q: SolverQuery):
    """Decide satisfiability by grid enumeration, short-circuiting on the
    first satisfying assignment; ``BudgetExceeded`` if the budget runs out
    first."""
    prep = _prepare(q)
    main = _compile_main(prep, q.formula)
    status, used, payload = _run(prep, main, None, MODE_SAT, q.budget)
    if status == STATUS_OK:
        model = {
            v: _decode(prep, v, payload[i]) for i, v in enumerate(prep.order)
        }
        return Sat(model)
    if status == STATUS_UNSAT:
        return Unsat()
    return BudgetExceeded(used)


def enumerate_values(q: SolverQuery):
    """All values the focus term takes over satisfying assignments.

    ``closed`` is False when the focus can take the fresh witness value,
    i.e. the path does not confine it to constants mentioned anywhere.
    Returns ``Undecidable`` when the full sweep does not fit the budget.
    """
    if q.focus is None:
        raise ContractViolation("enumerate_values needs a focus term")
    prep = _prepare(q)
    if prep.grid > q.budget:
        return Undecidable()
    main = _compile_main(prep, q.formula)
    focus = _compile_focus(prep, q.focus)
    status, used, payload = _run(prep, main, focus, MODE_ENUM, q.budget)
    if status == STATUS_BUDGET:
        return Undecidable()
    fsort = _term_sort(q.focus, prep.sorts)
    if fsort == semantics.STR_SORT:
        values = tuple(prep.str_domain[v] for v in payload)
        closed = prep.str_witness not in values
    else:
        values = tuple(payload)
        closed = prep.int_witness not in values
    return ValueSet(values, closed)
