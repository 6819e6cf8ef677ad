"""Symbolic terms and first-order path-constraint formulas.

Terms are built from program variables (scoped by the enclosing method so
interprocedural propagation cannot capture same-named locals), literals,
attribute constants, and uninterpreted API-call applications.  Formulas are
negation-tolerant trees of conjunctions/disjunctions over atoms.

Construction goes through the ``make_*`` / ``atom_*`` helpers, which apply
exactly the simplifications the backward engine is allowed: flattening,
True/False absorption, duplicate-atom elimination within a conjunct, and
complementary-literal detection.  No term-level arithmetic folding happens;
the solver decides everything else.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import semantics
from .ir import Site

# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    """A program variable; ``scope`` qualifies the declaring method."""

    name: str
    scope: str = ""

    def __str__(self):
        return f"{self.scope}::{self.name}" if self.scope else self.name


@dataclass(frozen=True)
class IntConst(Term):
    value: int


@dataclass(frozen=True)
class StrConst(Term):
    value: str


@dataclass(frozen=True)
class AttrConst(Term):
    """An attribute constant by name, e.g. ``R.attr.color``."""

    name: str


@dataclass(frozen=True)
class NullConst(Term):
    pass


NULL = NullConst()


@dataclass(frozen=True)
class ApiCall(Term):
    """Uninterpreted application of a framework API to argument terms."""

    api: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Unary(Term):
    op: str
    operand: Term


@dataclass(frozen=True)
class BinTerm(Term):
    lhs: Term
    op: str
    rhs: Term


@dataclass(frozen=True)
class StrEqTerm(Term):
    """Boolean-valued string-equality probe against a literal."""

    operand: Term
    literal: str


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class TrueAtom(Formula):
    pass


@dataclass(frozen=True)
class FalseAtom(Formula):
    pass


TRUE = TrueAtom()
FALSE = FalseAtom()


@dataclass(frozen=True)
class IntCmp(Formula):
    """Comparison atom; rel is one of ==, !=, <, <=."""

    lhs: Term
    rel: str
    rhs: Term


@dataclass(frozen=True)
class StrEq(Formula):
    term: Term
    literal: str


@dataclass(frozen=True)
class BoolAtom(Formula):
    term: Term


@dataclass(frozen=True)
class TargetAtom(Formula):
    """Records the configuration-API invocation anchoring a path constraint.

    Truth-functionally inert (always satisfied); carries the call site and
    the argument terms as transformed along the path.
    """

    api: str
    attr_arg: Term
    extra_args: tuple[Term, ...]
    site: Site


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    children: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    children: tuple[Formula, ...]


# ---------------------------------------------------------------------------
# Normalizing constructors
# ---------------------------------------------------------------------------


def _is_ground(t: Term) -> bool:
    return isinstance(t, (IntConst, StrConst, NullConst))


def _ground_value(t: Term) -> semantics.Value:
    if isinstance(t, IntConst):
        return t.value
    if isinstance(t, StrConst):
        return t.value
    if isinstance(t, NullConst):
        return semantics.NULL_VALUE
    raise ValueError(f"not ground: {t!r}")


def make_not(f: Formula) -> Formula:
    if f is TRUE or isinstance(f, TrueAtom):
        return FALSE
    if f is FALSE or isinstance(f, FalseAtom):
        return TRUE
    if isinstance(f, Not):
        return f.child
    return Not(f)


def _complementary(a: Formula, b: Formula) -> bool:
    if isinstance(b, Not) and b.child == a:
        return True
    if isinstance(a, Not) and a.child == b:
        return True
    if isinstance(a, IntCmp) and isinstance(b, IntCmp):
        if a.lhs == b.lhs and a.rhs == b.rhs:
            return {a.rel, b.rel} == {"==", "!="}
    return False


def make_and(parts) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, TrueAtom):
            continue
        if isinstance(p, FalseAtom):
            return FALSE
        if isinstance(p, And):
            flat.extend(p.children)
        else:
            flat.append(p)
    seen: list[Formula] = []
    for p in flat:
        if p in seen:
            continue
        if any(_complementary(p, q) for q in seen):
            return FALSE
        seen.append(p)
    if not seen:
        return TRUE
    if len(seen) == 1:
        return seen[0]
    return And(tuple(seen))


def make_or(parts) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, FalseAtom):
            continue
        if isinstance(p, TrueAtom):
            return TRUE
        if isinstance(p, Or):
            flat.extend(p.children)
        else:
            flat.append(p)
    seen: list[Formula] = []
    for p in flat:
        if p not in seen:
            seen.append(p)
    if not seen:
        return FALSE
    if len(seen) == 1:
        return seen[0]
    return Or(tuple(seen))


def atom_int_cmp(lhs: Term, rel: str, rhs: Term) -> Formula:
    if _is_ground(lhs) and _is_ground(rhs):
        return (
            TRUE
            if semantics.apply_binary(rel, _ground_value(lhs), _ground_value(rhs))
            else FALSE
        )
    return IntCmp(lhs, rel, rhs)


def atom_str_eq(term: Term, literal: str) -> Formula:
    if _is_ground(term):
        return TRUE if semantics.str_eq_value(_ground_value(term), literal) else FALSE
    if isinstance(term, AttrConst):
        return FALSE  # attribute ids are integers, never equal to a string
    return StrEq(term, literal)


def atom_bool(term: Term) -> Formula:
    """Interpret a term as a branch condition, normalizing where the shape
    already says what the atom means."""
    if _is_ground(term):
        return TRUE if semantics.truthy(_ground_value(term)) else FALSE
    if isinstance(term, BinTerm):
        if term.op in ("==", "!=", "<", "<="):
            return atom_int_cmp(term.lhs, term.op, term.rhs)
        if term.op == "&&":
            return make_and([atom_bool(term.lhs), atom_bool(term.rhs)])
        if term.op == "||":
            return make_or([atom_bool(term.lhs), atom_bool(term.rhs)])
    if isinstance(term, StrEqTerm):
        return atom_str_eq(term.operand, term.literal)
    return BoolAtom(term)


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


def subst_term(t: Term, var: Var, repl: Term) -> Term:
    if t == var:
        return repl
    if isinstance(t, ApiCall):
        args = tuple(subst_term(a, var, repl) for a in t.args)
        return t if args == t.args else ApiCall(t.api, args)
    if isinstance(t, Unary):
        inner = subst_term(t.operand, var, repl)
        return t if inner is t.operand else Unary(t.op, inner)
    if isinstance(t, BinTerm):
        lhs = subst_term(t.lhs, var, repl)
        rhs = subst_term(t.rhs, var, repl)
        return t if (lhs is t.lhs and rhs is t.rhs) else BinTerm(lhs, t.op, rhs)
    if isinstance(t, StrEqTerm):
        inner = subst_term(t.operand, var, repl)
        return t if inner is t.operand else StrEqTerm(inner, t.literal)
    return t


def subst(f: Formula, var: Var, repl: Term) -> Formula:
    """φ[repl/var]: replace the variable in every atom, including inside
    API-call and target-invocation argument terms."""
    if isinstance(f, (TrueAtom, FalseAtom)):
        return f
    if isinstance(f, IntCmp):
        return atom_int_cmp(
            subst_term(f.lhs, var, repl), f.rel, subst_term(f.rhs, var, repl)
        )
    if isinstance(f, StrEq):
        return atom_str_eq(subst_term(f.term, var, repl), f.literal)
    if isinstance(f, BoolAtom):
        return atom_bool(subst_term(f.term, var, repl))
    if isinstance(f, TargetAtom):
        return TargetAtom(
            f.api,
            subst_term(f.attr_arg, var, repl),
            tuple(subst_term(a, var, repl) for a in f.extra_args),
            f.site,
        )
    if isinstance(f, Not):
        return make_not(subst(f.child, var, repl))
    if isinstance(f, And):
        return make_and([subst(c, var, repl) for c in f.children])
    if isinstance(f, Or):
        return make_or([subst(c, var, repl) for c in f.children])
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Queries over formulas
# ---------------------------------------------------------------------------


def term_vars(t: Term, acc: set[Var]) -> None:
    if isinstance(t, Var):
        acc.add(t)
    elif isinstance(t, ApiCall):
        for a in t.args:
            term_vars(a, acc)
    elif isinstance(t, Unary):
        term_vars(t.operand, acc)
    elif isinstance(t, BinTerm):
        term_vars(t.lhs, acc)
        term_vars(t.rhs, acc)
    elif isinstance(t, StrEqTerm):
        term_vars(t.operand, acc)


def formula_terms(f: Formula):
    """Yield every top-level term appearing in the formula's atoms."""
    if isinstance(f, IntCmp):
        yield f.lhs
        yield f.rhs
    elif isinstance(f, StrEq):
        yield f.term
    elif isinstance(f, BoolAtom):
        yield f.term
    elif isinstance(f, TargetAtom):
        yield f.attr_arg
        yield from f.extra_args
    elif isinstance(f, Not):
        yield from formula_terms(f.child)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            yield from formula_terms(c)


def free_vars(f: Formula) -> set[Var]:
    acc: set[Var] = set()
    for t in formula_terms(f):
        term_vars(t, acc)
    return acc


def formula_atoms(f: Formula):
    if isinstance(f, (IntCmp, StrEq, BoolAtom, TargetAtom)):
        yield f
    elif isinstance(f, Not):
        yield from formula_atoms(f.child)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            yield from formula_atoms(c)


def target_atoms(f: Formula) -> list[TargetAtom]:
    return [a for a in formula_atoms(f) if isinstance(a, TargetAtom)]


def disjuncts(f: Formula) -> tuple[Formula, ...]:
    """The top-level disjuncts of a path constraint (itself, if not an Or)."""
    if isinstance(f, Or):
        return f.children
    return (f,)


def _collect_consts(t: Term, ints: set[int], strs: set[str]) -> None:
    if isinstance(t, IntConst):
        ints.add(t.value)
    elif isinstance(t, StrConst):
        strs.add(t.value)
    elif isinstance(t, NullConst):
        ints.add(semantics.NULL_VALUE)
    elif isinstance(t, ApiCall):
        for a in t.args:
            _collect_consts(a, ints, strs)
    elif isinstance(t, Unary):
        _collect_consts(t.operand, ints, strs)
    elif isinstance(t, BinTerm):
        _collect_consts(t.lhs, ints, strs)
        _collect_consts(t.rhs, ints, strs)
    elif isinstance(t, StrEqTerm):
        _collect_consts(t.operand, ints, strs)
        strs.add(t.literal)


def formula_constants(f: Formula) -> tuple[set[int], set[str]]:
    """Integer and string constants occurring anywhere in the formula."""
    ints: set[int] = set()
    strs: set[str] = set()
    for atom in formula_atoms(f):
        if isinstance(atom, StrEq):
            strs.add(atom.literal)
        for t in formula_terms(atom):
            _collect_consts(t, ints, strs)
    return ints, strs


# ---------------------------------------------------------------------------
# Concrete evaluation
# ---------------------------------------------------------------------------


def eval_term(t: Term, env, api_fn=None, attr_ids=None) -> semantics.Value:
    """Evaluate a term under ``env: dict[Var, Value]``.

    ``api_fn(api, argvalues) -> Value`` interprets API calls; ``attr_ids``
    resolves attribute constants.  Raises KeyError on unbound variables.
    """
    if isinstance(t, Var):
        return env[t]
    if isinstance(t, IntConst):
        return t.value
    if isinstance(t, StrConst):
        return t.value
    if isinstance(t, NullConst):
        return semantics.NULL_VALUE
    if isinstance(t, AttrConst):
        if attr_ids is None or t.name not in attr_ids:
            raise KeyError(f"no id for attribute constant {t.name}")
        return attr_ids[t.name]
    if isinstance(t, ApiCall):
        if api_fn is None:
            raise KeyError(f"no API interpretation for {t.api}")
        vals = tuple(eval_term(a, env, api_fn, attr_ids) for a in t.args)
        return api_fn(t.api, vals)
    if isinstance(t, Unary):
        return semantics.apply_unary(t.op, eval_term(t.operand, env, api_fn, attr_ids))
    if isinstance(t, BinTerm):
        return semantics.apply_binary(
            t.op,
            eval_term(t.lhs, env, api_fn, attr_ids),
            eval_term(t.rhs, env, api_fn, attr_ids),
        )
    if isinstance(t, StrEqTerm):
        return semantics.str_eq_value(
            eval_term(t.operand, env, api_fn, attr_ids), t.literal
        )
    raise TypeError(f"not a term: {t!r}")


def eval_formula(f: Formula, env, api_fn=None, attr_ids=None) -> bool:
    if isinstance(f, TrueAtom):
        return True
    if isinstance(f, FalseAtom):
        return False
    if isinstance(f, TargetAtom):
        return True
    if isinstance(f, IntCmp):
        return bool(
            semantics.apply_binary(
                f.rel,
                eval_term(f.lhs, env, api_fn, attr_ids),
                eval_term(f.rhs, env, api_fn, attr_ids),
            )
        )
    if isinstance(f, StrEq):
        return bool(
            semantics.str_eq_value(eval_term(f.term, env, api_fn, attr_ids), f.literal)
        )
    if isinstance(f, BoolAtom):
        return semantics.truthy(eval_term(f.term, env, api_fn, attr_ids))
    if isinstance(f, Not):
        return not eval_formula(f.child, env, api_fn, attr_ids)
    if isinstance(f, And):
        return all(eval_formula(c, env, api_fn, attr_ids) for c in f.children)
    if isinstance(f, Or):
        return any(eval_formula(c, env, api_fn, attr_ids) for c in f.children)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Canonical prefix dump (stable across runs; used for debug goldens)
# ---------------------------------------------------------------------------


def dump_term(t: Term) -> str:
    if isinstance(t, Var):
        return f"(var {t})"
    if isinstance(t, IntConst):
        return f"(int {t.value})"
    if isinstance(t, StrConst):
        return f'(str "{t.value}")'
    if isinstance(t, AttrConst):
        return f"(attr {t.name})"
    if isinstance(t, NullConst):
        return "(null)"
    if isinstance(t, ApiCall):
        inner = " ".join(dump_term(a) for a in t.args)
        return f"(api {t.api}{' ' + inner if inner else ''})"
    if isinstance(t, Unary):
        return f"({t.op} {dump_term(t.operand)})"
    if isinstance(t, BinTerm):
        return f"({t.op} {dump_term(t.lhs)} {dump_term(t.rhs)})"
    if isinstance(t, StrEqTerm):
        return f'(streq {dump_term(t.operand)} "{t.literal}")'
    raise TypeError(f"not a term: {t!r}")


def dump_formula(f: Formula) -> str:
    if isinstance(f, TrueAtom):
        return "true"
    if isinstance(f, FalseAtom):
        return "false"
    if isinstance(f, IntCmp):
        return f"({f.rel} {dump_term(f.lhs)} {dump_term(f.rhs)})"
    if isinstance(f, StrEq):
        return f'(streq {dump_term(f.term)} "{f.literal}")'
    if isinstance(f, BoolAtom):
        return f"(bool {dump_term(f.term)})"
    if isinstance(f, TargetAtom):
        extras = " ".join(dump_term(a) for a in f.extra_args)
        return (
            f"(target {f.api} {dump_term(f.attr_arg)}"
            f"{' [' + extras + ']' if extras else ''} @{f.site})"
        )
    if isinstance(f, Not):
        return f"(not {dump_formula(f.child)})"
    if isinstance(f, And):
        return f"(and {' '.join(dump_formula(c) for c in f.children)})"
    if isinstance(f, Or):
        return f"(or {' '.join(dump_formula(c) for c in f.children)})"
    raise TypeError(f"not a formula: {f!r}")
