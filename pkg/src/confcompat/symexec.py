"""Backward symbolic execution over the trimmed ICFG.

Starting from each configuration-API call site, worklist propagation walks
the graph edges in reverse, rewriting the accumulated formula through the
per-statement transformer ``trans``.  Whenever a chain arrives at a method
entry, its formula is disjoined into that entry's path constraint.

Loops terminate because any one backward chain may visit a node at most
twice — enough to traverse each back edge at least once — and a global
expansion budget bounds pathological blowup.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import formula as F
from .errors import ContractViolation, EngineBudgetError
from .icfg import BRANCH_FALSE, BRANCH_TRUE, TrimmedIcfg
from .ir import (
    ApiAssign,
    ArrayStore,
    AttrRef,
    Binary,
    Branch,
    Copy,
    FieldStore,
    Goto,
    IntLit,
    Invoke,
    IrStmt,
    NullLit,
    Operand,
    Return,
    Site,
    StrEqAssign,
    StrLit,
    Target,
    VarRef,
)

DEFAULT_EXPANSION_BUDGET = 50_000


@dataclass(frozen=True)
class PathConstraint:
    """π for one (target, entry) pair: a disjunction over backward chains."""

    formula: F.Formula
    target: Site
    entry: Site
    class_name: str


def operand_term(op: Operand, scope: str) -> F.Term:
    match op:
        case VarRef(name):
            return F.Var(name, scope)
        case IntLit(v):
            return F.IntConst(v)
        case StrLit(s):
            return F.StrConst(s)
        case AttrRef(name):
            return F.AttrConst(name)
        case NullLit():
            return F.NULL
    raise TypeError(f"not an operand: {op!r}")


def target_atom(stmt: Target, site: Site) -> F.TargetAtom:
    scope = f"{site.cls}.{site.method}"
    return F.TargetAtom(
        stmt.api,
        operand_term(stmt.attr_arg, scope),
        tuple(operand_term(a, scope) for a in stmt.extra_args),
        site,
    )


def trans(stmt: IrStmt, phi: F.Formula, scope: str, branch: str | None = None):
    """Symbolic state transformer: postcondition in, precondition out.

    ``scope`` qualifies the statement's method; ``branch`` selects the edge
    for Branch statements ('true' adds the condition, 'false' its negation).
    Goto/Invoke/Return are identity; a Target crossed mid-chain acts as the
    API assignment it is.
    """
    match stmt:
        case Copy(dst, src, None):
            return F.subst(phi, F.Var(dst, scope), operand_term(src, scope))
        case Copy(dst, src, op):
            return F.subst(
                phi, F.Var(dst, scope), F.Unary(op, operand_term(src, scope))
            )
        case Binary(dst, lhs, op, rhs):
            return F.subst(
                phi,
                F.Var(dst, scope),
                F.BinTerm(operand_term(lhs, scope), op, operand_term(rhs, scope)),
            )
        case ApiAssign(dst, api, args):
            return F.subst(
                phi,
                F.Var(dst, scope),
                F.ApiCall(api, tuple(operand_term(a, scope) for a in args)),
            )
        case Target(dst, api, args):
            return F.subst(
                phi,
                F.Var(dst, scope),
                F.ApiCall(api, tuple(operand_term(a, scope) for a in args)),
            )
        case StrEqAssign(dst, src, literal):
            return F.subst(
                phi,
                F.Var(dst, scope),
                F.StrEqTerm(operand_term(src, scope), literal),
            )
        case FieldStore() | ArrayStore():
            # heap cells are never read back in this IR, so φ[z/x.y] and
            # φ[x/arr[i]] find nothing to replace
            return phi
        case Branch(cond, _, _):
            if branch not in ("true", "false"):
                raise ContractViolation(
                    "a Branch transformer needs the traversed edge"
                )
            atom = F.atom_bool(F.Var(cond, scope))
            if branch == "false":
                atom = F.make_not(atom)
            return F.make_and([phi, atom])
        case Goto() | Invoke() | Return():
            return phi
    raise TypeError(f"not a statement: {stmt!r}")


def extract_path_constraints(
    g: TrimmedIcfg,
    target: Site,
    max_expansions: int = DEFAULT_EXPANSION_BUDGET,
) -> list[PathConstraint]:
    """Backward worklist propagation from one target statement.

    Returns one PathConstraint per entry point reached, each the disjunction
    of every surviving backward chain's formula at that entry.  Raises
    EngineBudgetError when the expansion budget runs out, in which case the
    target must be skipped and recorded by the caller.
    """
    stmt = g.stmt_at(target)
    if not isinstance(stmt, Target):
        raise ContractViolation(f"{target} is not a Target statement")

    entry_set = set(g.entry_points)
    seed = target_atom(stmt, target)

    # chains: (node, phi, occurrence counts along this chain)
    worklist: list[tuple[Site, F.Formula, dict[Site, int]]] = [
        (target, seed, {target: 1})
    ]
    pi_at: dict[Site, list[F.Formula]] = {}

    def arrive(node: Site, phi: F.Formula) -> None:
        bucket = pi_at.setdefault(node, [])
        if phi not in bucket:
            bucket.append(phi)

    if target in entry_set:
        arrive(target, seed)

    expansions = 0
    while worklist:
        node, phi_post, counts = worklist.pop()
        expansions += 1
        if expansions > max_expansions:
            raise EngineBudgetError(
                f"target {target}: expansion budget of {max_expansions} exceeded"
            )
        for pred, kind in g.preds[node]:
            if counts.get(pred, 0) >= 2:
                continue
            branch = None
            if kind == BRANCH_TRUE:
                branch = "true"
            elif kind == BRANCH_FALSE:
                branch = "false"
            scope = f"{pred.cls}.{pred.method}"
            phi_pre = trans(g.stmt_at(pred), phi_post, scope, branch)
            if isinstance(phi_pre, F.FalseAtom):
                continue
            if pred in entry_set:
                arrive(pred, phi_pre)
            new_counts = dict(counts)
            new_counts[pred] = new_counts.get(pred, 0) + 1
            worklist.append((pred, phi_pre, new_counts))

    out = []
    for entry in g.entry_points:
        if entry in pi_at:
            out.append(
                PathConstraint(
                    formula=F.make_or(pi_at[entry]),
                    target=target,
                    entry=entry,
                    class_name=g.class_name,
                )
            )
    return out
