"""Trimmed inter-procedural control-flow graph, one per class.

Per-method control flow plus the intra-class call graph: an invoke of a
method defined in the same class is wired through call-entry/call-return
edges, while calls that leave the class stay opaque pass-through nodes.
Call and return edges are not matched against each other; the backward
engine's per-chain occurrence cap keeps traversal finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ContractViolation
from .ir import Branch, Goto, Invoke, IrClass, IrStmt, Return, Site

FALLTHROUGH = "fallthrough"
BRANCH_TRUE = "branch-true"
BRANCH_FALSE = "branch-false"
CALL_ENTRY = "call-entry"
CALL_RETURN = "call-return"


@dataclass(frozen=True)
class TrimmedIcfg:
    class_name: str
    nodes: tuple[Site, ...]
    succs: dict[Site, tuple[tuple[Site, str], ...]]
    preds: dict[Site, tuple[tuple[Site, str], ...]]
    entry_points: tuple[Site, ...]
    stmts: dict[Site, IrStmt]
    diagnostics: tuple[str, ...] = field(default_factory=tuple)

    @property
    def edges(self) -> list[tuple[Site, Site, str]]:
        return [
            (src, dst, kind)
            for src in self.nodes
            for dst, kind in self.succs[src]
        ]

    def stmt_at(self, node: Site) -> IrStmt:
        try:
            return self.stmts[node]
        except KeyError:
            raise ContractViolation(f"unknown node {node}") from None


def build_trimmed_icfg(cls: IrClass) -> TrimmedIcfg:
    cls.validate()
    methods = sorted(cls.methods, key=lambda m: m.name)
    member_names = {m.name for m in cls.methods}

    nodes: list[Site] = []
    stmts: dict[Site, IrStmt] = {}
    for m in methods:
        for i, stmt in enumerate(m.body):
            site = Site(cls.name, m.name, i)
            nodes.append(site)
            stmts[site] = stmt

    # invoke sites per callee, for call-return edges
    internal_invokes: dict[str, list[Site]] = {name: [] for name in member_names}
    diagnostics: list[str] = []
    for site in nodes:
        stmt = stmts[site]
        if isinstance(stmt, Invoke):
            if stmt.method in member_names:
                internal_invokes[stmt.method].append(site)
            else:
                diagnostics.append(
                    f"{site}: invoke of {stmt.method} leaves the class; "
                    "treated as opaque"
                )

    succs: dict[Site, list[tuple[Site, str]]] = {site: [] for site in nodes}
    method_map = {m.name: m for m in methods}

    for m in methods:
        size = len(m.body)
        for i, stmt in enumerate(m.body):
            site = Site(cls.name, m.name, i)
            nxt = Site(cls.name, m.name, i + 1) if i + 1 < size else None
            if isinstance(stmt, Branch):
                succs[site].append(
                    (Site(cls.name, m.name, m.labels[stmt.then_label]), BRANCH_TRUE)
                )
                succs[site].append(
                    (Site(cls.name, m.name, m.labels[stmt.else_label]), BRANCH_FALSE)
                )
            elif isinstance(stmt, Goto):
                succs[site].append(
                    (Site(cls.name, m.name, m.labels[stmt.label]), FALLTHROUGH)
                )
            elif isinstance(stmt, Return):
                # call-return edges to every internal caller's continuation
                for inv in internal_invokes.get(m.name, ()):
                    caller = method_map[inv.method]
                    if inv.index + 1 < len(caller.body):
                        succs[site].append(
                            (Site(cls.name, inv.method, inv.index + 1), CALL_RETURN)
                        )
            elif isinstance(stmt, Invoke) and stmt.method in member_names:
                succs[site].append(
                    (Site(cls.name, stmt.method, 0), CALL_ENTRY)
                )
            else:
                if nxt is not None:
                    succs[site].append((nxt, FALLTHROUGH))

    for site in nodes:
        succs[site].sort()

    preds: dict[Site, list[tuple[Site, str]]] = {site: [] for site in nodes}
    for src in nodes:
        for dst, kind in succs[src]:
            preds[dst].append((src, kind))
    for site in nodes:
        preds[site].sort()

    entry_points = tuple(Site(cls.name, m.name, 0) for m in methods)

    return TrimmedIcfg(
        class_name=cls.name,
        nodes=tuple(nodes),
        succs={k: tuple(v) for k, v in succs.items()},
        preds={k: tuple(v) for k, v in preds.items()},
        entry_points=entry_points,
        stmts=stmts,
        diagnostics=tuple(diagnostics),
    )


def predecessors(g: TrimmedIcfg, node: Site) -> list[tuple[Site, str]]:
    """Predecessors with edge kinds, in deterministic (class, method, index)
    order; includes call-return predecessors."""
    if node not in g.preds:
        raise ContractViolation(f"unknown node {node}")
    return list(g.preds[node])


def dump_icfg(g: TrimmedIcfg) -> str:
    """One edge per line: ``src -> dst [kind]``; stable across runs."""
    lines = [f"{src} -> {dst} [{kind}]" for src, dst, kind in g.edges]
    return "\n".join(lines) + ("\n" if lines else "")
