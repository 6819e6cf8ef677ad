"""Three-address mini-IR for framework snapshots.

A snapshot is one version of the analyzed framework: an API level, a set of
classes, and the integer ids behind ``R.attr.*`` attribute constants.
Statement kinds mirror the symbolic transformer table one-to-one, plus the
control-flow plumbing (branch/goto/invoke/return) needed to build graphs.

Everything here is immutable after construction; parsed snapshots can be
shared freely across concurrent analyses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import ParseError

# Literals are confined to the signed 32-bit range so that reserved values
# (the null encoding, solver witnesses) can never collide with program text.
LITERAL_MIN = -(2**31)
LITERAL_MAX = 2**31 - 1

BINARY_OPS = ("+", "-", "*", "/", "==", "!=", "<", "<=", "&&", "||")
UNARY_OPS = ("neg",)


class Site(NamedTuple):
    """A statement reference: (class, method, index into the method body)."""

    cls: str
    method: str
    index: int

    def __str__(self):
        return f"{self.cls}.{self.method}:{self.index}"


# ---------------------------------------------------------------------------
# Operands
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class AttrRef:
    """Reference to an attribute constant, e.g. ``R.attr.color``."""

    name: str


@dataclass(frozen=True)
class NullLit:
    pass


Operand = VarRef | IntLit | StrLit | AttrRef | NullLit


def render_operand(op: Operand) -> str:
    match op:
        case VarRef(name):
            return name
        case IntLit(v):
            return str(v)
        case StrLit(s):
            return f'"{s}"'
        case AttrRef(name):
            return name
        case NullLit():
            return "null"
    raise TypeError(f"not an operand: {op!r}")


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Copy:
    """``x = y`` or ``x = neg y``."""

    dst: str
    src: Operand
    op: str | None = None


@dataclass(frozen=True)
class Binary:
    """``x = y <op> z``."""

    dst: str
    lhs: Operand
    op: str
    rhs: Operand


@dataclass(frozen=True)
class ApiAssign:
    """``x = call api(args)`` — an opaque framework API call."""

    dst: str
    api: str
    args: tuple[Operand, ...]


@dataclass(frozen=True)
class StrEqAssign:
    """``x = strEq y "lit"``.

    String-equality APIs are modelled as an operator rather than an opaque
    call, so the comparison survives into path constraints.
    """

    dst: str
    src: VarRef
    literal: str


@dataclass(frozen=True)
class FieldStore:
    """``o.f = z``."""

    obj: str
    fieldname: str
    src: Operand


@dataclass(frozen=True)
class ArrayStore:
    """``a[i] = x``."""

    arr: str
    index: Operand
    src: Operand


@dataclass(frozen=True)
class Branch:
    """``if c goto L1 else goto L2`` — c is a variable."""

    cond: str
    then_label: str
    else_label: str


@dataclass(frozen=True)
class Goto:
    label: str


@dataclass(frozen=True)
class Invoke:
    """``invoke m(args)`` — intra-class call when m is a method of the
    enclosing class, otherwise an opaque external call."""

    method: str
    args: tuple[Operand, ...]


@dataclass(frozen=True)
class Target:
    """``target x = confapi(args)`` — a configuration-API call site.

    The first argument identifies the attribute being loaded; the data
    formats come from the configuration-API table at refinement time.
    """

    dst: str
    api: str
    args: tuple[Operand, ...]

    @property
    def attr_arg(self) -> Operand:
        return self.args[0]

    @property
    def extra_args(self) -> tuple[Operand, ...]:
        return self.args[1:]


@dataclass(frozen=True)
class Return:
    pass


IrStmt = (
    Copy
    | Binary
    | ApiAssign
    | StrEqAssign
    | FieldStore
    | ArrayStore
    | Branch
    | Goto
    | Invoke
    | Target
    | Return
)


def stmt_operands(stmt: IrStmt) -> tuple[Operand, ...]:
    """All operand positions read by a statement (not assignment targets)."""
    match stmt:
        case Copy(_, src, _):
            return (src,)
        case Binary(_, lhs, _, rhs):
            return (lhs, rhs)
        case ApiAssign(_, _, args):
            return args
        case StrEqAssign(_, src, _):
            return (src,)
        case FieldStore(_, _, src):
            return (src,)
        case ArrayStore(_, index, src):
            return (index, src)
        case Branch(cond, _, _):
            return (VarRef(cond),)
        case Invoke(_, args):
            return args
        case Target(_, _, args):
            return args
        case _:
            return ()


def render_stmt(stmt: IrStmt) -> str:
    match stmt:
        case Copy(dst, src, None):
            return f"{dst} = {render_operand(src)}"
        case Copy(dst, src, op):
            return f"{dst} = {op} {render_operand(src)}"
        case Binary(dst, lhs, op, rhs):
            return f"{dst} = {render_operand(lhs)} {op} {render_operand(rhs)}"
        case ApiAssign(dst, api, args):
            return f"{dst} = call {api}({', '.join(map(render_operand, args))})"
        case StrEqAssign(dst, src, lit):
            return f'{dst} = strEq {src.name} "{lit}"'
        case FieldStore(obj, fieldname, src):
            return f"{obj}.{fieldname} = {render_operand(src)}"
        case ArrayStore(arr, index, src):
            return f"{arr}[{render_operand(index)}] = {render_operand(src)}"
        case Branch(cond, then_label, else_label):
            return f"if {cond} goto {then_label} else goto {else_label}"
        case Goto(label):
            return f"goto {label}"
        case Invoke(method, args):
            return f"invoke {method}({', '.join(map(render_operand, args))})"
        case Target(dst, api, args):
            return f"target {dst} = {api}({', '.join(map(render_operand, args))})"
        case Return():
            return "return"
    raise TypeError(f"not a statement: {stmt!r}")


# ---------------------------------------------------------------------------
# Methods, classes, snapshots
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IrMethod:
    name: str
    params: tuple[str, ...]
    body: tuple[IrStmt, ...]
    labels: dict[str, int] = field(default_factory=dict)

    def label_of(self, index: int) -> str | None:
        for lbl, i in self.labels.items():
            if i == index:
                return lbl
        return None

    def validate(self) -> None:
        if not self.body:
            raise ParseError(f"method {self.name} has an empty body")
        for lbl, idx in self.labels.items():
            if not 0 <= idx < len(self.body):
                raise ParseError(f"label {lbl} out of range in method {self.name}")
        for stmt in self.body:
            targets = ()
            if isinstance(stmt, Branch):
                targets = (stmt.then_label, stmt.else_label)
            elif isinstance(stmt, Goto):
                targets = (stmt.label,)
            for lbl in targets:
                if lbl not in self.labels:
                    raise ParseError(
                        f"undefined label {lbl} in method {self.name}"
                    )


@dataclass(frozen=True)
class IrClass:
    name: str
    methods: tuple[IrMethod, ...]

    @property
    def method_map(self) -> dict[str, IrMethod]:
        return {m.name: m for m in self.methods}

    def validate(self) -> None:
        seen = set()
        for m in self.methods:
            if m.name in seen:
                raise ParseError(
                    f"duplicate method {m.name} in class {self.name}"
                )
            seen.add(m.name)
            m.validate()


@dataclass(frozen=True)
class FrameworkSnapshot:
    """One parsed framework version: the unit of analysis."""

    api_level: int
    classes: tuple[IrClass, ...]
    attr_consts: dict[str, int]

    @property
    def class_map(self) -> dict[str, IrClass]:
        return {c.name: c for c in self.classes}

    @property
    def attr_names_by_id(self) -> dict[int, str]:
        return {v: k for k, v in self.attr_consts.items()}

    def validate(self) -> None:
        if self.api_level < 1:
            raise ParseError(f"api level must be >= 1, got {self.api_level}")
        seen = set()
        for cls in self.classes:
            if cls.name in seen:
                raise ParseError(f"duplicate class {cls.name}")
            seen.add(cls.name)
            cls.validate()
        ids = list(self.attr_consts.values())
        if len(ids) != len(set(ids)):
            raise ParseError("attribute constant ids must be unique")
        for name, value in self.attr_consts.items():
            if not LITERAL_MIN <= value <= LITERAL_MAX:
                raise ParseError(f"attribute id out of range: {name} = {value}")
        # every referenced attribute constant must be declared
        for cls in self.classes:
            for m in cls.methods:
                for stmt in m.body:
                    for op in stmt_operands(stmt):
                        if isinstance(op, AttrRef) and op.name not in self.attr_consts:
                            raise ParseError(
                                f"unknown attribute constant {op.name} "
                                f"in {cls.name}.{m.name}"
                            )


def list_target_statements(snap: FrameworkSnapshot) -> list[Site]:
    """Every Target statement, ordered by (class, method, index)."""
    out = []
    for cls in snap.classes:
        for m in cls.methods:
            for i, stmt in enumerate(m.body):
                if isinstance(stmt, Target):
                    out.append(Site(cls.name, m.name, i))
    out.sort()
    return out


def pretty_snapshot(snap: FrameworkSnapshot) -> str:
    """Render a snapshot back to its textual form (parse round-trips)."""
    lines = [f"snapshot {snap.api_level}"]
    declared: set[str] = set()
    for cls in snap.classes:
        lines.append(f"class {cls.name} {{")
        if not declared:
            for name in sorted(snap.attr_consts):
                lines.append(f"  const {name} = {snap.attr_consts[name]}")
            declared.add("*")
        for m in cls.methods:
            lines.append(f"  method {m.name}({', '.join(m.params)}) {{")
            for i, stmt in enumerate(m.body):
                lbl = m.label_of(i)
                prefix = f"{lbl}: " if lbl else ""
                lines.append(f"    {prefix}{render_stmt(stmt)}")
            lines.append("  }")
        lines.append("}")
    return "\n".join(lines) + "\n"
