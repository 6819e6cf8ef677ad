"""Parser for the line-oriented snapshot grammar.

::

    snapshot <int>
    class <Ident> {
      const R.attr.<ident> = <int>
      method <ident>(<ident>,*) {
        [<Label>:] <stmt>
      }
    }

``#`` starts a comment; blank lines are ignored; whitespace between tokens
is free-form.  Statement forms are documented on the IR dataclasses.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .ir import (
    ApiAssign,
    ArrayStore,
    AttrRef,
    BINARY_OPS,
    Binary,
    Branch,
    Copy,
    FieldStore,
    FrameworkSnapshot,
    Goto,
    IntLit,
    Invoke,
    IrClass,
    IrMethod,
    LITERAL_MAX,
    LITERAL_MIN,
    NullLit,
    Operand,
    Return,
    StrEqAssign,
    StrLit,
    Target,
    VarRef,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#.*)
  | (?P<string>"[^"\\]*")
  | (?P<attr>R\.attr\.[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|&&|\|\||[-+*/<={}():,.\[\]])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"snapshot", "class", "const", "method", "call", "strEq", "neg",
             "if", "goto", "else", "invoke", "target", "return", "null"}


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def _tokenize_line(text: str, line_no: int) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}", line_no, pos + 1
            )
        if m.lastgroup == "comment":
            break
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), line_no, pos + 1))
        pos = m.end()
    return tokens


class _Cursor:
    """Token cursor over one logical line."""

    def __init__(self, tokens: list[_Token], line_no: int):
        self.tokens = tokens
        self.i = 0
        self.line = line_no

    def peek(self, offset=0) -> _Token | None:
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of line", self.line)
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(
                f"expected {text!r}, found {tok.text!r}", tok.line, tok.col
            )
        return tok

    def expect_kind(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind}, found {tok.text!r}", tok.line, tok.col
            )
        return tok

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def require_end(self) -> None:
        if not self.at_end():
            tok = self.peek()
            raise ParseError(
                f"trailing tokens after statement: {tok.text!r}",
                tok.line,
                tok.col,
            )


def _check_range(value: int, tok: _Token) -> int:
    if not LITERAL_MIN <= value <= LITERAL_MAX:
        raise ParseError(
            f"integer literal out of 32-bit range: {value}", tok.line, tok.col
        )
    return value


def _parse_signed_int(cur: _Cursor) -> int:
    tok = cur.next()
    sign = 1
    if tok.text == "-":
        sign = -1
        tok = cur.next()
    if tok.kind != "int":
        raise ParseError(f"expected integer, found {tok.text!r}", tok.line, tok.col)
    return _check_range(sign * int(tok.text), tok)


def _parse_operand(cur: _Cursor) -> Operand:
    tok = cur.next()
    if tok.text == "-":
        inner = cur.next()
        if inner.kind != "int":
            raise ParseError(
                f"expected integer after '-', found {inner.text!r}",
                inner.line,
                inner.col,
            )
        return IntLit(_check_range(-int(inner.text), inner))
    if tok.kind == "int":
        return IntLit(_check_range(int(tok.text), tok))
    if tok.kind == "string":
        return StrLit(tok.text[1:-1])
    if tok.kind == "attr":
        return AttrRef(tok.text)
    if tok.kind == "ident":
        if tok.text == "null":
            return NullLit()
        if tok.text in _KEYWORDS:
            raise ParseError(
                f"keyword {tok.text!r} cannot be an operand", tok.line, tok.col
            )
        return VarRef(tok.text)
    raise ParseError(f"expected an operand, found {tok.text!r}", tok.line, tok.col)


def _parse_arglist(cur: _Cursor) -> tuple[Operand, ...]:
    cur.expect("(")
    args = []
    if cur.peek() and cur.peek().text == ")":
        cur.next()
        return ()
    while True:
        args.append(_parse_operand(cur))
        tok = cur.next()
        if tok.text == ")":
            return tuple(args)
        if tok.text != ",":
            raise ParseError(
                f"expected ',' or ')', found {tok.text!r}", tok.line, tok.col
            )


def _ident(cur: _Cursor) -> str:
    tok = cur.expect_kind("ident")
    if tok.text in _KEYWORDS:
        raise ParseError(
            f"keyword {tok.text!r} cannot be an identifier", tok.line, tok.col
        )
    return tok.text


def _parse_stmt(cur: _Cursor):
    tok = cur.peek()
    if tok.kind == "ident" and tok.text == "return":
        cur.next()
        cur.require_end()
        return Return()
    if tok.kind == "ident" and tok.text == "goto":
        cur.next()
        stmt = Goto(_ident(cur))
        cur.require_end()
        return stmt
    if tok.kind == "ident" and tok.text == "if":
        cur.next()
        cond = _ident(cur)
        cur.expect("goto")
        then_label = _ident(cur)
        cur.expect("else")
        cur.expect("goto")
        else_label = _ident(cur)
        cur.require_end()
        return Branch(cond, then_label, else_label)
    if tok.kind == "ident" and tok.text == "invoke":
        cur.next()
        method = _ident(cur)
        stmt = Invoke(method, _parse_arglist(cur))
        cur.require_end()
        return stmt
    if tok.kind == "ident" and tok.text == "target":
        cur.next()
        dst = _ident(cur)
        cur.expect("=")
        api = _ident(cur)
        args = _parse_arglist(cur)
        if not args:
            raise ParseError(
                "a target call needs at least the attribute argument",
                tok.line,
                tok.col,
            )
        cur.require_end()
        return Target(dst, api, args)

    # assignment forms: x = ..., o.f = ..., a[i] = ...
    name = _ident(cur)
    nxt = cur.next()
    if nxt.text == ".":
        fieldname = _ident(cur)
        cur.expect("=")
        stmt = FieldStore(name, fieldname, _parse_operand(cur))
        cur.require_end()
        return stmt
    if nxt.text == "[":
        index = _parse_operand(cur)
        cur.expect("]")
        cur.expect("=")
        stmt = ArrayStore(name, index, _parse_operand(cur))
        cur.require_end()
        return stmt
    if nxt.text != "=":
        raise ParseError(f"expected '=', found {nxt.text!r}", nxt.line, nxt.col)

    head = cur.peek()
    if head is None:
        raise ParseError("missing right-hand side", cur.line)
    if head.kind == "ident" and head.text == "call":
        cur.next()
        api = _ident(cur)
        stmt = ApiAssign(name, api, _parse_arglist(cur))
        cur.require_end()
        return stmt
    if head.kind == "ident" and head.text == "strEq":
        cur.next()
        src = _ident(cur)
        lit = cur.expect_kind("string")
        cur.require_end()
        return StrEqAssign(name, VarRef(src), lit.text[1:-1])
    if head.kind == "ident" and head.text == "neg":
        cur.next()
        stmt = Copy(name, _parse_operand(cur), "neg")
        cur.require_end()
        return stmt

    lhs = _parse_operand(cur)
    if cur.at_end():
        return Copy(name, lhs)
    op_tok = cur.next()
    if op_tok.text not in BINARY_OPS:
        raise ParseError(
            f"unknown operator {op_tok.text!r}", op_tok.line, op_tok.col
        )
    rhs = _parse_operand(cur)
    cur.require_end()
    return Binary(name, lhs, op_tok.text, rhs)


def parse_snapshot(text: str) -> FrameworkSnapshot:
    """Parse snapshot source text into a validated ``FrameworkSnapshot``."""
    lines = [
        (_tokenize_line(raw, i + 1), i + 1)
        for i, raw in enumerate(text.splitlines())
    ]
    lines = [(toks, ln) for toks, ln in lines if toks]
    if not lines:
        raise ParseError("empty snapshot source")

    api_level = None
    classes: list[IrClass] = []
    attr_consts: dict[str, int] = {}

    it = iter(lines)

    def next_cursor():
        try:
            toks, ln = next(it)
        except StopIteration:
            return None
        return _Cursor(toks, ln)

    cur = next_cursor()
    if cur is None or cur.peek().text != "snapshot":
        raise ParseError("snapshot files must start with 'snapshot <level>'", 1)
    cur.expect("snapshot")
    api_level = _parse_signed_int(cur)
    cur.require_end()

    cur = next_cursor()
    while cur is not None:
        tok = cur.peek()
        if tok.text != "class":
            raise ParseError(
                f"expected 'class', found {tok.text!r}", tok.line, tok.col
            )
        cur.expect("class")
        cls_name = _ident(cur)
        cur.expect("{")
        cur.require_end()

        methods: list[IrMethod] = []
        while True:
            cur = next_cursor()
            if cur is None:
                raise ParseError("unterminated class body (missing '}')")
            tok = cur.peek()
            if tok.text == "}":
                cur.next()
                cur.require_end()
                break
            if tok.text == "const":
                cur.expect("const")
                attr = cur.expect_kind("attr")
                cur.expect("=")
                value = _parse_signed_int(cur)
                cur.require_end()
                if attr.text in attr_consts and attr_consts[attr.text] != value:
                    raise ParseError(
                        f"attribute {attr.text} re-declared with a different id",
                        attr.line,
                        attr.col,
                    )
                if value in {
                    v for k, v in attr_consts.items() if k != attr.text
                }:
                    raise ParseError(
                        f"attribute id {value} already in use", attr.line, attr.col
                    )
                attr_consts[attr.text] = value
                continue
            if tok.text == "method":
                methods.append(_parse_method(cur, next_cursor))
                continue
            raise ParseError(
                f"expected 'const', 'method' or '}}', found {tok.text!r}",
                tok.line,
                tok.col,
            )
        classes.append(IrClass(cls_name, tuple(methods)))
        cur = next_cursor()

    snap = FrameworkSnapshot(api_level, tuple(classes), attr_consts)
    snap.validate()
    return snap


def _parse_method(cur: _Cursor, next_cursor) -> IrMethod:
    cur.expect("method")
    name = _ident(cur)
    cur.expect("(")
    params: list[str] = []
    tok = cur.next()
    if tok.text != ")":
        while True:
            if tok.kind != "ident" or tok.text in _KEYWORDS:
                raise ParseError(
                    f"expected parameter name, found {tok.text!r}",
                    tok.line,
                    tok.col,
                )
            if tok.text in params:
                raise ParseError(
                    f"duplicate parameter {tok.text}", tok.line, tok.col
                )
            params.append(tok.text)
            tok = cur.next()
            if tok.text == ")":
                break
            if tok.text != ",":
                raise ParseError(
                    f"expected ',' or ')', found {tok.text!r}", tok.line, tok.col
                )
            tok = cur.next()
    cur.expect("{")
    cur.require_end()

    body: list = []
    labels: dict[str, int] = {}
    while True:
        cur = next_cursor()
        if cur is None:
            raise ParseError(f"unterminated method {name} (missing '}}')")
        tok = cur.peek()
        if tok.text == "}":
            cur.next()
            cur.require_end()
            break
        # optional label prefix
        if (
            tok.kind == "ident"
            and tok.text not in _KEYWORDS
            and cur.peek(1) is not None
            and cur.peek(1).text == ":"
        ):
            if tok.text in labels:
                raise ParseError(
                    f"duplicate label {tok.text}", tok.line, tok.col
                )
            labels[tok.text] = len(body)
            cur.next()
            cur.next()
        body.append(_parse_stmt(cur))

    method = IrMethod(name, tuple(params), tuple(body), labels)
    method.validate()
    return method
