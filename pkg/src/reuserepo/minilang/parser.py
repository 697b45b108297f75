"""Tokenizer, recursive-descent parser and canonical printer.

Grammar::

    program := "fn" "(" params? ")" "->" type "{" expr "}"
    param   := ident ":" type
    type    := "Int" | "Str" | "Bool"
    expr    := "let" ident "=" expr "in" expr
             | "if" expr "then" expr "else" expr
             | or
    or      := and ("or" and)*
    and     := cmp ("and" cmp)*
    cmp     := add (("==" | "!=" | "<" | "<=" | ">" | ">=") add)*
    add     := mul (("+" | "-") mul)*
    mul     := unary (("*" | "/" | "%") unary)*
    unary   := "not" unary | atom
    atom    := int | "-" int | string | "true" | "false" | ident | "?" ident
             | "concat" "(" expr "," expr ")" | "(" expr ")" | let | if

``#`` starts a comment running to end of line. Comments are not part of the
AST; ``comments`` extracts them for text indexing.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..errors import ParseError, SemanticError
from .ast import (
    BASE_TYPES,
    INT_MAX,
    INT_MIN,
    PRECEDENCE,
    BinOp,
    BoolLit,
    Expr,
    Hole,
    If,
    IntLit,
    Let,
    Not,
    Param,
    Program,
    StrLit,
    Var,
    depth,
)

KEYWORDS = frozenset(
    {"fn", "let", "in", "if", "then", "else", "true", "false", "not", "and", "or", "concat"}
    | set(BASE_TYPES)
)
MAX_NESTING = 100
MAX_DEPTH = 200

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<hole>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|==|!=|<=|>=|[-+*/%<>=(){},:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # int, str, hole, ident, kw, op, eof
    text: str
    line: int
    col: int


def _tokenize(source: str, keep_comments: bool = False) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            ch = source[pos]
            if ch == '"':
                raise ParseError("unterminated string literal", line, col)
            raise ParseError(f"unexpected character {ch!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "comment":
            if keep_comments:
                tokens.append(Token("comment", text[1:].strip(), line, col))
        elif kind != "ws":
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def comments(source: str) -> list[str]:
    """Return comment bodies in source order; empty list if the source does not lex."""
    try:
        return [t.text for t in _tokenize(source, keep_comments=True) if t.kind == "comment"]
    except ParseError:
        return []


class _Parser:
    def __init__(self, source: str, params=(), allow_free_vars: bool = False):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.params: dict[str, int] = {}
        self.allow_free_vars = allow_free_vars
        self.nesting = 0
        for i, (name, _) in enumerate(params):
            self.params[name] = i

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, expected, message: str | None = None) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(message or f"unexpected {found}", t.line, t.col, expected)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "op") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error({text})
        t = self.tok
        self.pos += 1
        return t

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            raise self.error({"identifier"})
        self.pos += 1
        return t

    def type_name(self) -> str:
        t = self.tok
        if t.kind == "kw" and t.text in BASE_TYPES:
            self.pos += 1
            return t.text
        raise self.error(set(BASE_TYPES))

    # grammar
    def program(self) -> Program:
        self.expect("fn")
        self.expect("(")
        params: list[tuple[str, str]] = []
        if not self.at(")"):
            while True:
                name_tok = self.ident()
                self.expect(":")
                ty = self.type_name()
                if any(name_tok.text == p for p, _ in params):
                    raise SemanticError(
                        f"duplicate parameter {name_tok.text!r} at {name_tok.line}:{name_tok.col}"
                    )
                params.append((name_tok.text, ty))
                if not self.at(","):
                    break
                self.pos += 1
        self.expect(")")
        self.expect("->")
        returns = self.type_name()
        self.expect("{")
        self.params = {name: i for i, (name, _) in enumerate(params)}
        body = self.expr(())
        self.expect("}")
        if self.tok.kind != "eof":
            raise self.error({"end of input"})
        return Program(tuple(params), returns, body)

    def expr(self, scope: tuple[str, ...]) -> Expr:
        self.nesting += 1
        if self.nesting > MAX_NESTING:
            raise self.error((), "expression nested too deeply")
        try:
            if self.at("let"):
                return self.let(scope)
            if self.at("if"):
                return self.if_(scope)
            return self.binary(scope, 1)
        finally:
            self.nesting -= 1

    def let(self, scope) -> Expr:
        self.expect("let")
        name_tok = self.ident()
        if name_tok.text in self.params:
            raise SemanticError(
                f"let binding {name_tok.text!r} shadows a parameter at {name_tok.line}:{name_tok.col}"
            )
        self.expect("=")
        bound = self.expr(scope)
        self.expect("in")
        body = self.expr(scope + (name_tok.text,))
        return Let(name_tok.text, bound, body)

    def if_(self, scope) -> Expr:
        self.expect("if")
        cond = self.expr(scope)
        self.expect("then")
        then = self.expr(scope)
        self.expect("else")
        return If(cond, then, self.expr(scope))

    def binary(self, scope, min_level: int) -> Expr:
        left = self.unary(scope)
        while True:
            t = self.tok
            level = PRECEDENCE.get(t.text) if t.kind in ("op", "kw") else None
            if level is None or t.text == "concat" or level < min_level:
                return left
            self.pos += 1
            left = BinOp(t.text, left, self.binary(scope, level + 1))

    def unary(self, scope) -> Expr:
        if self.at("not"):
            self.pos += 1
            self.nesting += 1
            if self.nesting > MAX_NESTING:
                raise self.error((), "expression nested too deeply")
            try:
                return Not(self.unary(scope))
            finally:
                self.nesting -= 1
        return self.atom(scope)

    def atom(self, scope) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.pos += 1
            return IntLit(self._int_value(t, int(t.text)))
        if self.at("-") and self.tokens[self.pos + 1].kind == "int":
            self.pos += 1
            digits = self.tok
            self.pos += 1
            return IntLit(self._int_value(t, -int(digits.text)))
        if t.kind == "str":
            self.pos += 1
            try:
                return StrLit(json.loads(t.text, strict=False))
            except ValueError:
                raise ParseError("invalid string escape", t.line, t.col) from None
        if t.kind == "hole":
            self.pos += 1
            return Hole(t.text[1:])
        if t.kind == "ident":
            self.pos += 1
            if t.text in scope:
                return Var(t.text)
            if t.text in self.params:
                return Param(self.params[t.text])
            if self.allow_free_vars:
                return Var(t.text)
            raise SemanticError(f"unbound variable {t.text!r} at {t.line}:{t.col}")
        if t.kind == "kw":
            if t.text in ("true", "false"):
                self.pos += 1
                return BoolLit(t.text == "true")
            if t.text == "concat":
                self.pos += 1
                self.expect("(")
                left = self.expr(scope)
                self.expect(",")
                right = self.expr(scope)
                self.expect(")")
                return BinOp("concat", left, right)
            if t.text in ("let", "if"):
                return self.expr(scope)
        if self.at("("):
            self.pos += 1
            inner = self.expr(scope)
            self.expect(")")
            return inner
        raise self.error(
            {"integer", "string", "identifier", "hole", "true", "false", "concat", "(", "let", "if", "not"}
        )

    @staticmethod
    def _int_value(t: Token, value: int) -> int:
        if not INT_MIN <= value <= INT_MAX:
            raise ParseError("integer literal out of 64-bit range", t.line, t.col)
        return value


def parse(source: str) -> Program:
    """Parse a complete program. Raises ParseError or SemanticError."""
    return _check_depth(_Parser(source).program())


def parse_expr(source: str, params=(), allow_free_vars: bool = False) -> Expr:
    """Parse a bare expression, resolving identifiers against ``params``.

    ``params`` is a sequence of ``(name, type)`` pairs, e.g. ``Program.params``.
    With ``allow_free_vars`` unknown identifiers become ``Var`` nodes; this is
    how hole bindings that refer to an enclosing ``let`` are written.
    """
    p = _Parser(source, params, allow_free_vars)
    e = p.expr(())
    if p.tok.kind != "eof":
        raise p.error({"end of input"})
    return _check_depth(e)


def _check_depth(node):
    if depth(node) > MAX_DEPTH:
        raise ParseError("expression nested too deeply", 1, 1)
    return node


def parse_any(source: str) -> Program | Expr:
    """Parse a program if the source starts with ``fn``, otherwise an expression."""
    if source.lstrip().startswith("fn") and re.match(r"\s*fn\s*\(", source):
        return parse(source)
    return parse_expr(source)


# printing

def _quote(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def _level(e: Expr) -> int:
    if isinstance(e, (Let, If)):
        return 0
    if isinstance(e, BinOp):
        return 7 if e.op == "concat" else PRECEDENCE[e.op]
    return 7


def format_expr(e: Expr, params=()) -> str:
    names = [name for name, _ in params]

    def fmt(node: Expr, min_level: int) -> str:
        text = render(node)
        return f"({text})" if _level(node) < min_level else text

    def render(node: Expr) -> str:
        if isinstance(node, IntLit):
            return str(node.value)
        if isinstance(node, StrLit):
            return _quote(node.value)
        if isinstance(node, BoolLit):
            return "true" if node.value else "false"
        if isinstance(node, Param):
            return names[node.index] if node.index < len(names) else f"_p{node.index}"
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Hole):
            return f"?{node.name}"
        if isinstance(node, Not):
            return f"not {fmt(node.expr, 7)}"
        if isinstance(node, Let):
            return f"let {node.name} = {fmt(node.bound, 0)} in {fmt(node.body, 0)}"
        if isinstance(node, If):
            return f"if {fmt(node.cond, 0)} then {fmt(node.then, 0)} else {fmt(node.else_, 0)}"
        if isinstance(node, BinOp):
            if node.op == "concat":
                return f"concat({fmt(node.left, 0)}, {fmt(node.right, 0)})"
            lvl = PRECEDENCE[node.op]
            return f"{fmt(node.left, lvl)} {node.op} {fmt(node.right, lvl + 1)}"
        raise TypeError(f"not an expression node: {node!r}")

    return fmt(e, 0)


def format_program(p: Program) -> str:
    header = ", ".join(f"{name}: {ty}" for name, ty in p.params)
    return f"fn({header}) -> {p.returns} {{ {format_expr(p.body, p.params)} }}"


def to_source(node: Program | Expr) -> str:
    if isinstance(node, Program):
        return format_program(node)
    return format_expr(node)
