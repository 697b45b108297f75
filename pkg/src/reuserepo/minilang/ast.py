"""AST node types for the sandbox expression language.

Nodes are frozen dataclasses, so structural equality and hashing come for
free. A ``Program`` is a typed function header plus a single body expression.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterator, Union

BASE_TYPES = ("Int", "Str", "Bool")

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

# Binary operators grouped by precedence level, loosest first.
PRECEDENCE = {
    "or": 1,
    "and": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5, "%": 5,
    "concat": 6,
}
BINARY_OPS = frozenset(PRECEDENCE)


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Param:
    index: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Let:
    name: str
    bound: "Expr"
    body: "Expr"


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    else_: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class Not:
    expr: "Expr"


@dataclass(frozen=True)
class Hole:
    name: str


Expr = Union[IntLit, StrLit, BoolLit, Param, Var, Let, If, BinOp, Not, Hole]
EXPR_TYPES = (IntLit, StrLit, BoolLit, Param, Var, Let, If, BinOp, Not, Hole)


@dataclass(frozen=True)
class Program:
    params: tuple[tuple[str, str], ...]
    returns: str
    body: Expr

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def param_types(self) -> tuple[str, ...]:
        return tuple(t for _, t in self.params)


def children(node: Expr) -> tuple[Expr, ...]:
    if isinstance(node, Let):
        return (node.bound, node.body)
    if isinstance(node, If):
        return (node.cond, node.then, node.else_)
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, Not):
        return (node.expr,)
    return ()


def walk(node: Expr | Program) -> Iterator[Expr]:
    """Pre-order traversal; iterative so deep trees don't hit the recursion limit."""
    stack = [node.body if isinstance(node, Program) else node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


def node_count(node: Expr | Program) -> int:
    return sum(1 for _ in walk(node))


def holes(node: Expr | Program) -> set[str]:
    return {n.name for n in walk(node) if isinstance(n, Hole)}


def has_holes(node: Expr | Program) -> bool:
    return any(isinstance(n, Hole) for n in walk(node))


def depth(node: Expr | Program) -> int:
    root = node.body if isinstance(node, Program) else node
    best = 0
    stack = [(root, 1)]
    while stack:
        n, d = stack.pop()
        best = max(best, d)
        stack.extend((c, d + 1) for c in children(n))
    return best


def rebuild(node: Expr, new_children: tuple[Expr, ...]) -> Expr:
    """Copy ``node`` with its sub-expressions replaced, in ``children`` order."""
    if isinstance(node, Let):
        return Let(node.name, *new_children)
    if isinstance(node, If):
        return If(*new_children)
    if isinstance(node, BinOp):
        return BinOp(node.op, *new_children)
    if isinstance(node, Not):
        return Not(*new_children)
    return node


def scalar_fields(node: Expr) -> tuple:
    return tuple(
        getattr(node, f.name)
        for f in fields(node)
        if not isinstance(getattr(node, f.name), EXPR_TYPES)
    )
