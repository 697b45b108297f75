"""Sandbox expression language: the payload format for executable and pattern assets."""

from .ast import (
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
    has_holes,
    holes,
    node_count,
)
from .evaluator import DEFAULT_BUDGET, Value, evaluate, type_of
from .parser import comments, format_expr, parse, parse_any, parse_expr, to_source
from .patterns import Bindings, check_well_formed, instantiate, match_ast

__all__ = [
    "BinOp", "Bindings", "BoolLit", "DEFAULT_BUDGET", "Expr", "Hole", "If", "IntLit", "Let",
    "Not", "Param", "Program", "StrLit", "Value", "Var", "check_well_formed", "comments",
    "evaluate", "format_expr", "has_holes", "holes", "instantiate", "match_ast", "node_count",
    "parse", "parse_any", "parse_expr", "to_source", "type_of",
]
