"""Non-linear pattern matching against holes, and pattern instantiation."""

from __future__ import annotations

from typing import Mapping

from ..errors import IncompleteBindings, InvalidArgument, SemanticError
from .ast import (
    Expr,
    Hole,
    Let,
    Param,
    Program,
    Var,
    children,
    has_holes,
    holes,
    rebuild,
    scalar_fields,
    walk,
)

Bindings = dict[str, Expr]


def _match(pattern: Expr, candidate: Expr, bindings: Bindings) -> bool:
    if isinstance(pattern, Hole):
        if has_holes(candidate):
            return False
        bound = bindings.get(pattern.name)
        if bound is None:
            bindings[pattern.name] = candidate
            return True
        return bound == candidate
    if type(pattern) is not type(candidate):
        return False
    if scalar_fields(pattern) != scalar_fields(candidate):
        return False
    return all(_match(p, c, bindings) for p, c in zip(children(pattern), children(candidate)))


def match_ast(pattern: Program | Expr, candidate: Program | Expr) -> Bindings | None:
    """Match ``pattern`` at the root of ``candidate``.

    Returns hole bindings, or None on no-match. A hole that occurs several
    times must bind structurally equal fragments. When both sides are
    programs their headers must agree on parameter and return types
    (parameter names are irrelevant); an expression pattern is matched
    against a program's body.
    """
    if isinstance(pattern, Program) and isinstance(candidate, Program):
        if pattern.param_types != candidate.param_types or pattern.returns != candidate.returns:
            return None
    p = pattern.body if isinstance(pattern, Program) else pattern
    c = candidate.body if isinstance(candidate, Program) else candidate
    bindings: Bindings = {}
    return bindings if _match(p, c, bindings) else None


def substitute(expr: Expr, bindings: Mapping[str, Expr]) -> Expr:
    if isinstance(expr, Hole):
        return bindings[expr.name]
    kids = children(expr)
    if not kids:
        return expr
    return rebuild(expr, tuple(substitute(k, bindings) for k in kids))


def check_well_formed(node: Program | Expr, arity: int | None = None) -> None:
    """Raise SemanticError if a Var is unbound or a Param index is out of range."""
    if isinstance(node, Program):
        arity = node.arity
        names = {n for n, _ in node.params}
        for n in walk(node):
            if isinstance(n, Let) and n.name in names:
                raise SemanticError(f"let binding {n.name!r} shadows a parameter")
        node = node.body

    def visit(e: Expr, scope: frozenset):
        if isinstance(e, Var) and e.name not in scope:
            raise SemanticError(f"unbound variable {e.name!r}")
        if isinstance(e, Param) and arity is not None and e.index >= arity:
            raise SemanticError(f"parameter index {e.index} out of range for arity {arity}")
        if isinstance(e, Let):
            visit(e.bound, scope)
            visit(e.body, scope | {e.name})
            return
        for k in children(e):
            visit(k, scope)

    visit(node, frozenset())


def instantiate(pattern: Program | Expr, bindings: Mapping[str, Expr]) -> Program | Expr:
    """Replace every hole in ``pattern`` by its binding.

    Raises IncompleteBindings naming any unbound holes. The result is checked
    for well-formedness, since a binding may mention let-bound variables.
    """
    missing = holes(pattern) - set(bindings)
    if missing:
        raise IncompleteBindings(missing)
    for name, frag in bindings.items():
        if has_holes(frag):
            raise InvalidArgument(f"binding for ?{name} contains holes")
    if isinstance(pattern, Program):
        result = Program(pattern.params, pattern.returns, substitute(pattern.body, bindings))
    else:
        result = substitute(pattern, bindings)
    check_well_formed(result)
    return result
