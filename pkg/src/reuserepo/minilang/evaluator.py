"""Strict, budgeted tree-walking evaluator.

Every visited node costs one step. The language has no loops or recursion,
so a program never needs more steps than it has nodes.
"""

from __future__ import annotations

from typing import Sequence, Union

from ..errors import BudgetExceeded, EvalArithmeticError, EvalError, EvalTypeError
from .ast import (
    INT_MAX,
    INT_MIN,
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
)

Value = Union[int, str, bool]

DEFAULT_BUDGET = 10_000


def type_of(value: Value) -> str:
    # bool first: bool is a subclass of int
    if isinstance(value, bool):
        return "Bool"
    if isinstance(value, int):
        return "Int"
    if isinstance(value, str):
        return "Str"
    raise EvalTypeError(f"not a mini-language value: {value!r}")


def _checked(n: int) -> int:
    if not INT_MIN <= n <= INT_MAX:
        raise EvalArithmeticError("integer overflow")
    return n


def _int_div(a: int, b: int) -> tuple[int, int]:
    """Division truncating toward zero, remainder takes the dividend's sign."""
    if b == 0:
        raise EvalArithmeticError("division by zero")
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return q, a - b * q


class _Machine:
    __slots__ = ("args", "budget", "steps")

    def __init__(self, args, budget: int):
        self.args = args
        self.budget = budget
        self.steps = 0

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded(f"step budget of {self.budget} exhausted")

    def expect(self, value, ty: str, what: str):
        if type_of(value) != ty:
            raise EvalTypeError(f"{what} expects {ty}, got {type_of(value)}")
        return value

    def run(self, node: Expr, env: dict):
        self.tick()
        if isinstance(node, (IntLit, StrLit, BoolLit)):
            return node.value
        if isinstance(node, Param):
            return self.args[node.index]
        if isinstance(node, Var):
            try:
                return env[node.name]
            except KeyError:
                raise EvalError(f"unbound variable {node.name!r}") from None
        if isinstance(node, Let):
            bound = self.run(node.bound, env)
            return self.run(node.body, {**env, node.name: bound})
        if isinstance(node, If):
            cond = self.expect(self.run(node.cond, env), "Bool", "if")
            return self.run(node.then if cond else node.else_, env)
        if isinstance(node, Not):
            return not self.expect(self.run(node.expr, env), "Bool", "not")
        if isinstance(node, BinOp):
            return self.binop(node, env)
        if isinstance(node, Hole):
            raise EvalError(f"cannot evaluate pattern hole ?{node.name}")
        raise EvalError(f"unknown node {node!r}")

    def binop(self, node: BinOp, env: dict):
        op = node.op
        left = self.run(node.left, env)
        if op in ("and", "or"):
            self.expect(left, "Bool", op)
            if (op == "and") != left:
                return left
            return self.expect(self.run(node.right, env), "Bool", op)
        right = self.run(node.right, env)
        if op == "concat":
            return self.expect(left, "Str", op) + self.expect(right, "Str", op)
        if op in ("==", "!="):
            if type_of(left) != type_of(right):
                raise EvalTypeError(f"{op} compares {type_of(left)} with {type_of(right)}")
            return (left == right) == (op == "==")
        if op in ("<", "<=", ">", ">="):
            lt, rt = type_of(left), type_of(right)
            if lt != rt or lt == "Bool":
                raise EvalTypeError(f"{op} expects two Int or two Str, got {lt} and {rt}")
            if op == "<":
                return left < right
            if op == "<=":
                return left <= right
            if op == ">":
                return left > right
            return left >= right
        a = self.expect(left, "Int", op)
        b = self.expect(right, "Int", op)
        if op == "+":
            return _checked(a + b)
        if op == "-":
            return _checked(a - b)
        if op == "*":
            return _checked(a * b)
        q, r = _int_div(a, b)
        return _checked(q) if op == "/" else r


def evaluate(program: Program, args: Sequence[Value], budget: int = DEFAULT_BUDGET) -> Value:
    """Run ``program`` on ``args``.

    Raises EvalTypeError for arity/type mismatches, EvalArithmeticError for
    division by zero and 64-bit overflow, BudgetExceeded when more than
    ``budget`` nodes would be visited.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    args = tuple(args)
    if len(args) != program.arity:
        raise EvalTypeError(f"expected {program.arity} argument(s), got {len(args)}")
    for i, (value, (name, ty)) in enumerate(zip(args, program.params)):
        if type_of(value) != ty:
            raise EvalTypeError(f"argument {i} ({name}) expects {ty}, got {type_of(value)}")
    machine = _Machine(args, budget)
    result = machine.run(program.body, {})
    if type_of(result) != program.returns:
        raise EvalTypeError(f"program declared {program.returns} but produced {type_of(result)}")
    return result


def count_steps(program: Program, args: Sequence[Value]) -> int:
    """Steps used by a successful run (for termination checks)."""
    machine = _Machine(tuple(args), 2**62)
    machine.run(program.body, {})
    return machine.steps
