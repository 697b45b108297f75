"""Random program generation, used by fuzz tests and synthetic corpora."""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from .ast import (
    BASE_TYPES,
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
    walk,
)

PARAM_NAMES = ("a", "b", "c", "d", "e", "f", "g", "h")
HOLE_NAMES = ("x", "y", "z")


@dataclass
class ProgramGenerator:
    """Type-directed generator.

    ``mistype_rate`` occasionally swaps an operand type so that evaluation can
    hit type errors; ``hole_rate`` replaces subtrees by holes (patterns).
    """

    rng: random.Random
    max_depth: int = 4
    int_range: tuple[int, int] = (-20, 20)
    mistype_rate: float = 0.0
    hole_rate: float = 0.0
    hole_names: tuple[str, ...] = HOLE_NAMES

    def program(self, arity: int | None = None, returns: str | None = None,
                param_types: tuple[str, ...] | None = None) -> Program:
        if param_types is None:
            if arity is None:
                arity = self.rng.randint(0, 3)
            param_types = tuple(self.rng.choice(BASE_TYPES) for _ in range(arity))
        params = tuple(zip(PARAM_NAMES, param_types))
        returns = returns or self.rng.choice(BASE_TYPES)
        self._params = param_types
        self._fresh = 0
        body = self.expr(returns, self.max_depth, {})
        return Program(params, returns, body)

    def value(self, ty: str):
        if ty == "Int":
            return self.rng.randint(*self.int_range)
        if ty == "Bool":
            return self.rng.random() < 0.5
        return "".join(self.rng.choice("abc") for _ in range(self.rng.randint(0, 3)))

    def _ty(self, ty: str) -> str:
        if self.mistype_rate and self.rng.random() < self.mistype_rate:
            return self.rng.choice(BASE_TYPES)
        return ty

    def leaf(self, ty: str, scope: dict[str, str]) -> Expr:
        options: list[Expr] = []
        options += [Param(i) for i, t in enumerate(self._params) if t == ty]
        options += [Var(n) for n, t in scope.items() if t == ty]
        if options and self.rng.random() < 0.6:
            return self.rng.choice(options)
        v = self.value(ty)
        if ty == "Int":
            return IntLit(v)
        if ty == "Bool":
            return BoolLit(v)
        return StrLit(v)

    def expr(self, ty: str, depth: int, scope: dict[str, str]) -> Expr:
        rng = self.rng
        if self.hole_rate and depth < self.max_depth and rng.random() < self.hole_rate:
            return Hole(rng.choice(self.hole_names))
        if depth <= 0 or rng.random() < 0.25:
            return self.leaf(ty, scope)
        d = depth - 1
        roll = rng.random()
        if roll < 0.12:
            name = f"t{self._fresh}"
            self._fresh += 1
            bty = rng.choice(BASE_TYPES)
            bound = self.expr(bty, d, scope)
            return Let(name, bound, self.expr(ty, d, {**scope, name: bty}))
        if roll < 0.24:
            return If(self.expr(self._ty("Bool"), d, scope), self.expr(ty, d, scope), self.expr(ty, d, scope))
        if ty == "Int":
            op = rng.choice(("+", "-", "*", "/", "%", "+", "-", "*"))
            return BinOp(op, self.expr(self._ty("Int"), d, scope), self.expr(self._ty("Int"), d, scope))
        if ty == "Str":
            return BinOp("concat", self.expr(self._ty("Str"), d, scope), self.expr(self._ty("Str"), d, scope))
        kind = rng.random()
        if kind < 0.2:
            return Not(self.expr(self._ty("Bool"), d, scope))
        if kind < 0.45:
            return BinOp(rng.choice(("and", "or")), self.expr(self._ty("Bool"), d, scope),
                         self.expr(self._ty("Bool"), d, scope))
        if kind < 0.7:
            oty = rng.choice(BASE_TYPES)
            return BinOp(rng.choice(("==", "!=")), self.expr(oty, d, scope), self.expr(self._ty(oty), d, scope))
        oty = rng.choice(("Int", "Str"))
        return BinOp(rng.choice(("<", "<=", ">", ">=")), self.expr(oty, d, scope),
                     self.expr(self._ty(oty), d, scope))

    def args_for(self, program: Program) -> list:
        return [self.value(t) for t in program.param_types]


def random_fragment(rng: random.Random, arity: int, max_depth: int = 2) -> Expr:
    """A hole-free, let-free expression usable as a hole binding."""
    gen = ProgramGenerator(rng, max_depth=max_depth)
    gen._params = tuple(rng.choice(BASE_TYPES) for _ in range(arity))
    gen._fresh = 0
    ty = rng.choice(BASE_TYPES)
    for _ in range(20):
        frag = gen.expr(ty, max_depth, {})
        if not any(isinstance(n, (Let, Var)) for n in walk(frag)):
            return frag
    return IntLit(rng.randint(-9, 9))


def random_word(rng: random.Random, length: int) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(length))
