"""Independent reference implementations used as test oracles.

None of these import the code under test beyond the data types they consume;
each is written from the definition, favouring obviousness over speed.
"""

from __future__ import annotations

import math
import re
from functools import lru_cache

from reuserepo.minilang.ast import BinOp, BoolLit, Hole, If, IntLit, Let, Not, Param, StrLit, Var

LO, HI = -(2**63), 2**63 - 1


class RefError(Exception):
    def __init__(self, code):
        super().__init__(code)
        self.code = code


def _ty(v):
    if isinstance(v, bool):
        return "Bool"
    if isinstance(v, int):
        return "Int"
    return "Str"


def _need(v, ty):
    if _ty(v) != ty:
        raise RefError("type-error")
    return v


def _fit(n):
    if n < LO or n > HI:
        raise RefError("arithmetic-error")
    return n


def _trunc_div(a, b):
    if b == 0:
        raise RefError("arithmetic-error")
    # exact integer truncation toward zero
    q = a // b
    if q < 0 and q * b != a:
        q += 1
    return q


def compile_expr(node):
    """AST -> Python closure taking (args, env). Errors surface as RefError codes."""
    if isinstance(node, (IntLit, StrLit, BoolLit)):
        v = node.value
        return lambda args, env: v
    if isinstance(node, Param):
        i = node.index
        return lambda args, env: args[i]
    if isinstance(node, Var):
        name = node.name
        return lambda args, env: env[name]
    if isinstance(node, Hole):
        def hole(args, env):
            raise RefError("eval-error")
        return hole
    if isinstance(node, Let):
        bound, body, name = compile_expr(node.bound), compile_expr(node.body), node.name
        return lambda args, env: body(args, {**env, name: bound(args, env)})
    if isinstance(node, If):
        c, t, e = compile_expr(node.cond), compile_expr(node.then), compile_expr(node.else_)
        return lambda args, env: t(args, env) if _need(c(args, env), "Bool") else e(args, env)
    if isinstance(node, Not):
        x = compile_expr(node.expr)
        return lambda args, env: not _need(x(args, env), "Bool")
    assert isinstance(node, BinOp)
    op, lf, rf = node.op, compile_expr(node.left), compile_expr(node.right)

    def binop(args, env):
        a = lf(args, env)
        if op == "and":
            return _need(rf(args, env), "Bool") if _need(a, "Bool") else False
        if op == "or":
            return True if _need(a, "Bool") else _need(rf(args, env), "Bool")
        b = rf(args, env)
        if op == "concat":
            return _need(a, "Str") + _need(b, "Str")
        if op in ("==", "!="):
            if _ty(a) != _ty(b):
                raise RefError("type-error")
            return (a == b) if op == "==" else (a != b)
        if op in ("<", "<=", ">", ">="):
            if _ty(a) != _ty(b) or _ty(a) == "Bool":
                raise RefError("type-error")
            return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
        _need(a, "Int")
        _need(b, "Int")
        if op == "+":
            return _fit(a + b)
        if op == "-":
            return _fit(a - b)
        if op == "*":
            return _fit(a * b)
        q = _trunc_div(a, b)
        return _fit(q) if op == "/" else a - b * q

    return binop


def reference_eval(program, args):
    """('ok', value) or ('err', code)."""
    if len(args) != len(program.params) or any(_ty(a) != t for a, (_, t) in zip(args, program.params)):
        return ("err", "type-error")
    try:
        out = compile_expr(program.body)(tuple(args), {})
    except RefError as exc:
        return ("err", exc.code)
    if _ty(out) != program.returns:
        return ("err", "type-error")
    return ("ok", out)


# edit distance, by the textbook recurrence

def dp_edit_distance(a: str, b: str) -> int:
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))
    return d(len(a), len(b))


# tf-idf cosine, straight from the formula

def tokens(text):
    return re.findall(r"[^\W_]+", (text or "").casefold())


def tfidf_cosine(query: str, docs: dict[str, str]) -> dict[str, float]:
    """Scores for every document sharing at least one query term with the corpus."""
    n = len(docs)
    bags = {d: tokens(t) for d, t in docs.items()}
    vocab = sorted({w for b in bags.values() for w in b})
    df = {w: sum(w in b for b in bags.values()) for w in vocab}
    idf = {w: math.log(n / df[w]) for w in vocab}

    def vec(words):
        return {w: words.count(w) * idf[w] for w in set(words) if w in idf}

    qv = vec(tokens(query))
    out = {}
    for d, words in bags.items():
        if not set(words) & set(qv):
            continue
        dv = vec(words)
        dot = sum(qv[w] * dv.get(w, 0.0) for w in qv)
        nq = math.sqrt(sum(x * x for x in qv.values()))
        nd = math.sqrt(sum(x * x for x in dv.values()))
        out[d] = dot / (nq * nd) if nq * nd > 0 else 0.0
    return out
