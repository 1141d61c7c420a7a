"""Tiny arithmetic expression language for config coefficients.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Names are variables (``t``, ``x``, ``x1`` .. ``xN``, ``s``) or the
constants ``pi`` and ``e``. Expressions compile to closures over numpy
arrays, so one compiled expression evaluates a whole batch of nodes.
"""
from __future__ import annotations

import re

import numpy as np

_FUNCS = {
    "sin": (np.sin, 1),
    "cos": (np.cos, 1),
    "exp": (np.exp, 1),
    "abs": (np.abs, 1),
    "sqrt": (np.sqrt, 1),
    "log": (np.log, 1),
    "sign": (np.sign, 1),
    "min": (np.minimum, 2),
    "max": (np.maximum, 2),
}
_CONSTS = {"pi": np.pi, "e": np.e}
_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\*\*|[-+*/^(),]))")


class ExpressionError(ValueError):
    pass


def _tokenize(src: str):
    pos, out = 0, []
    src = src.rstrip()
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ExpressionError(f"bad character at {pos} in {src!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", float(num)))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, src, variables):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            raise ExpressionError(f"unexpected {tok[1]!r} in {self.src!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        self.take("end")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            node = (lambda a, b: lambda env: a(env) + b(env))(node, rhs) if op == "+" else \
                   (lambda a, b: lambda env: a(env) - b(env))(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            node = (lambda a, b: lambda env: a(env) * b(env))(node, rhs) if op == "*" else \
                   (lambda a, b: lambda env: a(env) / b(env))(node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            inner = self.unary()
            return lambda env: -inner(env)
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            exp = self.unary()
            return lambda env: np.power(base(env), exp(env))
        return base

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return lambda env: val
        if kind == "op" and val == "(":
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        if kind == "name":
            self.take()
            if self.peek() == ("op", "("):
                if val not in _FUNCS:
                    raise ExpressionError(f"unknown function {val!r}")
                fn, arity = _FUNCS[val]
                self.take()
                args = [self.expr()]
                while self.peek() == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.take("op", ")")
                if len(args) != arity:
                    raise ExpressionError(f"{val} takes {arity} argument(s)")
                if arity == 1:
                    a = args[0]
                    return lambda env: fn(a(env))
                a, b = args
                return lambda env: fn(a(env), b(env))
            if val in _CONSTS:
                c = _CONSTS[val]
                return lambda env: c
            if val not in self.variables:
                raise ExpressionError(f"unknown name {val!r} in {self.src!r}")
            return lambda env: env[val]
        raise ExpressionError(f"unexpected {val!r} in {self.src!r}")


def parse(src, variables) -> callable:
    """Compile ``src`` to ``fn(env) -> array``; numbers pass through unchanged."""
    if isinstance(src, (int, float)):
        value = float(src)
        return lambda env: value
    if not isinstance(src, str):
        raise ExpressionError(f"expression must be a string or number, got {type(src).__name__}")
    return _Parser(src, set(variables)).parse()


def _state_vars(dim):
    names = ["t"] + [f"x{i + 1}" for i in range(dim)]
    if dim == 1:
        names.append("x")
    return names


def _env(t, x, dim):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    env = {"t": t}
    for i in range(dim):
        env[f"x{i + 1}"] = x[..., i]
    if dim == 1:
        env["x"] = x[..., 0]
    return env


def compile_scalar(src, dim: int):
    """Expression in t, x1..xN -> ``fn(t, x)`` returning shape ``t.shape``."""
    node = parse(src, _state_vars(dim))

    def fn(t, x):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(node(_env(t, x, dim)), dtype=float), t.shape)

    fn.source = src
    return fn


def compile_vector(src, dim: int):
    """A list of N expressions (or one expression when N = 1) -> ``fn(t, x)`` of shape ``t.shape + (N,)``."""
    items = src if isinstance(src, list) else [src]
    if len(items) != dim:
        raise ExpressionError(f"expected {dim} component expression(s), got {len(items)}")
    comps = [compile_scalar(s, dim) for s in items]

    def fn(t, x):
        return np.stack([c(t, x) for c in comps], axis=-1)

    fn.source = src
    return fn


def compile_time(src):
    """Expression in t only, e.g. the damping coefficient r(t) or a weight theta(t)."""
    node = parse(src, ["t"])

    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(node({"t": t}), dtype=float), t.shape)

    fn.source = src
    return fn


def compile_profile(src):
    """Expression in s >= 0 for a custom radial profile phi(s)."""
    node = parse(src, ["s"])

    def fn(s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(np.asarray(node({"s": s}), dtype=float), s.shape)

    fn.source = src
    return fn
