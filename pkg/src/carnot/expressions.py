"""Safe arithmetic expressions for graph functions on the command line.

Supports +, -, *, /, ^ (power), unary minus, cos, sin, exp, numeric
literals and the variables x1..x_{2n}.  Parsing goes through the ast
module with a strict node whitelist; no attribute access, subscripts or
names beyond the whitelist ever evaluate.
"""

from __future__ import annotations

import ast
import math
import re

import numpy as np

from .surfaces import GraphFunction

__all__ = ["parse_graph", "ExpressionGraph"]

_FUNCS = {"cos": math.cos, "sin": math.sin, "exp": math.exp}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}
_VAR = re.compile(r"^x([1-9][0-9]*)$")


def _compile(node, var_index):
    if isinstance(node, ast.Expression):
        return _compile(node.body, var_index)
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ValueError(f"non-numeric constant {node.value!r}")
        value = float(node.value)
        return lambda x: value
    if isinstance(node, ast.Name):
        m = _VAR.match(node.id)
        if not m:
            raise ValueError(f"unknown variable {node.id!r} (use x1, x2, ...)")
        idx = int(m.group(1)) - 1
        var_index.add(idx)
        return lambda x: x[idx]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand, var_index)
        if isinstance(node.op, ast.USub):
            return lambda x: -inner(x)
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left = _compile(node.left, var_index)
        right = _compile(node.right, var_index)
        return lambda x: op(left(x), right(x))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or len(node.args) != 1 or node.keywords:
            raise ValueError("only cos(.), sin(.), exp(.) calls are allowed")
        fn = _FUNCS[node.func.id]
        arg = _compile(node.args[0], var_index)
        return lambda x: fn(arg(x))
    raise ValueError(f"unsupported syntax: {ast.dump(node)}")


def parse_graph(text: str):
    """Compile an expression in x1..x_{2n}; returns (callable, n_variables)."""
    tree = ast.parse(text.replace("^", "**"), mode="eval")
    var_index: set[int] = set()
    fn = _compile(tree, var_index)
    max_var = max(var_index) + 1 if var_index else 1
    return fn, max_var


class ExpressionGraph(GraphFunction):
    """Graph function defined by a parsed expression; FD derivatives."""

    def __init__(self, text: str, n: int | None = None):
        fn, max_var = parse_graph(text)
        if n is None:
            n = (max_var + 1) // 2
        if max_var > 2 * n:
            raise ValueError(f"expression uses x{max_var} but the group has 2n = {2 * n} horizontal variables")
        super().__init__(n)
        self.text = text
        self._fn = fn

    def value(self, x):
        return float(self._fn(np.asarray(x, dtype=float)))
