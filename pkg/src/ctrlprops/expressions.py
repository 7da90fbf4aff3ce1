"""Small infix expression language for reward guards and reward values.

Grammar: identifiers, numbers, ``+ - * / **``, ``abs()``, comparisons
``< <= > >= = == !=`` (chainable), ``and or not`` and the literals
``true``/``false``. Parsing goes through :mod:`ast` with a node whitelist;
evaluation is vectorised over numpy arrays so a guard or reward can be
evaluated on a whole trace at once.
"""

from __future__ import annotations

import ast
import operator
import re
from collections.abc import Mapping

import numpy as np

from .exceptions import ConfigurationError

_LITERALS = {"true": True, "false": False}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_CMPOPS = {
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
}
_FUNCS = {"abs": np.abs}

# a lone "=" is equality
_SINGLE_EQ = re.compile(r"(?<![<>=!])=(?!=)")


class Expression:
    """A parsed, immutable expression.

    >>> Expression("r > T and abs(r - T) <= 1").evaluate({"r": 1.5, "T": 1.0})
    True
    """

    __slots__ = ("source", "_tree", "names")

    def __init__(self, source: str):
        if isinstance(source, Expression):
            source = source.source
        if isinstance(source, bool):
            source = "true" if source else "false"
        elif isinstance(source, (int, float)):
            source = repr(float(source))
        if not isinstance(source, str) or not source.strip():
            raise ConfigurationError(f"empty or non-string expression: {source!r}")
        self.source = source.strip()
        try:
            tree = ast.parse(_SINGLE_EQ.sub("==", self.source), mode="eval")
        except SyntaxError as exc:
            raise ConfigurationError(f"malformed expression {self.source!r}: {exc.msg}") from None
        names = set()
        for node in ast.walk(tree):
            _check_node(node, self.source)
            if isinstance(node, ast.Name) and node.id not in _LITERALS and node.id not in _FUNCS:
                names.add(node.id)
        self._tree = tree.body
        self.names = frozenset(names)

    def __repr__(self):
        return f"Expression({self.source!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and other.source == self.source

    def __hash__(self):
        return hash(self.source)

    def evaluate(self, env: Mapping):
        """Evaluate with ``env`` binding every referenced name to a scalar or array."""
        unbound = self.names.difference(env)
        if unbound:
            raise ConfigurationError(
                f"expression {self.source!r} references unbound name(s) {sorted(unbound)}"
            )
        result = _eval(self._tree, env)
        return result.item() if isinstance(result, np.generic) else result


def _check_node(node, source):
    allowed = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.BoolOp, ast.Compare,
               ast.Name, ast.Load, ast.Constant, ast.Call, ast.And, ast.Or, ast.Not,
               ast.USub, ast.UAdd, *_BINOPS, *_CMPOPS)
    if not isinstance(node, allowed):
        raise ConfigurationError(f"unsupported syntax {type(node).__name__} in {source!r}")
    if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
        raise ConfigurationError(f"unsupported constant {node.value!r} in {source!r}")
    if isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS) or node.keywords \
                or len(node.args) != 1:
            raise ConfigurationError(f"only abs(x) calls are supported in {source!r}")


def _eval(node, env):
    if isinstance(node, ast.Constant):
        return node.value
    if isinstance(node, ast.Name):
        if node.id in _LITERALS:
            return _LITERALS[node.id]
        return env[node.id]
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        operand = _eval(node.operand, env)
        if isinstance(node.op, ast.Not):
            return np.logical_not(operand)
        return -operand if isinstance(node.op, ast.USub) else +operand
    if isinstance(node, ast.BoolOp):
        values = [_eval(v, env) for v in node.values]
        combine = np.logical_and if isinstance(node.op, ast.And) else np.logical_or
        return combine.reduce(np.broadcast_arrays(*values)) if any(
            isinstance(v, np.ndarray) for v in values) else bool(combine.reduce(values))
    if isinstance(node, ast.Compare):
        left = _eval(node.left, env)
        result = True
        for op, comparator in zip(node.ops, node.comparators):
            right = _eval(comparator, env)
            result = np.logical_and(result, _CMPOPS[type(op)](left, right))
            left = right
        return result
    if isinstance(node, ast.Call):
        return _FUNCS[node.func.id](_eval(node.args[0], env))
    raise ConfigurationError(f"cannot evaluate node {type(node).__name__}")  # pragma: no cover
