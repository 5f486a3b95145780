"""Safe evaluation of small real-valued expressions such as ``"1/pi"``.

Parameters like alpha_j and the differences h are kept as text so they can be
re-evaluated at any precision: binary64 for the evaluators, many digits for
integer-relation detection. Only arithmetic, a few constants and elementary
functions are accepted; nothing is passed to ``eval``.
"""

from __future__ import annotations

import ast
import math
import operator

import mpmath

from .errors import ConfigError

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_NAMES = ("log", "exp", "sqrt", "sin", "cos", "pi", "e")

_FLOAT_LIB = {
    "log": math.log,
    "exp": math.exp,
    "sqrt": math.sqrt,
    "sin": math.sin,
    "cos": math.cos,
    "pi": math.pi,
    "e": math.e,
}


def _mp_lib():
    return {
        "log": mpmath.log,
        "exp": mpmath.exp,
        "sqrt": mpmath.sqrt,
        "sin": mpmath.sin,
        "cos": mpmath.cos,
        "pi": +mpmath.pi,
        "e": mpmath.e + 0,
    }


def _walk(node, lib, literal):
    if isinstance(node, ast.Expression):
        return _walk(node.body, lib, literal)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return literal(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_walk(node.left, lib, literal), _walk(node.right, lib, literal))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_walk(node.operand, lib, literal))
    if isinstance(node, ast.Name) and node.id in ("pi", "e"):
        return lib[node.id]
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in lib
        and callable(lib[node.func.id])
        and len(node.args) == 1
        and not node.keywords
    ):
        return lib[node.func.id](_walk(node.args[0], lib, literal))
    raise ConfigError(f"unsupported expression element: {ast.dump(node)[:60]}")


def _parse(text) -> ast.Expression:
    if isinstance(text, (int, float)):
        text = repr(text)
    try:
        return ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}") from exc


def evaluate(text, dps: int | None = None):
    """Value of ``text`` as a float, or as an mpmath number at ``dps`` digits."""
    tree = _parse(text)
    try:
        if dps is None:
            return float(_walk(tree, _FLOAT_LIB, float))
        with mpmath.workdps(dps):
            # decimal literals go through str so "0.1" means one tenth
            return +_walk(tree, _mp_lib(), lambda v: mpmath.mpf(v) if isinstance(v, int) else mpmath.mpf(repr(v)))
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ConfigError(f"cannot evaluate {text!r}: {exc}") from exc


def normalise(text) -> str:
    """Canonical text form (validates the expression)."""
    evaluate(text)
    return str(text).strip() if not isinstance(text, (int, float)) else repr(text)
