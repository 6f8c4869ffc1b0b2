"""Guard and effect expressions.

A tiny typed language over integer, boolean and text values: variables,
literals, ``+ -``, comparisons, ``! && ||`` and assignment effects such as
``Inventory := Inventory - Quantity``.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Mapping, MutableMapping
from dataclasses import dataclass
from enum import Enum
from typing import Union

from .errors import EvaluationError, Rule

logger = logging.getLogger(__name__)

Value = Union[int, bool, str]


class VarType(str, Enum):
    INT = "int"
    TEXT = "text"
    BOOL = "bool"

    def accepts(self, value: object) -> bool:
        return type_of(value) is self


@dataclass(frozen=True)
class Literal:
    value: Value


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not:
    operand: Expr


@dataclass(frozen=True)
class Neg:
    operand: Expr


Expr = Union[Literal, Var, BinOp, Not, Neg]


@dataclass(frozen=True)
class Assignment:
    target: str
    expr: Expr

    def __str__(self) -> str:
        return f"{self.target} := {to_source(self.expr)}"


ARITHMETIC = frozenset({"+", "-"})
ORDERING = frozenset({"<", "<=", ">", ">="})
EQUALITY = frozenset({"==", "!="})
LOGICAL = frozenset({"&&", "||"})

_PRECEDENCE = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4, "+": 5, "-": 5}
_UNARY_PRECEDENCE = 6
_ATOM_PRECEDENCE = 7


def type_of(value: object) -> VarType | None:
    # bool is a subclass of int, so it has to be tested first
    if isinstance(value, bool):
        return VarType.BOOL
    if isinstance(value, int):
        return VarType.INT
    if isinstance(value, str):
        return VarType.TEXT
    return None


def variables(expr: Expr | None) -> frozenset[str]:
    """Names of every variable read by ``expr``."""
    if expr is None or isinstance(expr, Literal):
        return frozenset()
    if isinstance(expr, Var):
        return frozenset({expr.name})
    if isinstance(expr, BinOp):
        return variables(expr.left) | variables(expr.right)
    return variables(expr.operand)


def effect_reads(effects: Iterable[Assignment]) -> frozenset[str]:
    names: set[str] = set()
    for effect in effects:
        names |= variables(effect.expr)
    return frozenset(names)


def infer_type(expr: Expr, types: Mapping[str, VarType], *, rule: Rule = Rule.GUARD_TYPE_ERROR) -> VarType:
    """Static type of ``expr``. Raises EvaluationError on undeclared names or operand mismatches."""
    if isinstance(expr, Literal):
        literal_type = type_of(expr.value)
        if literal_type is None:
            raise EvaluationError(rule, f"unsupported literal {expr.value!r}")
        return literal_type
    if isinstance(expr, Var):
        if expr.name not in types:
            raise EvaluationError(Rule.UNDECLARED_VARIABLE, f"variable '{expr.name}' is not declared", subject=expr.name)
        return types[expr.name]
    if isinstance(expr, Not):
        _expect(infer_type(expr.operand, types, rule=rule), VarType.BOOL, "!", rule)
        return VarType.BOOL
    if isinstance(expr, Neg):
        _expect(infer_type(expr.operand, types, rule=rule), VarType.INT, "unary -", rule)
        return VarType.INT

    left = infer_type(expr.left, types, rule=rule)
    right = infer_type(expr.right, types, rule=rule)
    if expr.op in ARITHMETIC:
        _expect(left, VarType.INT, expr.op, rule)
        _expect(right, VarType.INT, expr.op, rule)
        return VarType.INT
    if expr.op in ORDERING:
        _expect(left, VarType.INT, expr.op, rule)
        _expect(right, VarType.INT, expr.op, rule)
        return VarType.BOOL
    if expr.op in EQUALITY:
        if left is not right:
            raise EvaluationError(rule, f"'{expr.op}' compares {left.value} with {right.value}")
        return VarType.BOOL
    if expr.op in LOGICAL:
        _expect(left, VarType.BOOL, expr.op, rule)
        _expect(right, VarType.BOOL, expr.op, rule)
        return VarType.BOOL
    raise EvaluationError(rule, f"unknown operator '{expr.op}'")


def _expect(actual: VarType, expected: VarType, op: str, rule: Rule) -> None:
    if actual is not expected:
        raise EvaluationError(rule, f"'{op}' needs {expected.value} operands, got {actual.value}")


def evaluate(expr: Expr, env: Mapping[str, Value], *, rule: Rule = Rule.GUARD_TYPE_ERROR) -> Value:
    """Evaluate ``expr`` against ``env``. ``&&`` and ``||`` short-circuit."""
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Var):
        if expr.name not in env:
            raise EvaluationError(Rule.UNBOUND_VARIABLE, f"variable '{expr.name}' has no value", subject=expr.name)
        return env[expr.name]
    if isinstance(expr, Not):
        return not _as(evaluate(expr.operand, env, rule=rule), VarType.BOOL, "!", rule)
    if isinstance(expr, Neg):
        return -_as(evaluate(expr.operand, env, rule=rule), VarType.INT, "unary -", rule)

    op = expr.op
    if op in LOGICAL:
        left = _as(evaluate(expr.left, env, rule=rule), VarType.BOOL, op, rule)
        if op == "&&" and not left:
            return False
        if op == "||" and left:
            return True
        return _as(evaluate(expr.right, env, rule=rule), VarType.BOOL, op, rule)

    left_value = evaluate(expr.left, env, rule=rule)
    right_value = evaluate(expr.right, env, rule=rule)
    if op in EQUALITY:
        if type_of(left_value) is not type_of(right_value):
            raise EvaluationError(rule, f"'{op}' compares {left_value!r} with {right_value!r}")
        return (left_value == right_value) if op == "==" else (left_value != right_value)

    a = _as(left_value, VarType.INT, op, rule)
    b = _as(right_value, VarType.INT, op, rule)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise EvaluationError(rule, f"unknown operator '{op}'")


def _as(value: Value, expected: VarType, op: str, rule: Rule):  # noqa: ANN202
    if type_of(value) is not expected:
        raise EvaluationError(rule, f"'{op}' needs {expected.value} operands, got {value!r}")
    return value


def holds(expr: Expr | None, env: Mapping[str, Value]) -> bool:
    """Truth of a guard. A missing guard always holds."""
    if expr is None:
        return True
    result = evaluate(expr, env, rule=Rule.GUARD_TYPE_ERROR)
    if type_of(result) is not VarType.BOOL:
        raise EvaluationError(Rule.GUARD_TYPE_ERROR, f"guard '{to_source(expr)}' evaluated to {result!r}")
    return bool(result)


def apply_effects(
    effects: Iterable[Assignment],
    env: MutableMapping[str, Value],
    types: Mapping[str, VarType],
) -> dict[str, Value]:
    """Apply assignments in order, each seeing the previous ones. Returns the written values."""
    written: dict[str, Value] = {}
    for effect in effects:
        value = evaluate(effect.expr, env, rule=Rule.EFFECT_TYPE_ERROR)
        declared = types.get(effect.target)
        if declared is None:
            raise EvaluationError(Rule.UNDECLARED_VARIABLE, f"variable '{effect.target}' is not declared", subject=effect.target)
        if not declared.accepts(value):
            raise EvaluationError(
                Rule.EFFECT_TYPE_ERROR,
                f"'{effect}' produced {value!r} for a {declared.value} variable",
                subject=effect.target,
            )
        env[effect.target] = value
        written[effect.target] = value
        logger.debug("effect %s -> %r", effect, value)
    return written


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return json.dumps(value, ensure_ascii=False)


def _precedence(expr: Expr) -> int:
    if isinstance(expr, BinOp):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, (Not, Neg)):
        return _UNARY_PRECEDENCE
    if isinstance(expr, Literal) and type_of(expr.value) is VarType.INT and expr.value < 0:
        return _UNARY_PRECEDENCE
    return _ATOM_PRECEDENCE


def to_source(expr: Expr) -> str:
    """Render ``expr`` in DSL syntax with the fewest parentheses that preserve its structure."""
    if isinstance(expr, Literal):
        return format_value(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, (Not, Neg)):
        symbol = "!" if isinstance(expr, Not) else "-"
        inner = to_source(expr.operand)
        if _precedence(expr.operand) < _UNARY_PRECEDENCE:
            inner = f"({inner})"
        elif isinstance(expr, Neg) and inner.startswith("-"):
            inner = f"({inner})"
        return f"{symbol}{inner}"

    level = _PRECEDENCE[expr.op]
    non_associative = expr.op in ORDERING or expr.op in EQUALITY
    left = to_source(expr.left)
    if _precedence(expr.left) < level or (non_associative and _precedence(expr.left) == level):
        left = f"({left})"
    right = to_source(expr.right)
    if _precedence(expr.right) <= level:
        right = f"({right})"
    return f"{left} {expr.op} {right}"
