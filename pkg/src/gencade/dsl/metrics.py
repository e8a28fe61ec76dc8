"""Static complexity metrics over policy programs.

Definitions (fixed, so numbers are comparable across runs and reports):

- ``loc``: non-blank lines of the canonically formatted program with
  docstrings stripped — measures executable structure, not prose.
- ``cyclomatic``: sum over functions of 1 + (number of if-arms + while +
  for + and + or). An ``elif`` arm counts like an ``if``; ``else`` adds 0.
- ``max_if_nesting``: deepest chain of lexically nested if-statements; the
  arms of one if/elif/else statement share a single level.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast as A
from .formatter import format_program


@dataclass(frozen=True)
class CodeMetrics:
    loc: int
    cyclomatic: int
    max_if_nesting: int


def _expr_decisions(expr: A.Expr) -> int:
    if isinstance(expr, A.BoolOp):
        return 1 + _expr_decisions(expr.left) + _expr_decisions(expr.right)
    if isinstance(expr, (A.BinOp, A.Compare)):
        return _expr_decisions(expr.left) + _expr_decisions(expr.right)
    if isinstance(expr, A.UnaryOp):
        return _expr_decisions(expr.operand)
    if isinstance(expr, A.ListLit):
        return sum(_expr_decisions(item) for item in expr.items)
    if isinstance(expr, A.Attribute):
        return _expr_decisions(expr.obj)
    if isinstance(expr, A.Index):
        return _expr_decisions(expr.obj) + _expr_decisions(expr.index)
    if isinstance(expr, A.Call):
        return sum(_expr_decisions(arg) for arg in expr.args)
    return 0


def _body_decisions(body) -> int:
    total = 0
    for stmt in body:
        if isinstance(stmt, (A.Assign, A.Return, A.ExprStmt)):
            total += _expr_decisions(stmt.value)
        elif isinstance(stmt, A.If):
            for arm in stmt.arms:
                total += 1 + _expr_decisions(arm.condition) + _body_decisions(arm.body)
            total += _body_decisions(stmt.orelse)
        elif isinstance(stmt, A.While):
            total += 1 + _expr_decisions(stmt.condition) + _body_decisions(stmt.body)
        elif isinstance(stmt, A.For):
            total += 1 + _expr_decisions(stmt.iterable) + _body_decisions(stmt.body)
    return total


def _body_if_depth(body) -> int:
    deepest = 0
    for stmt in body:
        if isinstance(stmt, A.If):
            inner = 0
            for arm in stmt.arms:
                inner = max(inner, _body_if_depth(arm.body))
            inner = max(inner, _body_if_depth(stmt.orelse))
            deepest = max(deepest, 1 + inner)
        elif isinstance(stmt, (A.While, A.For)):
            deepest = max(deepest, _body_if_depth(stmt.body))
    return deepest


def function_cyclomatic(fn: A.FunctionDef) -> int:
    return 1 + _body_decisions(fn.body)


def function_if_depth(fn: A.FunctionDef) -> int:
    return _body_if_depth(fn.body)


def metrics(program: A.PolicyProgram) -> CodeMetrics:
    text = format_program(program, include_docstrings=False)
    loc = sum(1 for line in text.splitlines() if line.strip())
    cyclomatic = sum(function_cyclomatic(fn) for fn in program.functions)
    depth = max((function_if_depth(fn) for fn in program.functions), default=0)
    return CodeMetrics(loc=loc, cyclomatic=cyclomatic, max_if_nesting=depth)
