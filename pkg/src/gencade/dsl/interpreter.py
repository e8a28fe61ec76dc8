"""Tree-walking interpreter for the policy language.

Execution model:
- every value is a double, bool, string, none, list, game-object view, or
  observation view; game integers widen losslessly to doubles on read
- observation and object views are read-only windows over environment state
- the only nondeterminism is the interpreter's own seeded RNG
- each statement execution and expression evaluation costs one step against
  a fixed budget; exhausting it raises BudgetExceededError

The entry frame can additionally thread provenance: every value carries the
set of trace-node ids it was derived from, and each trainable-function call
made by the entry function is reported to an attached tracer. Helper-function
frames always run the fast untraced path.
"""

from __future__ import annotations

import math
import random
from typing import Any, Callable, Optional

from . import ast as A
from .ast import ENTRY_FUNCTION
from .errors import BudgetExceededError, PolicyRuntimeError

DEFAULT_STEP_BUDGET = 20000

_OBJECT_FIELDS = ("x", "y", "w", "h", "dx", "dy")

Prov = frozenset


class ObjectView:
    """Read-only numeric view of one game object (x, y, w, h, dx, dy)."""

    __slots__ = ("_obj", "label")

    def __init__(self, obj: Any, label: str):
        self._obj = obj
        self.label = label

    def get(self, field: str) -> float:
        return float(getattr(self._obj, field))

    def as_dict(self) -> dict[str, float]:
        return {f: float(getattr(self._obj, f)) for f in _OBJECT_FIELDS}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ObjectView) and other.label == self.label and other._obj == self._obj

    def __hash__(self) -> int:
        return hash((self.label, self._obj))

    def __repr__(self) -> str:
        return f"ObjectView({self.label})"


class ObservationView:
    """Read-only view of an Observation: label lookup, membership, sorted
    iteration, and the scalar fields ``lives`` and ``score``."""

    __slots__ = ("_obs",)

    def __init__(self, obs: Any):
        self._obs = obs

    @property
    def lives(self) -> float:
        return float(self._obs.lives)

    @property
    def score(self) -> float:
        return float(self._obs.score)

    def labels(self) -> list[str]:
        return sorted(self._obs.objects)

    def has(self, label: str) -> bool:
        return label in self._obs.objects

    def lookup(self, label: str) -> ObjectView:
        return ObjectView(self._obs.objects[label], label)

    def count(self) -> int:
        return len(self._obs.objects)

    def items(self) -> list[tuple[str, ObjectView]]:
        return [(label, self.lookup(label)) for label in self.labels()]

    def __repr__(self) -> str:
        return f"ObservationView({self.count()} objects)"


def type_name(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, float):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, tuple):
        return "list"
    if isinstance(value, ObjectView):
        return "object"
    if isinstance(value, ObservationView):
        return "observation"
    return type(value).__name__


def _truthy(value: Any) -> bool:
    if value is None:
        return False
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return value != 0.0
    if isinstance(value, str):
        return len(value) > 0
    if isinstance(value, tuple):
        return len(value) > 0
    return True


def _is_number(value: Any) -> bool:
    return isinstance(value, float) and not isinstance(value, bool)


class _ReturnSignal(Exception):
    def __init__(self, value: Any, prov: Prov):
        self.value = value
        self.prov = prov


class Tracer:
    """Interface the rollout recorder implements to observe trainable calls."""

    def record_trainable_call(self, function: str, input_ids: frozenset[int], output: Any) -> int:
        raise NotImplementedError


_EMPTY: Prov = frozenset()


class Interpreter:
    def __init__(
        self,
        program: A.PolicyProgram,
        step_budget: int = DEFAULT_STEP_BUDGET,
        rng_seed: int = 0,
        tracer: Optional[Tracer] = None,
    ):
        self.program = program
        self.functions = {fn.name: fn for fn in program.functions}
        self.step_budget = step_budget
        self.steps_used = 0
        self.rng = random.Random(rng_seed)
        self.tracer = tracer
        self._fn_name = "?"
        self._line = 0

    # -- public entry points -------------------------------------------

    def call(self, name: str, args: list[Any]) -> Any:
        fn = self._resolve(name, args)
        return self._exec_function(fn, args)

    def call_traced(self, name: str, args: list[Any], arg_provs: list[Prov]) -> tuple[Any, Prov]:
        """Run ``name`` with provenance threading in its frame. Trainable
        calls made directly by this frame are reported to the tracer."""
        fn = self._resolve(name, args)
        env = dict(zip(fn.params, args))
        shadow = dict(zip(fn.params, arg_provs))
        prev = self._fn_name
        self._fn_name = fn.name
        try:
            self._exec_block(fn.body, env, shadow)
        except _ReturnSignal as sig:
            return sig.value, sig.prov
        finally:
            self._fn_name = prev
        return None, _EMPTY

    # -- plumbing --------------------------------------------------------

    def _resolve(self, name: str, args: list[Any]) -> A.FunctionDef:
        fn = self.functions.get(name)
        if fn is None:
            raise PolicyRuntimeError(f"no function named {name!r}", name, 0)
        if len(args) != len(fn.params):
            raise PolicyRuntimeError(
                f"{name}() takes {len(fn.params)} argument(s), got {len(args)}", name, fn.line
            )
        return fn

    def _tick(self, line: int) -> None:
        self.steps_used += 1
        if self.steps_used > self.step_budget:
            raise BudgetExceededError(self.step_budget, self._fn_name, line)

    def _err(self, message: str, line: int) -> PolicyRuntimeError:
        return PolicyRuntimeError(message, self._fn_name, line)

    def _exec_function(self, fn: A.FunctionDef, args: list[Any]) -> Any:
        env = dict(zip(fn.params, args))
        prev = self._fn_name
        self._fn_name = fn.name
        try:
            self._exec_block(fn.body, env, None)
        except _ReturnSignal as sig:
            return sig.value
        finally:
            self._fn_name = prev
        return None

    # -- statements ------------------------------------------------------

    def _exec_block(self, body, env: dict, shadow: dict | None) -> None:
        for stmt in body:
            self._exec_stmt(stmt, env, shadow)

    def _exec_stmt(self, stmt: A.Stmt, env: dict, shadow: dict | None) -> None:
        self._tick(stmt.line)
        if isinstance(stmt, A.Assign):
            value, prov = self._eval(stmt.value, env, shadow)
            env[stmt.target] = value
            if shadow is not None:
                shadow[stmt.target] = prov
        elif isinstance(stmt, A.Return):
            value, prov = self._eval(stmt.value, env, shadow)
            raise _ReturnSignal(value, prov)
        elif isinstance(stmt, A.ExprStmt):
            self._eval(stmt.value, env, shadow)
        elif isinstance(stmt, A.If):
            for arm in stmt.arms:
                cond, _ = self._eval(arm.condition, env, shadow)
                if _truthy(cond):
                    self._exec_block(arm.body, env, shadow)
                    return
            if stmt.orelse:
                self._exec_block(stmt.orelse, env, shadow)
        elif isinstance(stmt, A.While):
            while True:
                cond, _ = self._eval(stmt.condition, env, shadow)
                if not _truthy(cond):
                    break
                self._exec_block(stmt.body, env, shadow)
                self._tick(stmt.line)
        elif isinstance(stmt, A.For):
            iterable, iter_prov = self._eval(stmt.iterable, env, shadow)
            for item in self._iter_items(iterable, stmt, env):
                if len(stmt.targets) == 1:
                    env[stmt.targets[0]] = item
                    if shadow is not None:
                        shadow[stmt.targets[0]] = iter_prov
                else:
                    env[stmt.targets[0]], env[stmt.targets[1]] = item
                    if shadow is not None:
                        shadow[stmt.targets[0]] = iter_prov
                        shadow[stmt.targets[1]] = iter_prov
                self._exec_block(stmt.body, env, shadow)
                self._tick(stmt.line)
        else:
            raise self._err(f"unknown statement {type(stmt).__name__}", getattr(stmt, "line", 0))

    def _iter_items(self, iterable: Any, stmt: A.For, env: dict):
        if isinstance(iterable, tuple):
            if len(stmt.targets) != 1:
                raise self._err("list iteration takes exactly one loop variable", stmt.line)
            return list(iterable)
        if isinstance(iterable, ObservationView):
            if len(stmt.targets) != 2:
                raise self._err(
                    "observation iteration takes two loop variables (label, object)", stmt.line
                )
            return iterable.items()
        raise self._err(f"cannot iterate over {type_name(iterable)}", stmt.line)

    # -- expressions -------------------------------------------------------

    def _eval(self, expr: A.Expr, env: dict, shadow: dict | None) -> tuple[Any, Prov]:
        self._tick(expr.line)
        if isinstance(expr, A.Num):
            return expr.value, _EMPTY
        if isinstance(expr, A.Str):
            return expr.value, _EMPTY
        if isinstance(expr, A.Bool):
            return expr.value, _EMPTY
        if isinstance(expr, A.NoneLit):
            return None, _EMPTY
        if isinstance(expr, A.Name):
            if expr.ident not in env:
                raise self._err(f"name {expr.ident!r} used before assignment", expr.line)
            value = env[expr.ident]
            prov = shadow.get(expr.ident, _EMPTY) if shadow is not None else _EMPTY
            return value, prov
        if isinstance(expr, A.ListLit):
            items = []
            prov = _EMPTY
            for item_expr in expr.items:
                item, p = self._eval(item_expr, env, shadow)
                items.append(item)
                prov |= p
            return tuple(items), prov
        if isinstance(expr, A.Attribute):
            obj, prov = self._eval(expr.obj, env, shadow)
            return self._attribute(obj, expr.field_name, expr.line), prov
        if isinstance(expr, A.Index):
            obj, prov_o = self._eval(expr.obj, env, shadow)
            index, prov_i = self._eval(expr.index, env, shadow)
            return self._index(obj, index, expr.line), prov_o | prov_i
        if isinstance(expr, A.Call):
            return self._call_expr(expr, env, shadow)
        if isinstance(expr, A.UnaryOp):
            value, prov = self._eval(expr.operand, env, shadow)
            if expr.op == "not":
                return (not _truthy(value)), prov
            if not _is_number(value):
                raise self._err(f"unary '-' needs a number, got {type_name(value)}", expr.line)
            return -value, prov
        if isinstance(expr, A.BinOp):
            left, prov_l = self._eval(expr.left, env, shadow)
            right, prov_r = self._eval(expr.right, env, shadow)
            return self._binop(expr.op, left, right, expr.line), prov_l | prov_r
        if isinstance(expr, A.Compare):
            left, prov_l = self._eval(expr.left, env, shadow)
            right, prov_r = self._eval(expr.right, env, shadow)
            return self._compare(expr.op, left, right, expr.line), prov_l | prov_r
        if isinstance(expr, A.BoolOp):
            left, prov_l = self._eval(expr.left, env, shadow)
            if expr.op == "and":
                if not _truthy(left):
                    return left, prov_l
            else:
                if _truthy(left):
                    return left, prov_l
            right, prov_r = self._eval(expr.right, env, shadow)
            return right, prov_l | prov_r
        raise self._err(f"unknown expression {type(expr).__name__}", getattr(expr, "line", 0))

    def _call_expr(self, expr: A.Call, env: dict, shadow: dict | None) -> tuple[Any, Prov]:
        args: list[Any] = []
        provs: list[Prov] = []
        for arg_expr in expr.args:
            value, prov = self._eval(arg_expr, env, shadow)
            args.append(value)
            provs.append(prov)
        target = self.functions.get(expr.func)
        if target is not None:
            if len(args) != len(target.params):
                raise self._err(
                    f"{expr.func}() takes {len(target.params)} argument(s), got {len(args)}",
                    expr.line,
                )
            result = self._exec_function(target, args)
            merged: Prov = frozenset().union(*provs) if provs else _EMPTY
            if (
                shadow is not None
                and self.tracer is not None
                and target.trainable
            ):
                node_id = self.tracer.record_trainable_call(expr.func, merged, result)
                return result, frozenset([node_id])
            return result, merged
        return self._builtin(expr.func, args, provs, expr.line)

    # -- operators and builtins ---------------------------------------------

    def _attribute(self, obj: Any, field: str, line: int) -> Any:
        if isinstance(obj, ObjectView):
            if field in _OBJECT_FIELDS:
                return obj.get(field)
            raise self._err(
                f"object has no field {field!r} (fields: {', '.join(_OBJECT_FIELDS)})", line
            )
        if isinstance(obj, ObservationView):
            if field == "lives":
                return obj.lives
            if field == "score":
                return obj.score
            raise self._err(f"observation has no field {field!r} (fields: lives, score)", line)
        raise self._err(f"cannot read field {field!r} of {type_name(obj)}", line)

    def _index(self, obj: Any, index: Any, line: int) -> Any:
        if isinstance(obj, ObservationView):
            if not isinstance(index, str):
                raise self._err(
                    f"observation lookup needs a string label, got {type_name(index)}", line
                )
            if not obj.has(index):
                raise self._err(f"no object labeled {index!r} in the observation", line)
            return obj.lookup(index)
        if isinstance(obj, tuple):
            if not _is_number(index) or index != int(index):
                raise self._err("list index must be a whole number", line)
            i = int(index)
            if i < 0 or i >= len(obj):
                raise self._err(f"list index {i} out of range (length {len(obj)})", line)
            return obj[i]
        raise self._err(f"cannot index into {type_name(obj)}", line)

    def _binop(self, op: str, left: Any, right: Any, line: int) -> float:
        if not _is_number(left) or not _is_number(right):
            raise self._err(
                f"'{op}' needs numbers, got {type_name(left)} and {type_name(right)}", line
            )
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if right == 0.0:
                raise self._err("division by zero", line)
            return left / right
        if op == "%":
            if right == 0.0:
                raise self._err("modulo by zero", line)
            return math.fmod(math.fmod(left, right) + right, right)
        raise self._err(f"unknown operator {op!r}", line)

    def _compare(self, op: str, left: Any, right: Any, line: int) -> bool:
        if op in ("==", "!="):
            equal = self._values_equal(left, right)
            return equal if op == "==" else not equal
        if op in ("<", "<=", ">", ">="):
            if not _is_number(left) or not _is_number(right):
                raise self._err(
                    f"'{op}' needs numbers, got {type_name(left)} and {type_name(right)}", line
                )
            return {"<": left < right, "<=": left <= right, ">": left > right, ">=": left >= right}[op]
        if op in ("in", "not in"):
            found = self._membership(left, right, line)
            return found if op == "in" else not found
        raise self._err(f"unknown comparison {op!r}", line)

    @staticmethod
    def _values_equal(left: Any, right: Any) -> bool:
        if left is None or right is None:
            return left is None and right is None
        if isinstance(left, bool) or isinstance(right, bool):
            return isinstance(left, bool) and isinstance(right, bool) and left == right
        if _is_number(left) and _is_number(right):
            return left == right
        if type(left) is not type(right):
            return False
        return left == right

    def _membership(self, needle: Any, haystack: Any, line: int) -> bool:
        if isinstance(haystack, ObservationView):
            if not isinstance(needle, str):
                raise self._err(
                    f"observation membership needs a string label, got {type_name(needle)}", line
                )
            return haystack.has(needle)
        if isinstance(haystack, tuple):
            return any(self._values_equal(needle, item) for item in haystack)
        raise self._err(f"'in' needs a list or observation, got {type_name(haystack)}", line)

    def _builtin(self, name: str, args: list[Any], provs: list[Prov], line: int) -> tuple[Any, Prov]:
        prov: Prov = frozenset().union(*provs) if provs else _EMPTY
        if name == "abs":
            (value,) = args
            if not _is_number(value):
                raise self._err(f"abs() needs a number, got {type_name(value)}", line)
            return abs(value), prov
        if name == "floor":
            (value,) = args
            if not _is_number(value):
                raise self._err(f"floor() needs a number, got {type_name(value)}", line)
            return float(math.floor(value)), prov
        if name == "len":
            (value,) = args
            if isinstance(value, tuple):
                return float(len(value)), prov
            if isinstance(value, ObservationView):
                return float(value.count()), prov
            raise self._err(f"len() needs a list or observation, got {type_name(value)}", line)
        if name in ("min", "max"):
            values = args
            if len(args) == 1 and isinstance(args[0], tuple):
                values = list(args[0])
            if not values:
                raise self._err(f"{name}() of an empty list", line)
            for value in values:
                if not _is_number(value):
                    raise self._err(f"{name}() needs numbers, got {type_name(value)}", line)
            return (min(values) if name == "min" else max(values)), prov
        if name == "starts_with":
            text, prefix = args
            if not isinstance(text, str) or not isinstance(prefix, str):
                raise self._err(
                    f"starts_with() needs two strings, got {type_name(text)} and {type_name(prefix)}",
                    line,
                )
            return text.startswith(prefix), prov
        if name == "random_choice":
            (value,) = args
            if not isinstance(value, tuple):
                raise self._err(f"random_choice() needs a list, got {type_name(value)}", line)
            if not value:
                raise self._err("random_choice() of an empty list", line)
            return value[self.rng.randrange(len(value))], prov
        if name == "random_uniform":
            return self.rng.random(), prov
        raise self._err(f"call to undeclared function {name!r}", line)


def evaluate(
    program: A.PolicyProgram,
    function: str,
    args: list[Any],
    step_budget: int = DEFAULT_STEP_BUDGET,
    rng_seed: int = 0,
) -> Any:
    """Run one function of a program under a fresh interpreter and budget."""
    return Interpreter(program, step_budget=step_budget, rng_seed=rng_seed).call(function, args)
