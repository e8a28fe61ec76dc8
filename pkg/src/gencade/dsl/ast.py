"""AST node definitions for the policy language.

All nodes are frozen dataclasses. Structural equality deliberately ignores
source line numbers (``compare=False``) so that parse(format(p)) == p holds
even though formatting reassigns lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

ENTRY_FUNCTION = "policy"


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Num:
    value: float
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Str:
    value: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Bool:
    value: bool
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class NoneLit:
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Name:
    ident: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ListLit:
    items: tuple["Expr", ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Attribute:
    """Field access on a game object or observation, e.g. ``ball.dy``."""

    obj: "Expr"
    field_name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Index:
    """Subscript, e.g. ``obs["Ball"]`` or ``items[0]``."""

    obj: "Expr"
    index: "Expr"
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    """Call of a declared function or builtin by name."""

    func: str
    args: tuple["Expr", ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "-" | "not"
    operand: "Expr"
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" | "-" | "*" | "/" | "%"
    left: "Expr"
    right: "Expr"
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Compare:
    op: str  # "==" | "!=" | "<" | "<=" | ">" | ">=" | "in" | "not in"
    left: "Expr"
    right: "Expr"
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or"
    left: "Expr"
    right: "Expr"
    line: int = field(default=0, compare=False)


Expr = Union[
    Num, Str, Bool, NoneLit, Name, ListLit, Attribute, Index, Call, UnaryOp, BinOp, Compare, BoolOp
]


# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Return:
    value: Expr  # parser normalizes bare ``return`` to ``return none``
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ExprStmt:
    value: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class IfArm:
    condition: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class If:
    """One if/elif*/else* statement; elif chains are arms of a single node."""

    arms: tuple[IfArm, ...]
    orelse: tuple["Stmt", ...]  # empty tuple when no else clause
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    condition: Expr
    body: tuple["Stmt", ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class For:
    """``for x in expr`` or ``for label, obj in expr`` iteration."""

    targets: tuple[str, ...]  # one or two loop variables
    iterable: Expr
    body: tuple["Stmt", ...]
    line: int = field(default=0, compare=False)


Stmt = Union[Assign, Return, ExprStmt, If, While, For]


# ---------------------------------------------------------------------------
# Functions and programs


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]
    docstring: str | None = None
    trainable: bool = False
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PolicyProgram:
    """A complete policy: a set of named functions with a ``policy`` entry.

    Guaranteed by the parser: function names are unique, the entry exists
    and is not trainable, all referenced names resolve, call arities match,
    and the call graph is acyclic.
    """

    functions: tuple[FunctionDef, ...]

    def function(self, name: str) -> FunctionDef:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    @property
    def entry(self) -> FunctionDef:
        return self.function(ENTRY_FUNCTION)

    @property
    def trainable_functions(self) -> tuple[FunctionDef, ...]:
        return tuple(fn for fn in self.functions if fn.trainable)

    def trainable_names(self) -> tuple[str, ...]:
        return tuple(fn.name for fn in self.trainable_functions)

    def replace_function(self, new_fn: FunctionDef) -> "PolicyProgram":
        replaced = tuple(new_fn if fn.name == new_fn.name else fn for fn in self.functions)
        return PolicyProgram(functions=replaced)
