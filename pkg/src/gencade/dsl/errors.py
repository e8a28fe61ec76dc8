"""Errors raised by the policy-language toolchain.

Every error message is plain text suitable for inclusion in optimizer
feedback, so messages name the offending function and line where known.
"""

from __future__ import annotations


class DslError(Exception):
    """Base class for all policy-language errors."""


class ParseError(DslError):
    """Source text rejected by the lexer, parser, or static checks."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        if line:
            message = f"line {line}: {message}"
        super().__init__(message)


class PolicyRuntimeError(DslError):
    """Error raised while executing policy code (bad types, missing
    objects, division by zero, invalid builtin arguments, ...)."""

    def __init__(self, message: str, function: str = "?", line: int = 0):
        self.function = function
        self.line = line
        super().__init__(f"error in {function}() at line {line}: {message}")


class BudgetExceededError(DslError):
    """The interpreter ran out of execution steps.

    Deliberately distinct from PolicyRuntimeError: a blown budget usually
    means an unbounded loop rather than a type-level bug, and downstream
    feedback wants to say so.
    """

    def __init__(self, budget: int, function: str = "?", line: int = 0):
        self.function = function
        self.line = line
        super().__init__(
            f"execution budget of {budget} steps exceeded in {function}() at line {line}"
        )
