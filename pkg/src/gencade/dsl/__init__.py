"""Sandboxed policy language: parser, formatter, interpreter, metrics."""

from .ast import ENTRY_FUNCTION, FunctionDef, PolicyProgram
from .errors import BudgetExceededError, DslError, ParseError, PolicyRuntimeError
from .formatter import format_function, format_function_body, format_program
from .interface import FunctionSpec, validate_interface
from .interpreter import (
    DEFAULT_STEP_BUDGET,
    Interpreter,
    ObjectView,
    ObservationView,
    Tracer,
    evaluate,
)
from .metrics import CodeMetrics, metrics
from .parser import parse, parse_function_body

__all__ = [
    "ENTRY_FUNCTION",
    "FunctionDef",
    "PolicyProgram",
    "BudgetExceededError",
    "DslError",
    "ParseError",
    "PolicyRuntimeError",
    "format_function",
    "format_function_body",
    "format_program",
    "FunctionSpec",
    "validate_interface",
    "DEFAULT_STEP_BUDGET",
    "Interpreter",
    "ObjectView",
    "ObservationView",
    "Tracer",
    "evaluate",
    "metrics",
    "CodeMetrics",
    "parse",
    "parse_function_body",
]
