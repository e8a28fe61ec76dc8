"""Canonical, deterministic pretty-printer for policy programs.

The formatter is the inverse of the parser: parse(format_program(p)) == p
structurally for every valid program. Canonical form uses 4-space indents,
one blank line between functions, minimal parentheses, and prints an empty
function body as ``return none``.
"""

from __future__ import annotations

from . import ast as A

INDENT = "    "

# Higher binds tighter. Used to decide where parentheses are required.
_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_CMP = 4
_PREC_ADD = 5
_PREC_MUL = 6
_PREC_UNARY = 7
_PREC_ATOM = 8


def _precedence(expr: A.Expr) -> int:
    if isinstance(expr, A.BoolOp):
        return _PREC_OR if expr.op == "or" else _PREC_AND
    if isinstance(expr, A.UnaryOp):
        return _PREC_NOT if expr.op == "not" else _PREC_UNARY
    if isinstance(expr, A.Compare):
        return _PREC_CMP
    if isinstance(expr, A.BinOp):
        return _PREC_ADD if expr.op in ("+", "-") else _PREC_MUL
    return _PREC_ATOM


def format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def format_expr(expr: A.Expr) -> str:
    if isinstance(expr, A.Num):
        return format_number(expr.value)
    if isinstance(expr, A.Str):
        return _quote(expr.value)
    if isinstance(expr, A.Bool):
        return "true" if expr.value else "false"
    if isinstance(expr, A.NoneLit):
        return "none"
    if isinstance(expr, A.Name):
        return expr.ident
    if isinstance(expr, A.ListLit):
        return "[" + ", ".join(format_expr(item) for item in expr.items) + "]"
    if isinstance(expr, A.Attribute):
        return f"{_child(expr.obj, _PREC_ATOM)}.{expr.field_name}"
    if isinstance(expr, A.Index):
        return f"{_child(expr.obj, _PREC_ATOM)}[{format_expr(expr.index)}]"
    if isinstance(expr, A.Call):
        return f"{expr.func}(" + ", ".join(format_expr(arg) for arg in expr.args) + ")"
    if isinstance(expr, A.UnaryOp):
        prec = _precedence(expr)
        inner = _child(expr.operand, prec)
        return f"not {inner}" if expr.op == "not" else f"-{inner}"
    if isinstance(expr, A.BinOp):
        prec = _precedence(expr)
        left = _child(expr.left, prec)
        # Same-precedence right child needs parens: ops are left-associative.
        right = _child(expr.right, prec + 1)
        return f"{left} {expr.op} {right}"
    if isinstance(expr, A.Compare):
        # Comparisons do not chain, so any comparison child must be wrapped.
        left = _child(expr.left, _PREC_CMP + 1)
        right = _child(expr.right, _PREC_CMP + 1)
        return f"{left} {expr.op} {right}"
    if isinstance(expr, A.BoolOp):
        prec = _precedence(expr)
        left = _child(expr.left, prec)
        right = _child(expr.right, prec + 1)
        return f"{left} {expr.op} {right}"
    raise TypeError(f"unknown expression node {type(expr).__name__}")


def _child(expr: A.Expr, minimum: int) -> str:
    text = format_expr(expr)
    if _precedence(expr) < minimum:
        return f"({text})"
    return text


def _format_stmt(stmt: A.Stmt, depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    if isinstance(stmt, A.Assign):
        out.append(f"{pad}{stmt.target} = {format_expr(stmt.value)}")
    elif isinstance(stmt, A.Return):
        out.append(f"{pad}return {format_expr(stmt.value)}")
    elif isinstance(stmt, A.ExprStmt):
        out.append(f"{pad}{format_expr(stmt.value)}")
    elif isinstance(stmt, A.If):
        for i, arm in enumerate(stmt.arms):
            word = "if" if i == 0 else "elif"
            out.append(f"{pad}{word} {format_expr(arm.condition)}:")
            for inner in arm.body:
                _format_stmt(inner, depth + 1, out)
        if stmt.orelse:
            out.append(f"{pad}else:")
            for inner in stmt.orelse:
                _format_stmt(inner, depth + 1, out)
    elif isinstance(stmt, A.While):
        out.append(f"{pad}while {format_expr(stmt.condition)}:")
        for inner in stmt.body:
            _format_stmt(inner, depth + 1, out)
    elif isinstance(stmt, A.For):
        targets = ", ".join(stmt.targets)
        out.append(f"{pad}for {targets} in {format_expr(stmt.iterable)}:")
        for inner in stmt.body:
            _format_stmt(inner, depth + 1, out)
    else:
        raise TypeError(f"unknown statement node {type(stmt).__name__}")


def _doc_lines(docstring: str, pad: str) -> str:
    # A trailing quote would glue onto the closing delimiter; buffer it.
    if docstring.endswith('"'):
        docstring += "\n"
    return f'{pad}"""{docstring}"""'


def format_function(fn: A.FunctionDef, include_docstring: bool = True) -> str:
    flag = " trainable" if fn.trainable else ""
    lines = [f"fn {fn.name}({', '.join(fn.params)}){flag}:"]
    if include_docstring and fn.docstring is not None:
        lines.append(_doc_lines(fn.docstring, INDENT))
    if fn.body:
        for stmt in fn.body:
            _format_stmt(stmt, 1, lines)
    else:
        lines.append(f"{INDENT}return none")
    return "\n".join(lines)


def format_function_body(fn: A.FunctionDef, include_docstring: bool = False) -> str:
    """The function's statements at margin zero (as used in rewrite blocks)."""
    lines: list[str] = []
    if include_docstring and fn.docstring is not None:
        lines.append(_doc_lines(fn.docstring, ""))
    if fn.body:
        for stmt in fn.body:
            _format_stmt(stmt, 0, lines)
    else:
        lines.append("return none")
    return "\n".join(lines)


def format_program(program: A.PolicyProgram, include_docstrings: bool = True) -> str:
    chunks = [format_function(fn, include_docstring=include_docstrings) for fn in program.functions]
    return "\n\n".join(chunks) + "\n"
