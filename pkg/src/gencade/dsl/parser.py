"""Recursive-descent parser and static checks for the policy language.

parse() returns a PolicyProgram or raises ParseError. Static guarantees:

- function names are unique; the ``policy`` entry exists and is not trainable
- every name reference resolves to a parameter, loop variable, or local
  assigned somewhere in the same function (flow-insensitive)
- calls target declared functions or builtins with matching arity; the entry
  function may call only declared functions
- the call graph is acyclic (no direct or mutual recursion)
- locals may not shadow function or builtin names
"""

from __future__ import annotations

from . import ast as A
from .errors import ParseError
from .lexer import Token, tokenize

# name -> (min_arity, max_arity); None means unbounded
BUILTIN_ARITIES: dict[str, tuple[int, int | None]] = {
    "abs": (1, 1),
    "floor": (1, 1),
    "len": (1, 1),
    "min": (1, None),
    "max": (1, None),
    "starts_with": (2, 2),
    "random_choice": (1, 1),
    "random_uniform": (0, 0),
}

BUILTINS = frozenset(BUILTIN_ARITIES)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers ------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def check(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def match(self, kind: str, value: str | None = None) -> Token | None:
        if self.check(kind, value):
            return self.advance()
        return None

    def expect(self, kind: str, value: str | None = None, what: str = "") -> Token:
        tok = self.peek()
        if not self.check(kind, value):
            expected = what or value or kind.lower()
            found = tok.value or tok.kind.lower()
            raise ParseError(f"expected {expected}, found {found!r}", tok.line, tok.col)
        return self.advance()

    # -- grammar ------------------------------------------------------

    def parse_program(self) -> A.PolicyProgram:
        functions: list[A.FunctionDef] = []
        while not self.check("EOF"):
            if self.match("NEWLINE"):
                continue
            functions.append(self.parse_function())
        if not functions:
            raise ParseError("program contains no functions", self.peek().line, 1)
        return A.PolicyProgram(functions=tuple(functions))

    def parse_function(self) -> A.FunctionDef:
        start = self.expect("KEYWORD", "fn", what="'fn'")
        name = self.expect("NAME", what="function name").value
        self.expect("OP", "(")
        params: list[str] = []
        if not self.check("OP", ")"):
            while True:
                params.append(self.expect("NAME", what="parameter name").value)
                if not self.match("OP", ","):
                    break
        self.expect("OP", ")")
        trainable = self.match("KEYWORD", "trainable") is not None
        self.expect("OP", ":")
        self.expect("NEWLINE")
        if len(set(params)) != len(params):
            raise ParseError(f"duplicate parameter in {name}()", start.line, start.col)

        docstring: str | None = None
        body: tuple[A.Stmt, ...] = ()
        if self.match("INDENT"):
            if self.check("STRING"):
                docstring = self.advance().value
                self.expect("NEWLINE")
            stmts: list[A.Stmt] = []
            while not self.check("DEDENT") and not self.check("EOF"):
                stmts.append(self.parse_statement())
            self.expect("DEDENT")
            body = tuple(stmts)
        return A.FunctionDef(
            name=name,
            params=tuple(params),
            body=body,
            docstring=docstring,
            trainable=trainable,
            line=start.line,
        )

    def parse_block(self) -> tuple[A.Stmt, ...]:
        self.expect("OP", ":")
        self.expect("NEWLINE")
        self.expect("INDENT", what="an indented block")
        stmts: list[A.Stmt] = []
        while not self.check("DEDENT") and not self.check("EOF"):
            stmts.append(self.parse_statement())
        self.expect("DEDENT")
        if not stmts:
            tok = self.peek()
            raise ParseError("empty block", tok.line, tok.col)
        return tuple(stmts)

    def parse_statement(self) -> A.Stmt:
        tok = self.peek()
        if tok.kind == "KEYWORD":
            if tok.value == "if":
                return self.parse_if()
            if tok.value == "while":
                self.advance()
                cond = self.parse_expr()
                body = self.parse_block()
                return A.While(condition=cond, body=body, line=tok.line)
            if tok.value == "for":
                return self.parse_for()
            if tok.value == "return":
                self.advance()
                if self.check("NEWLINE"):
                    value: A.Expr = A.NoneLit(line=tok.line)
                else:
                    value = self.parse_expr()
                self.expect("NEWLINE")
                return A.Return(value=value, line=tok.line)
        # Assignment or bare expression.
        if tok.kind == "NAME" and self.peek(1).kind == "OP" and self.peek(1).value == "=":
            self.advance()
            self.advance()
            value = self.parse_expr()
            self.expect("NEWLINE")
            return A.Assign(target=tok.value, value=value, line=tok.line)
        value = self.parse_expr()
        self.expect("NEWLINE")
        return A.ExprStmt(value=value, line=tok.line)

    def parse_if(self) -> A.If:
        start = self.expect("KEYWORD", "if")
        arms = [A.IfArm(condition=self.parse_expr(), body=self.parse_block())]
        orelse: tuple[A.Stmt, ...] = ()
        while self.check("KEYWORD", "elif"):
            self.advance()
            arms.append(A.IfArm(condition=self.parse_expr(), body=self.parse_block()))
        if self.match("KEYWORD", "else"):
            orelse = self.parse_block()
        return A.If(arms=tuple(arms), orelse=orelse, line=start.line)

    def parse_for(self) -> A.For:
        start = self.expect("KEYWORD", "for")
        targets = [self.expect("NAME", what="loop variable").value]
        if self.match("OP", ","):
            targets.append(self.expect("NAME", what="loop variable").value)
        self.expect("KEYWORD", "in", what="'in'")
        iterable = self.parse_expr()
        body = self.parse_block()
        if len(set(targets)) != len(targets):
            raise ParseError("duplicate loop variable", start.line, start.col)
        return A.For(targets=tuple(targets), iterable=iterable, body=body, line=start.line)

    # Expressions, lowest to highest precedence.

    def parse_expr(self) -> A.Expr:
        return self.parse_or()

    def parse_or(self) -> A.Expr:
        left = self.parse_and()
        while self.check("KEYWORD", "or"):
            tok = self.advance()
            left = A.BoolOp(op="or", left=left, right=self.parse_and(), line=tok.line)
        return left

    def parse_and(self) -> A.Expr:
        left = self.parse_not()
        while self.check("KEYWORD", "and"):
            tok = self.advance()
            left = A.BoolOp(op="and", left=left, right=self.parse_not(), line=tok.line)
        return left

    def parse_not(self) -> A.Expr:
        if self.check("KEYWORD", "not") and not (
            self.peek(1).kind == "KEYWORD" and self.peek(1).value == "in"
        ):
            tok = self.advance()
            return A.UnaryOp(op="not", operand=self.parse_not(), line=tok.line)
        return self.parse_comparison()

    def parse_comparison(self) -> A.Expr:
        left = self.parse_arith()
        tok = self.peek()
        if tok.kind == "OP" and tok.value in ("==", "!=", "<", "<=", ">", ">="):
            self.advance()
            return A.Compare(op=tok.value, left=left, right=self.parse_arith(), line=tok.line)
        if tok.kind == "KEYWORD" and tok.value == "in":
            self.advance()
            return A.Compare(op="in", left=left, right=self.parse_arith(), line=tok.line)
        if tok.kind == "KEYWORD" and tok.value == "not":
            self.advance()
            self.expect("KEYWORD", "in", what="'in' after 'not'")
            return A.Compare(op="not in", left=left, right=self.parse_arith(), line=tok.line)
        return left

    def parse_arith(self) -> A.Expr:
        left = self.parse_term()
        while self.check("OP", "+") or self.check("OP", "-"):
            tok = self.advance()
            left = A.BinOp(op=tok.value, left=left, right=self.parse_term(), line=tok.line)
        return left

    def parse_term(self) -> A.Expr:
        left = self.parse_factor()
        while self.check("OP", "*") or self.check("OP", "/") or self.check("OP", "%"):
            tok = self.advance()
            left = A.BinOp(op=tok.value, left=left, right=self.parse_factor(), line=tok.line)
        return left

    def parse_factor(self) -> A.Expr:
        if self.check("OP", "-"):
            tok = self.advance()
            return A.UnaryOp(op="-", operand=self.parse_factor(), line=tok.line)
        return self.parse_postfix()

    def parse_postfix(self) -> A.Expr:
        expr = self.parse_atom()
        while True:
            if self.check("OP", "."):
                tok = self.advance()
                field = self.expect("NAME", what="field name").value
                expr = A.Attribute(obj=expr, field_name=field, line=tok.line)
            elif self.check("OP", "["):
                tok = self.advance()
                index = self.parse_expr()
                self.expect("OP", "]")
                expr = A.Index(obj=expr, index=index, line=tok.line)
            else:
                return expr

    def parse_atom(self) -> A.Expr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return A.Num(value=float(tok.value), line=tok.line)
        if tok.kind == "STRING":
            self.advance()
            return A.Str(value=tok.value, line=tok.line)
        if tok.kind == "KEYWORD" and tok.value in ("true", "false"):
            self.advance()
            return A.Bool(value=tok.value == "true", line=tok.line)
        if tok.kind == "KEYWORD" and tok.value == "none":
            self.advance()
            return A.NoneLit(line=tok.line)
        if tok.kind == "NAME":
            self.advance()
            if self.check("OP", "("):
                self.advance()
                args: list[A.Expr] = []
                if not self.check("OP", ")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.match("OP", ","):
                            break
                self.expect("OP", ")")
                return A.Call(func=tok.value, args=tuple(args), line=tok.line)
            return A.Name(ident=tok.value, line=tok.line)
        if tok.kind == "OP" and tok.value == "(":
            self.advance()
            expr = self.parse_expr()
            self.expect("OP", ")")
            return expr
        if tok.kind == "OP" and tok.value == "[":
            self.advance()
            items: list[A.Expr] = []
            if not self.check("OP", "]"):
                while True:
                    items.append(self.parse_expr())
                    if not self.match("OP", ","):
                        break
            self.expect("OP", "]")
            return A.ListLit(items=tuple(items), line=tok.line)
        found = tok.value or tok.kind.lower()
        raise ParseError(f"expected an expression, found {found!r}", tok.line, tok.col)


# ---------------------------------------------------------------------------
# Static semantic checks


def _walk_exprs(expr: A.Expr):
    yield expr
    if isinstance(expr, A.ListLit):
        for item in expr.items:
            yield from _walk_exprs(item)
    elif isinstance(expr, A.Attribute):
        yield from _walk_exprs(expr.obj)
    elif isinstance(expr, A.Index):
        yield from _walk_exprs(expr.obj)
        yield from _walk_exprs(expr.index)
    elif isinstance(expr, A.Call):
        for arg in expr.args:
            yield from _walk_exprs(arg)
    elif isinstance(expr, A.UnaryOp):
        yield from _walk_exprs(expr.operand)
    elif isinstance(expr, (A.BinOp, A.Compare, A.BoolOp)):
        yield from _walk_exprs(expr.left)
        yield from _walk_exprs(expr.right)


def _walk_stmts(body):
    for stmt in body:
        yield stmt
        if isinstance(stmt, A.If):
            for arm in stmt.arms:
                yield from _walk_stmts(arm.body)
            yield from _walk_stmts(stmt.orelse)
        elif isinstance(stmt, (A.While, A.For)):
            yield from _walk_stmts(stmt.body)


def iter_function_exprs(fn: A.FunctionDef):
    for stmt in _walk_stmts(fn.body):
        if isinstance(stmt, (A.Assign, A.Return, A.ExprStmt)):
            yield from _walk_exprs(stmt.value)
        elif isinstance(stmt, A.If):
            for arm in stmt.arms:
                yield from _walk_exprs(arm.condition)
        elif isinstance(stmt, A.While):
            yield from _walk_exprs(stmt.condition)
        elif isinstance(stmt, A.For):
            yield from _walk_exprs(stmt.iterable)


def _validate(program: A.PolicyProgram) -> None:
    names = [fn.name for fn in program.functions]
    seen: set[str] = set()
    for fn in program.functions:
        if fn.name in seen:
            raise ParseError(f"duplicate function name {fn.name!r}", fn.line)
        seen.add(fn.name)
        if fn.name in BUILTINS:
            raise ParseError(f"function name {fn.name!r} shadows a builtin", fn.line)

    if A.ENTRY_FUNCTION not in seen:
        raise ParseError(f"program must define the entry function {A.ENTRY_FUNCTION!r}")
    entry = program.entry
    if entry.trainable:
        raise ParseError(f"the entry function {A.ENTRY_FUNCTION!r} may not be trainable", entry.line)

    declared = {fn.name: len(fn.params) for fn in program.functions}
    calls: dict[str, set[str]] = {name: set() for name in names}

    for fn in program.functions:
        local: set[str] = set(fn.params)
        for stmt in _walk_stmts(fn.body):
            if isinstance(stmt, A.Assign):
                local.add(stmt.target)
            elif isinstance(stmt, A.For):
                local.update(stmt.targets)
        clash = local & (set(declared) | BUILTINS)
        if clash:
            raise ParseError(
                f"local name {sorted(clash)[0]!r} in {fn.name}() shadows a function", fn.line
            )
        for expr in iter_function_exprs(fn):
            if isinstance(expr, A.Name):
                if expr.ident not in local:
                    raise ParseError(
                        f"unknown name {expr.ident!r} in {fn.name}()", expr.line
                    )
            elif isinstance(expr, A.Call):
                target = expr.func
                nargs = len(expr.args)
                if target in declared:
                    calls[fn.name].add(target)
                    if nargs != declared[target]:
                        raise ParseError(
                            f"{target}() takes {declared[target]} argument(s), got {nargs}"
                            f" in {fn.name}()",
                            expr.line,
                        )
                elif target in BUILTIN_ARITIES:
                    if fn.name == A.ENTRY_FUNCTION:
                        raise ParseError(
                            f"the entry function may only call declared functions,"
                            f" not builtin {target!r}",
                            expr.line,
                        )
                    lo, hi = BUILTIN_ARITIES[target]
                    if nargs < lo or (hi is not None and nargs > hi):
                        raise ParseError(
                            f"builtin {target}() does not accept {nargs} argument(s)"
                            f" in {fn.name}()",
                            expr.line,
                        )
                else:
                    raise ParseError(
                        f"call to undeclared function {target!r} in {fn.name}()", expr.line
                    )

    # Reject recursion: the call graph over declared functions must be acyclic.
    visiting: set[str] = set()
    done: set[str] = set()

    def visit(node: str, path: list[str]) -> None:
        if node in done:
            return
        if node in visiting:
            cycle = " -> ".join(path + [node])
            raise ParseError(f"recursive call cycle: {cycle}")
        visiting.add(node)
        for nxt in sorted(calls[node]):
            visit(nxt, path + [node])
        visiting.discard(node)
        done.add(node)

    for name in names:
        visit(name, [])


def parse(source: str) -> A.PolicyProgram:
    """Parse policy source text, raising ParseError on any violation."""
    program = _Parser(tokenize(source)).parse_program()
    _validate(program)
    return program


def parse_function_body(
    body_source: str, name: str, params: tuple[str, ...], trainable: bool = True
) -> A.FunctionDef:
    """Parse replacement source for a single function body.

    The body text is dedented, tokenized on its own, and spliced after a
    synthetic signature at the token level (so multi-line strings survive
    untouched). Cross-function checks happen later when the candidate is
    spliced into a full program.
    """
    lines = body_source.splitlines()
    stripped = [ln for ln in lines if ln.strip()]
    if not stripped:
        raise ParseError("replacement body is empty")
    margin = min(len(ln) - len(ln.lstrip(" ")) for ln in stripped)
    dedented = "\n".join(ln[margin:] if ln.strip() else "" for ln in lines)

    flag = " trainable" if trainable else ""
    # tokenize() appends a NEWLINE before EOF, so the header already ends
    # with the NEWLINE the parser expects after the signature colon.
    header = tokenize(f"fn {name}({', '.join(params)}){flag}:")[:-1]  # drop EOF
    body_tokens = tokenize(dedented)[:-1]  # drop EOF; DEDENTs already balanced
    if not body_tokens:
        raise ParseError("replacement body is empty")
    last_line = body_tokens[-1].line
    spliced = (
        header
        + [Token("INDENT", "", 2, 1)]
        + body_tokens
        + [Token("DEDENT", "", last_line + 1, 1), Token("EOF", "", last_line + 1, 1)]
    )
    parser = _Parser(spliced)
    fn = parser.parse_function()
    if not parser.check("EOF"):
        tok = parser.peek()
        raise ParseError("unexpected trailing content after function body", tok.line, tok.col)
    return fn
