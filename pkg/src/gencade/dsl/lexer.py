"""Lexer for the policy language.

Indentation-sensitive, Python-style: emits NEWLINE at logical line ends and
INDENT/DEDENT tokens from a stack of indentation widths. Newlines inside
brackets are ignored so long expressions can wrap. Only spaces may indent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

KEYWORDS = frozenset(
    [
        "fn",
        "trainable",
        "if",
        "elif",
        "else",
        "while",
        "for",
        "in",
        "return",
        "and",
        "or",
        "not",
        "true",
        "false",
        "none",
    ]
)

# Multi-char operators first so the scanner prefers the longest match.
OPERATORS = ["==", "!=", "<=", ">=", "+", "-", "*", "/", "%", "<", ">", "=", "(", ")", "[", "]", ",", ".", ":"]

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"', "'": "'"}


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, KEYWORD, NUMBER, STRING, OP, NEWLINE, INDENT, DEDENT, EOF
    value: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    indents = [0]
    line = 1
    col = 1
    i = 0
    n = len(source)
    depth = 0  # bracket nesting; newlines are invisible while > 0
    at_line_start = True
    emitted_any = False  # whether the current logical line has content

    def err(msg: str) -> ParseError:
        return ParseError(msg, line, col)

    while i < n:
        ch = source[i]

        if at_line_start and depth == 0:
            # Measure indentation, skipping blank and comment-only lines.
            width = 0
            j = i
            while j < n and source[j] == " ":
                width += 1
                j += 1
            if j < n and source[j] == "\t":
                raise ParseError("tab characters may not indent policy code", line, width + 1)
            if j >= n or source[j] == "\n" or source[j] == "#":
                # Blank/comment line: consume up to and including newline.
                while j < n and source[j] != "\n":
                    j += 1
                if j < n:
                    j += 1
                    line += 1
                i = j
                col = 1
                continue
            if width > indents[-1]:
                indents.append(width)
                tokens.append(Token("INDENT", "", line, 1))
            else:
                while width < indents[-1]:
                    indents.pop()
                    tokens.append(Token("DEDENT", "", line, 1))
                if width != indents[-1]:
                    raise ParseError("unindent does not match any outer level", line, 1)
            i = j
            col = width + 1
            at_line_start = False
            emitted_any = False
            continue

        if ch == "\n":
            if depth == 0:
                if emitted_any:
                    tokens.append(Token("NEWLINE", "", line, col))
                at_line_start = True
            i += 1
            line += 1
            col = 1
            continue

        if ch in " \t":
            i += 1
            col += 1
            continue

        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue

        if ch == '"' and source.startswith('"""', i):
            start_line, start_col = line, col
            i += 3
            col += 3
            buf: list[str] = []
            while i < n and not source.startswith('"""', i):
                if source[i] == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
                buf.append(source[i])
                i += 1
            if i >= n:
                raise ParseError("unterminated triple-quoted string", start_line, start_col)
            i += 3
            col += 3
            text = "".join(buf)
            if '"""' in text:
                raise ParseError("nested triple quotes are not allowed", start_line, start_col)
            tokens.append(Token("STRING", text, start_line, start_col))
            emitted_any = True
            continue

        if ch in "\"'":
            quote = ch
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while i < n and source[i] != quote:
                c = source[i]
                if c == "\n":
                    raise ParseError("unterminated string literal", start_line, start_col)
                if c == "\\":
                    if i + 1 >= n:
                        raise ParseError("bad escape at end of input", line, col)
                    esc = source[i + 1]
                    if esc not in _ESCAPES:
                        raise ParseError(f"unsupported escape sequence \\{esc}", line, col)
                    buf.append(_ESCAPES[esc])
                    i += 2
                    col += 2
                    continue
                buf.append(c)
                i += 1
                col += 1
            if i >= n:
                raise ParseError("unterminated string literal", start_line, start_col)
            i += 1
            col += 1
            tokens.append(Token("STRING", "".join(buf), start_line, start_col))
            emitted_any = True
            continue

        if ch.isdigit():
            start_col = col
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            tokens.append(Token("NUMBER", source[i:j], line, start_col))
            col += j - i
            i = j
            emitted_any = True
            continue

        if ch.isalpha() or ch == "_":
            start_col = col
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = "KEYWORD" if word in KEYWORDS else "NAME"
            tokens.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            emitted_any = True
            continue

        for op in OPERATORS:
            if source.startswith(op, i):
                if op in "([":
                    depth += 1
                elif op in ")]":
                    if depth == 0:
                        raise err(f"unmatched '{op}'")
                    depth -= 1
                tokens.append(Token("OP", op, line, col))
                i += len(op)
                col += len(op)
                emitted_any = True
                break
        else:
            raise err(f"unexpected character {ch!r}")

    if depth > 0:
        raise ParseError("unclosed bracket at end of input", line, col)
    if emitted_any and not at_line_start:
        tokens.append(Token("NEWLINE", "", line, col))
    while len(indents) > 1:
        indents.pop()
        tokens.append(Token("DEDENT", "", line, 1))
    tokens.append(Token("EOF", "", line, 1))
    return tokens
