"""Tokenizer for the script language."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import LexError
from ..names import KEYWORDS

KW = "KW"
IDENT = "IDENT"
INT = "INT"
FLOAT = "FLOAT"
STRING = "STRING"
OP = "OP"
EOF = "EOF"

TWO_CHAR_OPS = ("->", "==", "!=", "<=", ">=")
ONE_CHAR_OPS = set(".,;:()<>+-*/=#[]")

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == EOF:
            return "end of input"
        if self.kind in (KW, OP):
            return repr(self.value)
        return f"{self.kind.lower()} {self.value!r}"


def _is_ident_start(c):
    return c == "_" or ("a" <= c <= "z") or ("A" <= c <= "Z")


def _is_ident_char(c):
    return _is_ident_start(c) or ("0" <= c <= "9")


def _is_digit(c):
    return "0" <= c <= "9"


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens; the list always ends with an EOF token."""
    tokens = []
    i, n = 0, len(text)
    line, line_start = 1, 0

    while i < n:
        c = text[i]
        col = i - line_start + 1
        if c == "\n":
            i += 1
            line, line_start = line + 1, i
            continue
        if c in " \t\r":
            i += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if _is_ident_start(c):
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            tokens.append(Token(KW if word in KEYWORDS else IDENT, word, line, col))
            i = j
            continue
        if _is_digit(c):
            j = i
            while j < n and _is_digit(text[j]):
                j += 1
            is_float = False
            if j + 1 < n and text[j] == "." and _is_digit(text[j + 1]):
                is_float = True
                j += 1
                while j < n and _is_digit(text[j]):
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and _is_digit(text[k]):
                    is_float = True
                    j = k
                    while j < n and _is_digit(text[j]):
                        j += 1
            lexeme = text[i:j]
            if is_float:
                value = float(lexeme)
                if not math.isfinite(value):
                    raise LexError(f"number {lexeme} is out of range", line, col)
                tokens.append(Token(FLOAT, value, line, col))
            else:
                tokens.append(Token(INT, int(lexeme), line, col))
            i = j
            continue
        if c == '"':
            j = i + 1
            chars = []
            start_line, start_col = line, col
            while True:
                if j >= n:
                    raise LexError("unterminated string", start_line, start_col)
                d = text[j]
                if d == '"':
                    break
                if d == "\\":
                    if j + 1 >= n:
                        raise LexError("unterminated string", start_line, start_col)
                    esc = text[j + 1]
                    if esc not in _ESCAPES:
                        raise LexError(f"invalid escape \\{esc}", line, j - line_start + 1)
                    chars.append(_ESCAPES[esc])
                    j += 2
                    continue
                if d == "\n":
                    line, line_start = line + 1, j + 1
                chars.append(d)
                j += 1
            tokens.append(Token(STRING, "".join(chars), start_line, start_col))
            i = j + 1
            continue
        two = text[i:i + 2]
        if two in TWO_CHAR_OPS:
            tokens.append(Token(OP, two, line, col))
            i += 2
            continue
        if c in ONE_CHAR_OPS:
            tokens.append(Token(OP, c, line, col))
            i += 1
            continue
        raise LexError(f"illegal character {c!r}", line, col)

    tokens.append(Token(EOF, None, line, i - line_start + 1))
    return tokens
