"""Recursive-descent parser; expressions use precedence climbing."""
from __future__ import annotations

import dataclasses

from .. import values as V
from ..errors import ParseError
from ..expr import Binary, Literal, Path, Unary
from ..values import Ref
from . import statements as S
from .lexer import EOF, FLOAT, IDENT, INT, KW, OP, STRING, Token, tokenize

# binding power of binary operators; higher binds tighter
PRECEDENCE = {
    "OR": 1,
    "AND": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}
MAX_DEPTH = 200

TYPE_KEYWORDS = ("INT", "FLOAT", "STR", "BOOL")
ACCUMULATORS = ("SUM", "COUNT", "MIN", "MAX", "AVG")


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0
        self.depth = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != EOF:
            self.i += 1
        return t

    def at(self, kind, value=None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def accept(self, kind, value=None):
        if self.at(kind, value):
            return self.advance()
        return None

    def fail(self, *expected):
        t = self.tok
        want = ", ".join(expected)
        raise ParseError(f"expected {want}, got {t.describe()}", t.line, t.col, expected)

    def expect(self, kind, value=None) -> Token:
        if self.at(kind, value):
            return self.advance()
        self.fail(repr(value) if value is not None else kind.lower())

    def ident(self) -> str:
        return self.expect(IDENT).value

    def op(self, value):
        return self.expect(OP, value)

    # statements

    def script(self) -> list[S.Statement]:
        out = []
        while not self.at(EOF):
            out.append(self.statement())
            self.op(";")
        return out

    def statement(self) -> S.Statement:
        t = self.tok
        if t.kind != KW:
            self.fail("statement keyword")
        handler = getattr(self, f"_stmt_{t.value}", None)
        if handler is None:
            self.fail("statement keyword")
        self.advance()
        return dataclasses.replace(handler(), pos=(t.line, t.col))

    def _stmt_SET(self):
        return S.SetDecl(self.ident())

    def _signature(self):
        name = self.ident()
        self.op(":")
        input = self.ident()
        self.op("->")
        return name, input

    def type_name(self) -> str:
        t = self.tok
        if t.kind == KW and t.value in TYPE_KEYWORDS:
            return self.advance().value
        if t.kind == IDENT:
            return self.advance().value
        self.fail(*TYPE_KEYWORDS, "set name")

    def _stmt_FUNC(self):
        name, input = self._signature()
        return S.FuncDecl(name, input, self.type_name())

    def _stmt_CALC(self):
        name, input = self._signature()
        output = self.type_name()
        self.op("=")
        return S.CalcDecl(name, input, output, self.expr())

    def _stmt_LINK(self):
        name, input = self._signature()
        target = self.ident()
        self.expect(KW, "ON")
        matches = [self.match()]
        while self.accept(OP, ","):
            matches.append(self.match())
        return S.LinkDecl(name, input, target, tuple(matches))

    def match(self):
        path = self.path()
        self.op("==")
        return path, self.ident()

    def _stmt_AGG(self):
        name, input = self._signature()
        output = self.type_name()
        self.op("=")
        t = self.tok
        if not (t.kind == KW and t.value in ACCUMULATORS):
            self.fail(*ACCUMULATORS)
        acc = self.advance().value
        self.op("(")
        fact = self.ident()
        self.op(".")
        link = self.ident()
        self.op(",")
        measure = self.expr()
        self.op(")")
        return S.AggDecl(name, input, output, acc, fact, link, measure)

    def _stmt_PROD(self):
        name = self.ident()
        self.op("=")
        components = [self.ident()]
        self.op("*")
        components.append(self.ident())
        while self.accept(OP, "*"):
            components.append(self.ident())
        predicate = self.expr() if self.accept(KW, "WHERE") else None
        return S.ProdDecl(name, tuple(components), predicate)

    def _stmt_ADD(self):
        set_name = self.ident()
        assignments = []
        if self.accept(OP, "("):
            while True:
                key = self.ident()
                self.op("=")
                assignments.append((key, self.literal()))
                if not self.accept(OP, ","):
                    break
            self.op(")")
        return S.Add(set_name, tuple(assignments))

    def _stmt_DEL(self):
        return S.Del(self.ref_literal())

    def _stmt_UPD(self):
        ref = self.ref_literal()
        self.op(".")
        function = self.ident()
        self.op("=")
        return S.Upd(ref, function, self.literal())

    def _stmt_GET(self):
        ref = self.ref_literal()
        self.op(".")
        return S.Get(ref, self.path())

    def _stmt_SHOW(self):
        set_name = self.ident()
        paths = []
        if self.accept(OP, "("):
            paths.append(self.path())
            while self.accept(OP, ","):
                paths.append(self.path())
            self.op(")")
        return S.Show(set_name, tuple(paths))

    def _stmt_LOAD(self):
        if self.accept(KW, "FROM"):
            return S.Load(self.expect(STRING).value)
        set_name = self.ident()
        self.expect(KW, "FROM")
        return S.Load(self.expect(STRING).value, set_name)

    def _stmt_SAVE(self):
        set_name = self.ident()
        self.expect(KW, "TO")
        return S.Save(set_name, self.expect(STRING).value)

    def _stmt_DUMP(self):
        return S.Dump(self.expect(STRING).value)

    def _stmt_EVAL(self):
        return S.Eval()

    # pieces

    def path(self) -> tuple[str, ...]:
        segments = [self.ident()]
        while self.accept(OP, "."):
            segments.append(self.ident())
        return tuple(segments)

    def ordinal(self) -> int:
        t = self.expect(INT)
        if not V.in_int_range(t.value):
            raise ParseError("ordinal out of range", t.line, t.col, ("int",))
        return t.value

    def ref_literal(self) -> Ref:
        set_name = self.ident()
        self.op("#")
        return Ref(set_name, self.ordinal())

    def number(self, negative: bool):
        t = self.advance()
        value = -t.value if negative else t.value
        if t.kind == INT and not V.in_int_range(value):
            raise ParseError("integer literal out of range", t.line, t.col, ("int",))
        return value

    def literal(self):
        t = self.tok
        if t.kind == KW and t.value in ("NULL", "TRUE", "FALSE"):
            self.advance()
            return {"NULL": None, "TRUE": True, "FALSE": False}[t.value]
        if t.kind in (INT, FLOAT):
            return self.number(False)
        if t.kind == OP and t.value == "-" and self.tokens[self.i + 1].kind in (INT, FLOAT):
            self.advance()
            return self.number(True)
        if t.kind == STRING:
            return self.advance().value
        if t.kind == IDENT:
            return self.ref_literal()
        self.fail("literal")

    # expressions

    def expr(self, min_power: int = 1):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            t = self.tok
            raise ParseError("expression nested too deeply", t.line, t.col)
        left = self.unary()
        while True:
            t = self.tok
            op = t.value if t.kind in (OP, KW) else None
            power = PRECEDENCE.get(op)
            if power is None or power < min_power:
                break
            self.advance()
            right = self.expr(power + 1)
            left = Binary(op, left, right)
        self.depth -= 1
        return left

    def unary(self):
        t = self.tok
        if t.kind == KW and t.value == "NOT":
            self.advance()
            return Unary("NOT", self.operand())
        if t.kind == OP and t.value == "-":
            nxt = self.tokens[self.i + 1]
            if nxt.kind in (INT, FLOAT):
                self.advance()
                return Literal(self.number(True))
            self.advance()
            return Unary("-", self.operand())
        return self.primary()

    def operand(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            t = self.tok
            raise ParseError("expression nested too deeply", t.line, t.col)
        node = self.unary()
        self.depth -= 1
        return node

    def primary(self):
        t = self.tok
        if t.kind in (INT, FLOAT):
            return Literal(self.number(False))
        if t.kind == STRING:
            return Literal(self.advance().value)
        if t.kind == KW and t.value in ("NULL", "TRUE", "FALSE"):
            return Literal(self.literal())
        if t.kind == IDENT:
            if self.tokens[self.i + 1].kind == OP and self.tokens[self.i + 1].value == "#":
                return Literal(self.ref_literal())
            return Path(self.path())
        if self.accept(OP, "("):
            inner = self.expr()
            self.op(")")
            return inner
        self.fail("literal", "path", "'('", "'-'", "'NOT'")


def parse(text_or_tokens) -> list[S.Statement]:
    """Parse a whole script (text or tokens) into statements."""
    tokens = tokenize(text_or_tokens) if isinstance(text_or_tokens, str) else text_or_tokens
    return Parser(tokens).script()


def parse_expression(text: str):
    p = Parser(tokenize(text))
    node = p.expr()
    p.expect(EOF)
    return node


def parse_literal(text: str):
    p = Parser(tokenize(text))
    value = p.literal()
    p.expect(EOF)
    return value
