"""Expression trees for calc functions, aggregate measures and predicates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from . import values as V
from .errors import TypeMismatch

ARITHMETIC = ("+", "-", "*", "/")
ORDERING = ("<", "<=", ">", ">=")
EQUALITY = ("==", "!=")
LOGICAL = ("AND", "OR")
BINARY_OPS = ARITHMETIC + ORDERING + EQUALITY + LOGICAL

NULL_TYPE = "NULL"


@dataclass(frozen=True)
class Literal:
    value: object


@dataclass(frozen=True)
class Path:
    segments: tuple[str, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("empty path")


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "NOT"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Literal, Path, Unary, Binary]


def paths(expr: Expr):
    """Yield every path reference in ``expr``, left to right."""
    if isinstance(expr, Path):
        yield expr
    elif isinstance(expr, Unary):
        yield from paths(expr.operand)
    elif isinstance(expr, Binary):
        yield from paths(expr.left)
        yield from paths(expr.right)


def to_text(expr: Expr) -> str:
    """DSL text for ``expr``; compound nodes are fully parenthesized."""
    if isinstance(expr, Literal):
        return V.render(expr.value)
    if isinstance(expr, Path):
        return ".".join(expr.segments)
    if isinstance(expr, Unary):
        inner = to_text(expr.operand)
        if expr.op == "NOT":
            return f"(NOT {inner})"
        # "-1" would read back as a negative literal
        if isinstance(expr.operand, Literal):
            inner = f"({inner})"
        return f"(-{inner})"
    return f"({to_text(expr.left)} {expr.op} {to_text(expr.right)})"


def infer_type(expr: Expr, anchor: str, schema) -> str:
    """Static result type of ``expr`` evaluated on elements of ``anchor``.

    Returns a domain name, a set name for ref-valued paths, or ``"NULL"`` for
    an expression that is the bare NULL literal.
    """
    if isinstance(expr, Literal):
        if expr.value is None:
            return NULL_TYPE
        return V.type_of(expr.value)
    if isinstance(expr, Path):
        return schema.resolve_path(anchor, expr.segments)[-1].output
    if isinstance(expr, Unary):
        t = infer_type(expr.operand, anchor, schema)
        if expr.op == "NOT":
            if t not in (V.BOOL, NULL_TYPE):
                raise TypeMismatch(f"NOT needs BOOL, got {t}")
            return V.BOOL
        if t == NULL_TYPE:
            return NULL_TYPE
        if t not in V.NUMERIC:
            raise TypeMismatch(f"unary minus needs a number, got {t}")
        return t

    lt = infer_type(expr.left, anchor, schema)
    rt = infer_type(expr.right, anchor, schema)
    op = expr.op
    if op in LOGICAL:
        for t in (lt, rt):
            if t not in (V.BOOL, NULL_TYPE):
                raise TypeMismatch(f"{op} needs BOOL operands, got {t}")
        return V.BOOL
    if op in ARITHMETIC:
        for t in (lt, rt):
            if t not in V.NUMERIC + (NULL_TYPE,):
                raise TypeMismatch(f"operator {op} needs numbers, got {t}")
        if op == "/" or V.FLOAT in (lt, rt):
            return V.FLOAT
        if lt == NULL_TYPE and rt == NULL_TYPE:
            return NULL_TYPE
        return V.INT
    # comparisons
    if NULL_TYPE not in (lt, rt):
        numeric = lt in V.NUMERIC and rt in V.NUMERIC
        if not numeric and lt != rt:
            raise TypeMismatch(f"cannot compare {lt} with {rt}")
        if op in ORDERING and not (numeric or lt == V.STR):
            raise TypeMismatch(f"operator {op} needs numbers or strings, got {lt}")
    return V.BOOL


def assignable(expr_type: str, output: str) -> bool:
    """Whether a value of ``expr_type`` may be stored in ``output``."""
    return expr_type in (output, NULL_TYPE) or (expr_type == V.INT and output == V.FLOAT)

