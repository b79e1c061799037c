"""Statement types and their canonical text form."""
from __future__ import annotations

from dataclasses import dataclass, field

from .. import values as V
from ..expr import Expr, to_text
from ..values import Ref


@dataclass(frozen=True)
class Statement:
    pos: tuple[int, int] = field(default=(0, 0), compare=False, kw_only=True)


@dataclass(frozen=True)
class SetDecl(Statement):
    name: str


@dataclass(frozen=True)
class FuncDecl(Statement):
    name: str
    input: str
    output: str


@dataclass(frozen=True)
class CalcDecl(Statement):
    name: str
    input: str
    output: str
    expr: Expr


@dataclass(frozen=True)
class LinkDecl(Statement):
    name: str
    input: str
    target: str
    matches: tuple[tuple[tuple[str, ...], str], ...]


@dataclass(frozen=True)
class AggDecl(Statement):
    name: str
    input: str
    output: str
    accumulator: str
    fact: str
    link: str
    measure: Expr


@dataclass(frozen=True)
class ProdDecl(Statement):
    name: str
    components: tuple[str, ...]
    predicate: Expr | None = None


@dataclass(frozen=True)
class Add(Statement):
    set: str
    assignments: tuple[tuple[str, object], ...] = ()


@dataclass(frozen=True)
class Del(Statement):
    ref: Ref


@dataclass(frozen=True)
class Upd(Statement):
    ref: Ref
    function: str
    value: object


@dataclass(frozen=True)
class Get(Statement):
    ref: Ref
    path: tuple[str, ...]


@dataclass(frozen=True)
class Show(Statement):
    set: str
    paths: tuple[tuple[str, ...], ...] = ()


@dataclass(frozen=True)
class Load(Statement):
    """``LOAD set FROM file`` imports CSV; without a set it loads a snapshot."""

    path: str
    set: str | None = None


@dataclass(frozen=True)
class Save(Statement):
    set: str
    path: str


@dataclass(frozen=True)
class Dump(Statement):
    path: str


@dataclass(frozen=True)
class Eval(Statement):
    pass


def _path(p) -> str:
    return ".".join(p)


def render(stmt: Statement) -> str:
    """Text that parses back to a statement equal to ``stmt``."""
    if isinstance(stmt, SetDecl):
        return f"SET {stmt.name};"
    if isinstance(stmt, FuncDecl):
        return f"FUNC {stmt.name}: {stmt.input} -> {stmt.output};"
    if isinstance(stmt, CalcDecl):
        return f"CALC {stmt.name}: {stmt.input} -> {stmt.output} = {to_text(stmt.expr)};"
    if isinstance(stmt, LinkDecl):
        matches = ", ".join(f"{_path(p)} == {t}" for p, t in stmt.matches)
        return f"LINK {stmt.name}: {stmt.input} -> {stmt.target} ON {matches};"
    if isinstance(stmt, AggDecl):
        return (f"AGG {stmt.name}: {stmt.input} -> {stmt.output} = {stmt.accumulator}"
                f"({stmt.fact}.{stmt.link}, {to_text(stmt.measure)});")
    if isinstance(stmt, ProdDecl):
        text = f"PROD {stmt.name} = {' * '.join(stmt.components)}"
        if stmt.predicate is not None:
            text += f" WHERE {to_text(stmt.predicate)}"
        return text + ";"
    if isinstance(stmt, Add):
        if not stmt.assignments:
            return f"ADD {stmt.set};"
        body = ", ".join(f"{k}={V.render(v)}" for k, v in stmt.assignments)
        return f"ADD {stmt.set} ({body});"
    if isinstance(stmt, Del):
        return f"DEL {stmt.ref};"
    if isinstance(stmt, Upd):
        return f"UPD {stmt.ref}.{stmt.function} = {V.render(stmt.value)};"
    if isinstance(stmt, Get):
        return f"GET {stmt.ref}.{_path(stmt.path)};"
    if isinstance(stmt, Show):
        if not stmt.paths:
            return f"SHOW {stmt.set};"
        return f"SHOW {stmt.set} ({', '.join(_path(p) for p in stmt.paths)});"
    if isinstance(stmt, Load):
        if stmt.set is None:
            return f"LOAD FROM {V.quote(stmt.path)};"
        return f"LOAD {stmt.set} FROM {V.quote(stmt.path)};"
    if isinstance(stmt, Save):
        return f"SAVE {stmt.set} TO {V.quote(stmt.path)};"
    if isinstance(stmt, Dump):
        return f"DUMP {V.quote(stmt.path)};"
    if isinstance(stmt, Eval):
        return "EVAL;"
    raise TypeError(f"not a statement: {stmt!r}")


def render_script(statements) -> str:
    return "".join(render(s) + "\n" for s in statements)
