"""Statement execution for scripts and the REPL."""
from __future__ import annotations

import sys

from .. import io as cio
from .. import values as V
from ..engine import evaluate
from ..errors import ComError, DeadRef, NotBaseFunction, NotEntitySet, PositionedError, TypeMismatch
from ..schema import BASE, ENTITY, Schema
from ..state import State
from ..table import format_table
from . import statements as S
from .parser import parse

_DEFINITIONS = (S.SetDecl, S.FuncDecl, S.CalcDecl, S.LinkDecl, S.AggDecl, S.ProdDecl)


def format_error(e: ComError, pos=None) -> str:
    if isinstance(e, PositionedError):
        return f"ERROR {e.code}: {e.message} at {e.line}:{e.col}"
    line, col = pos or (0, 0)
    return f"ERROR {e.code}: {e} at {line}:{col}"


class Session:
    """A schema, its state and an output stream that statements print to."""

    def __init__(self, state: State | None = None, out=None):
        self.state = state if state is not None else State(Schema())
        self.out = out if out is not None else sys.stdout

    @property
    def schema(self) -> Schema:
        return self.state.schema

    def print(self, text: str):
        self.out.write(text + "\n")

    def _refresh(self):
        if self.state.dirty_nodes():
            evaluate(self.state)

    def execute(self, stmt: S.Statement) -> None:
        if isinstance(stmt, _DEFINITIONS):
            cio.declare(self.schema, stmt)
        elif isinstance(stmt, S.Add):
            self._add(stmt)
        elif isinstance(stmt, S.Del):
            self.state.remove_element(stmt.ref)
        elif isinstance(stmt, S.Upd):
            self.state.set_value(stmt.function, stmt.ref, stmt.value)
        elif isinstance(stmt, S.Get):
            self._refresh()
            self.print(V.render(self.state.eval_path(stmt.ref, stmt.path)))
        elif isinstance(stmt, S.Show):
            self._show(stmt)
        elif isinstance(stmt, S.Eval):
            self.print(evaluate(self.state).render())
        elif isinstance(stmt, S.Load) and stmt.set is None:
            _, self.state = cio.load_snapshot(stmt.path)
        elif isinstance(stmt, S.Load):
            n = cio.import_csv(stmt.path, stmt.set, self.state)
            self.print(f"{n} {stmt.set} elements loaded")
        elif isinstance(stmt, S.Save):
            self._refresh()
            paths = [(f.name,) for f in self.schema.functions(stmt.set)]
            n = cio.export_csv(self.state, stmt.set, paths, stmt.path)
            self.print(f"{n} {stmt.set} elements saved")
        elif isinstance(stmt, S.Dump):
            cio.save_snapshot(self.state, stmt.path)
        else:
            raise TypeError(f"cannot execute {stmt!r}")

    def _add(self, stmt: S.Add):
        # check every assignment first so a failure consumes no ordinal
        schema = self.schema
        if schema.set(stmt.set).kind != ENTITY:
            raise NotEntitySet(f"{stmt.set} is not an entity set")
        for name, value in stmt.assignments:
            f = schema.function(stmt.set, name)
            if f.kind != BASE:
                raise NotBaseFunction(f"{f.qualname} is {f.kind}; derived functions are read-only")
            if value is not None and not V.conforms(value, f.output):
                raise TypeMismatch(f"{f.qualname} expects {f.output}, got {V.render(value)}")
            if type(value) is V.Ref and not self.state.is_alive(value):
                raise DeadRef(f"{value} is not alive")
        ref = self.state.add_element(stmt.set)
        try:
            for name, value in stmt.assignments:
                self.state.set_value(name, ref, value)
        except ComError:
            self.state.remove_element(ref)
            raise
        self.print(str(ref))

    def _show(self, stmt: S.Show):
        self._refresh()
        paths = list(stmt.paths) or [(f.name,) for f in self.schema.functions(stmt.set)]
        for p in paths:
            self.schema.resolve_path(stmt.set, p)
        rows = [[str(r)] + [V.render(self.state.eval_path(r, p)) for p in paths]
                for r in self.state.list_refs(stmt.set)]
        self.print(format_table(["ref"] + [".".join(p) for p in paths], rows))

    def run(self, text: str) -> None:
        """Execute a script, stopping at (and raising) the first error."""
        for stmt in parse(text):
            try:
                self.execute(stmt)
            except PositionedError:
                raise
            except ComError as e:
                e.pos = stmt.pos
                raise

    def run_lenient(self, text: str, err=None) -> int:
        """Execute statements, reporting errors and carrying on; returns the error count."""
        err = err if err is not None else self.out
        try:
            stmts = parse(text)
        except ComError as e:
            err.write(format_error(e) + "\n")
            return 1
        failures = 0
        for stmt in stmts:
            try:
                self.execute(stmt)
            except ComError as e:
                err.write(format_error(e, stmt.pos) + "\n")
                failures += 1
            except OSError as e:
                err.write(f"ERROR IOError: {e} at {stmt.pos[0]}:{stmt.pos[1]}\n")
                failures += 1
        return failures


def split_statements(text: str):
    """Cut ``text`` after each ``;`` that sits outside strings and comments.

    Returns ``(pieces, rest)``. Each piece is padded with blank lines and
    spaces so that positions reported while parsing it match ``text``.
    """
    pieces = []
    start = 0
    line, col = 1, 1
    start_pos = (1, 1)
    in_string = escaped = in_comment = False
    i = 0
    while i < len(text):
        ch = text[i]
        if in_comment:
            in_comment = ch != "\n"
        elif in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"' or ch == "\n":
                in_string = False
        elif ch == '"':
            in_string = True
        elif text.startswith("--", i):
            in_comment = True
        elif ch == ";":
            pad = "\n" * (start_pos[0] - 1) + " " * (start_pos[1] - 1)
            pieces.append(pad + text[start:i + 1])
            start = i + 1
            start_pos = (line, col + 1)
        if ch == "\n":
            line, col = line + 1, 1
        else:
            col += 1
        i += 1
    return pieces, text[start:]
