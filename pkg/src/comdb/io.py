"""CSV import/export and text snapshots of a whole engine."""
from __future__ import annotations

import csv
import io as _io
import math
import os
import re

from . import values as V
from .engine import evaluate
from .errors import (
    ComError,
    CsvFormatError,
    DeadRef,
    NotBaseFunction,
    NotEntitySet,
    SnapshotFormatError,
    TypeMismatch,
    VersionMismatch,
)
from .names import is_identifier
from .schema import AGGREGATE, BASE, CALC, ENTITY, LINK, PRODUCT, AggSpec, FunctionDef, Schema, SetDef
from .state import State
from .values import Ref

SNAPSHOT_VERSION = 1
_HEADER = "COMSNAP"

_INT_RE = re.compile(r"[+-]?[0-9]+")
_FLOAT_RE = re.compile(r"[+-]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?")
_REF_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)#([0-9]+)")


# CSV

def _open(target, mode):
    if isinstance(target, (str, os.PathLike)):
        return open(target, mode, newline="", encoding="utf-8"), True
    return target, False


def _infer(fields: list[str]) -> str | None:
    present = [f for f in fields if f != ""]
    if not present:
        return None
    if all(_INT_RE.fullmatch(f) and V.in_int_range(int(f)) for f in present):
        return V.INT
    if all(_FLOAT_RE.fullmatch(f) and math.isfinite(float(f)) for f in present):
        return V.FLOAT
    if all(f.lower() in ("true", "false") for f in present):
        return V.BOOL
    return V.STR


def _converter(domain: str, inferred: str | None, state: State, column: str):
    """Turn CSV text into a value of ``domain``; raises TypeMismatch when impossible."""
    if domain == V.STR:
        return lambda text: text
    if inferred is not None and inferred != domain and not (inferred == V.INT and domain == V.FLOAT):
        if domain in V.PRIMITIVES:
            raise TypeMismatch(f"column {column} holds {inferred} values, function is {domain}")
    if domain == V.INT:
        return int
    if domain == V.FLOAT:
        return float
    if domain == V.BOOL:
        return lambda text: text.lower() == "true"

    def to_ref(text):
        m = _REF_RE.fullmatch(text)
        if m is None or m.group(1) != domain:
            raise TypeMismatch(f"column {column}: {text!r} is not a {domain} reference")
        ref = Ref(domain, int(m.group(2)))
        if not state.is_alive(ref):
            raise DeadRef(f"column {column}: {ref} is not alive")
        return ref
    return to_ref


def import_csv(source, set_name: str, state: State) -> int:
    """Add one element of ``set_name`` per CSV record and assign its fields.

    Columns without a base function get one, typed by inference over the
    whole column. Everything is validated before the state is touched.
    """
    schema = state.schema
    if schema.set(set_name).kind != ENTITY:
        raise NotEntitySet(f"{set_name} is not an entity set")
    fh, owned = _open(source, "r")
    try:
        reader = csv.reader(fh, strict=True)
        records = []
        try:
            for record in reader:
                records.append(record)
        except csv.Error as e:
            raise CsvFormatError(str(e), len(records) + 1) from None
    finally:
        if owned:
            fh.close()

    if not records:
        raise CsvFormatError("missing header", 1)
    header = records[0]
    if header and header[0].startswith("﻿"):
        header[0] = header[0][1:]
    for name in header:
        if not is_identifier(name):
            raise CsvFormatError(f"column name {name!r} is not an identifier", 1)
    if len(set(header)) != len(header):
        raise CsvFormatError("duplicate column names", 1)
    rows = records[1:]
    if len(header) == 1:
        # a blank line is the only way to write a lone empty field
        rows = [row or [""] for row in rows]
    for n, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise CsvFormatError(f"expected {len(header)} fields, got {len(row)}", n)

    plan = []
    for j, name in enumerate(header):
        column = [row[j] for row in rows]
        inferred = _infer(column)
        if schema.has_function(set_name, name):
            f = schema.function(set_name, name)
            if f.kind != BASE:
                raise NotBaseFunction(f"{f.qualname} is {f.kind}; cannot import into it")
            domain = f.output
            new = False
        else:
            domain = inferred or V.STR
            new = True
        convert = _converter(domain, inferred, state, name)
        values = [None if text == "" else convert(text) for text in column]
        plan.append((name, domain, new, values))

    for name, domain, new, _ in plan:
        if new:
            schema.define_base_function(name, set_name, domain)
    for i in range(len(rows)):
        ref = state.add_element(set_name)
        for name, _, _, values in plan:
            if values[i] is not None:
                state.set_value(name, ref, values[i])
    return len(rows)


def _csv_text(v) -> str:
    if v is None:
        return ""
    if type(v) is bool:
        return "true" if v else "false"
    if type(v) is float:
        return repr(v)
    return str(v)


def export_csv(state: State, set_name: str, paths, destination) -> int:
    """Write one record per alive element of ``set_name`` with the given paths."""
    paths = [tuple(p.split(".")) if isinstance(p, str) else tuple(p) for p in paths]
    for p in paths:
        state.schema.resolve_path(set_name, p)
    refs = state.list_refs(set_name)
    rows = [[_csv_text(state.eval_path(r, p)) for p in paths] for r in refs]
    fh, owned = _open(destination, "w")
    try:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow([".".join(p) for p in paths])
        writer.writerows(rows)
    finally:
        if owned:
            fh.close()
    return len(rows)


# snapshots

def schema_statements(schema: Schema):
    """DSL statements recreating ``schema``, in definition order."""
    from .dsl import statements as S

    out = []
    for d in schema.definitions():
        if isinstance(d, SetDef):
            if d.kind == PRODUCT:
                out.append(S.ProdDecl(d.name, d.components, d.predicate))
            else:
                out.append(S.SetDecl(d.name))
        elif d.kind == BASE:
            out.append(S.FuncDecl(d.name, d.input, d.output))
        elif d.kind == CALC:
            out.append(S.CalcDecl(d.name, d.input, d.output, d.calc_expr))
        elif d.kind == LINK:
            out.append(S.LinkDecl(d.name, d.input, d.output, d.link_matches))
        elif d.kind == AGGREGATE:
            a = d.agg_spec
            out.append(S.AggDecl(d.name, d.input, d.output, a.accumulator, a.fact, a.link,
                                 a.measure))
    return out


def declare(schema: Schema, stmt, check: bool = True):
    """Apply a definition statement to ``schema``."""
    from .dsl import statements as S

    if isinstance(stmt, S.SetDecl):
        return schema.add_set(SetDef(stmt.name, ENTITY), check=check)
    if isinstance(stmt, S.ProdDecl):
        if check:
            return schema.define_product(stmt.name, stmt.components, stmt.predicate)
        return schema.add_set(SetDef(stmt.name, PRODUCT, stmt.components, stmt.predicate),
                              check=False)
    if isinstance(stmt, S.FuncDecl):
        f = FunctionDef(stmt.name, stmt.input, stmt.output, BASE)
    elif isinstance(stmt, S.CalcDecl):
        f = FunctionDef(stmt.name, stmt.input, stmt.output, CALC, calc_expr=stmt.expr)
    elif isinstance(stmt, S.LinkDecl):
        if check:
            return schema.define_link(stmt.name, stmt.input, stmt.target, stmt.matches)
        f = FunctionDef(stmt.name, stmt.input, stmt.target, LINK, link_matches=stmt.matches)
    elif isinstance(stmt, S.AggDecl):
        spec = AggSpec(stmt.fact, stmt.link, stmt.measure, stmt.accumulator)
        f = FunctionDef(stmt.name, stmt.input, stmt.output, AGGREGATE, agg_spec=spec)
    else:
        raise TypeError(f"not a definition: {stmt!r}")
    return schema.add_function(f, check=check)


def dump_snapshot(state: State) -> str:
    """Snapshot text of the schema and base state (derived data is not stored)."""
    from .dsl.statements import render

    schema = state.schema
    lines = [f"{_HEADER} {SNAPSHOT_VERSION}"]
    lines += [render(s) for s in schema_statements(schema)]
    entity_sets = [s.name for s in schema.sets if s.kind == ENTITY]
    for name in entity_sets:
        lines += [f"E {name} {o}" for o in state.alive_ordinals(name)]
    for name in entity_sets:
        ordinals = state.alive_ordinals(name)
        for f in schema.functions(name):
            if f.kind != BASE:
                continue
            col = state.raw_column(f)
            lines += [f"V {name} {o} {f.name} {V.render(col[o])}"
                      for o in ordinals if col[o] is not None]
    return "\n".join(lines) + "\n"


def save_snapshot(state: State, destination) -> None:
    """Evaluate, then write the snapshot text to ``destination``."""
    evaluate(state)
    text = dump_snapshot(state)
    fh, owned = _open(destination, "w")
    try:
        fh.write(text)
    finally:
        if owned:
            fh.close()


def _int_field(text: str, lineno: int) -> int:
    if not text.isascii() or not text.isdigit():
        raise SnapshotFormatError(f"bad ordinal {text!r}", lineno)
    return int(text)


def parse_snapshot(text: str) -> tuple[Schema, State]:
    from .dsl.parser import parse, parse_literal

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SnapshotFormatError("empty snapshot", 1)
    head = lines[0].split(" ")
    if len(head) != 2 or head[0] != _HEADER:
        raise SnapshotFormatError(f"expected '{_HEADER} {SNAPSHOT_VERSION}'", 1)
    if head[1] != str(SNAPSHOT_VERSION):
        raise VersionMismatch(f"snapshot version {head[1]}, expected {SNAPSHOT_VERSION}")

    schema = Schema()
    state = None
    section = "schema"
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            if line.startswith("E "):
                if section == "values":
                    raise SnapshotFormatError("element line after value lines", lineno)
                if state is None:
                    state = _finish_schema(schema, lineno)
                section = "elements"
                parts = line.split(" ")
                if len(parts) != 3:
                    raise SnapshotFormatError("expected 'E <set> <ordinal>'", lineno)
                state.restore_element(Ref(parts[1], _int_field(parts[2], lineno)))
            elif line.startswith("V "):
                if state is None:
                    state = _finish_schema(schema, lineno)
                section = "values"
                parts = line.split(" ", 4)
                if len(parts) != 5:
                    raise SnapshotFormatError(
                        "expected 'V <set> <ordinal> <function> <literal>'", lineno)
                ref = Ref(parts[1], _int_field(parts[2], lineno))
                state.set_value(parts[3], ref, parse_literal(parts[4]))
            else:
                if section != "schema":
                    raise SnapshotFormatError("schema statement after data lines", lineno)
                stmts = parse(line)
                if len(stmts) != 1:
                    raise SnapshotFormatError("expected one statement per line", lineno)
                declare(schema, stmts[0], check=False)
        except SnapshotFormatError:
            raise
        except ComError as e:
            raise SnapshotFormatError(f"{e.code}: {e}", lineno) from None
    if state is None:
        state = _finish_schema(schema, len(lines) + 1)
    evaluate(state)
    return schema, state


def _finish_schema(schema: Schema, lineno: int) -> State:
    problems = schema.validate()
    if problems:
        raise SnapshotFormatError("invalid schema: " + "; ".join(problems), lineno)
    return State(schema)


def load_snapshot(source) -> tuple[Schema, State]:
    """Read a snapshot written by :func:`save_snapshot` and evaluate it."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", newline="", encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, _io.TextIOBase) or hasattr(source, "read"):
        text = source.read()
    else:
        raise TypeError("source must be a path or a text stream")
    return parse_snapshot(text)
