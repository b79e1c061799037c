"""Command-line entry point: ``comdb run|repl|import|export``."""
from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from . import io as cio
from .dsl.executor import Session, format_error, split_statements
from .errors import ComError
from .schema import Schema
from .state import State


def _open_session(snapshot, out) -> Session:
    if snapshot:
        _, state = cio.load_snapshot(snapshot)
        return Session(state, out)
    return Session(State(Schema()), out)


def _run(args, out, err) -> int:
    try:
        with open(args.script, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        err.write(f"ERROR IOError: cannot read {args.script}: {e.strerror}\n")
        return 1
    try:
        session = _open_session(args.snapshot, out)
        session.run(text)
    except ComError as e:
        err.write(format_error(e, getattr(e, "pos", None)) + "\n")
        return 1
    except OSError as e:
        err.write(f"ERROR IOError: {e}\n")
        return 1
    return 0


def _repl(args, inp, out, err) -> int:
    try:
        session = _open_session(args.snapshot, out)
    except (ComError, OSError) as e:
        err.write(f"ERROR {getattr(e, 'code', 'IOError')}: {e}\n")
        return 1
    interactive = inp.isatty()
    buffer = ""
    while True:
        if interactive:
            out.write("...> " if buffer.strip() else "com> ")
            out.flush()
        line = inp.readline()
        if not line:
            break
        if not buffer.strip() and line.strip() == "\\q":
            break
        pieces, buffer = split_statements(buffer + line)
        if not buffer.strip():
            buffer = ""
        for piece in pieces:
            session.run_lenient(piece, err)
    if buffer.strip():
        session.run_lenient(buffer, err)
    return 0


def _import(args, out, err) -> int:
    try:
        if os.path.exists(args.snapshot):
            _, state = cio.load_snapshot(args.snapshot)
        else:
            state = State(Schema())
        if not state.schema.has_set(args.set):
            state.schema.define_entity_set(args.set)
        n = cio.import_csv(args.csv, args.set, state)
        cio.save_snapshot(state, args.snapshot)
    except (ComError, OSError) as e:
        err.write(f"ERROR {getattr(e, 'code', 'IOError')}: {e}\n")
        return 1
    out.write(f"{n} {args.set} elements imported\n")
    return 0


def _export(args, out, err) -> int:
    try:
        _, state = cio.load_snapshot(args.snapshot)
        paths = [p.strip() for p in args.paths.split(",") if p.strip()]
        n = cio.export_csv(state, args.set, paths, args.out)
    except (ComError, OSError) as e:
        err.write(f"ERROR {getattr(e, 'code', 'IOError')}: {e}\n")
        return 1
    out.write(f"{n} {args.set} elements exported\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="comdb", description="Concept-oriented in-memory data engine.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a script")
    p.add_argument("script")
    p.add_argument("--snapshot")

    p = sub.add_parser("repl", help="interactive session; \\q quits")
    p.add_argument("--snapshot")

    p = sub.add_parser("import", help="import a CSV file into a snapshot")
    p.add_argument("csv")
    p.add_argument("--set", required=True)
    p.add_argument("--snapshot", required=True)

    p = sub.add_parser("export", help="export paths of a set from a snapshot to CSV")
    p.add_argument("--set", required=True)
    p.add_argument("--paths", required=True)
    p.add_argument("--snapshot", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command == "run":
        return _run(args, stdout, stderr)
    if args.command == "repl":
        return _repl(args, stdin, stdout, stderr)
    if args.command == "import":
        return _import(args, stdout, stderr)
    return _export(args, stdout, stderr)


if __name__ == "__main__":
    sys.exit(main())
