"""Evaluation of derived functions and product sets.

Every dirty node is recomputed in full, in dependency order. Expressions are
compiled into closures over the columns they read, so a calc costs one
Python call per element rather than a tree walk.
"""
from __future__ import annotations

import itertools
import operator
import time
from dataclasses import dataclass, field

from . import values as V
from .errors import InvalidSchema, LinkAmbiguous
from .expr import Literal, Path, Unary
from .schema import AGGREGATE, CALC, LINK, PRODUCT
from .values import Ref


# expression compilation

def _compile_path(cols):
    if len(cols) == 1:
        return cols[0].__getitem__
    if len(cols) == 2:
        c0, c1 = cols

        def get2(o):
            v = c0[o]
            return None if v is None else c1[v.ordinal]

        return get2
    first, rest = cols[0], cols[1:]

    def getn(o):
        v = first[o]
        for c in rest:
            if v is None:
                return None
            v = c[v.ordinal]
        return v

    return getn


def _int_checked(r):
    if type(r) is int and not V.in_int_range(r):
        return None
    return r


def _divide(a, b):
    b = float(b)
    return None if b == 0.0 else float(a) / b


_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul}
_ORDER = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


def compile_expr(expr, anchor: str, state, overrides=None):
    """Return ``fn(ordinal) -> value`` evaluating ``expr`` on ``anchor`` elements.

    ``overrides`` maps ``(set, function)`` to a column used instead of the
    stored one.
    """
    schema = state.schema
    overrides = overrides or {}

    def build(e):
        if isinstance(e, Literal):
            value = e.value
            return lambda o: value
        if isinstance(e, Path):
            chain = schema.resolve_path(anchor, e.segments)
            cols = [overrides[f.input, f.name] if (f.input, f.name) in overrides
                    else state.raw_column(f) for f in chain]
            return _compile_path(cols)
        if isinstance(e, Unary):
            inner = build(e.operand)
            if e.op == "NOT":
                def neg_bool(o):
                    v = inner(o)
                    return None if v is None else not v
                return neg_bool

            def neg(o):
                v = inner(o)
                return None if v is None else _int_checked(-v)
            return neg

        left, right = build(e.left), build(e.right)
        op = e.op
        if op == "AND":
            def and3(o):
                a, b = left(o), right(o)
                if a is False or b is False:
                    return False
                if a is None or b is None:
                    return None
                return True
            return and3
        if op == "OR":
            def or3(o):
                a, b = left(o), right(o)
                if a is True or b is True:
                    return True
                if a is None or b is None:
                    return None
                return False
            return or3

        if op == "/":
            fn = _divide
        elif op in _ARITH:
            raw = _ARITH[op]

            def fn(a, b):
                return _int_checked(raw(a, b))
        elif op == "==":
            fn = V.values_equal
        elif op == "!=":
            def fn(a, b):
                return not V.values_equal(a, b)
        else:
            fn = _ORDER[op]

        def binop(o):
            a = left(o)
            if a is None:
                return None
            b = right(o)
            if b is None:
                return None
            return fn(a, b)
        return binop

    return build(expr)


# node evaluators

def eval_calc(f, state) -> list:
    fn = compile_expr(f.calc_expr, f.input, state)
    col = [None] * state._registry(f.input).next_ordinal
    widen = f.output == V.FLOAT
    for o in state.alive_ordinals(f.input):
        v = fn(o)
        if widen and type(v) is int:
            v = float(v)
        col[o] = v
    return col


_AMBIGUOUS = -1


def eval_link(f, state) -> list:
    schema = state.schema
    target = f.output
    sources = [_compile_path([state.raw_column(g) for g in schema.resolve_path(f.input, p)])
               for p, _ in f.link_matches]
    target_cols = [state.raw_column(schema.function(target, t)) for _, t in f.link_matches]

    index: dict = {}
    for o in state.alive_ordinals(target):
        vals = [c[o] for c in target_cols]
        if None in vals:
            continue
        key = tuple(V.match_key(v) for v in vals)
        index[key] = _AMBIGUOUS if key in index else o

    col = [None] * state._registry(f.input).next_ordinal
    for o in state.alive_ordinals(f.input):
        vals = [s(o) for s in sources]
        if None in vals:
            continue
        hit = index.get(tuple(V.match_key(v) for v in vals))
        if hit is None:
            continue
        if hit == _AMBIGUOUS:
            raise LinkAmbiguous(f.qualname, Ref(f.input, o))
        col[o] = Ref(target, hit)
    return col


def eval_aggregate(f, state) -> list:
    schema = state.schema
    spec = f.agg_spec
    acc = spec.accumulator
    link_col = state.raw_column(schema.function(spec.fact, spec.link))
    measure = compile_expr(spec.measure, spec.fact, state)

    counts: dict[int, int] = {}
    folded: dict[int, object] = {}
    for o in state.alive_ordinals(spec.fact):
        g = link_col[o]
        if g is None:
            continue
        m = measure(o)
        if m is None:
            continue
        g = g.ordinal
        if g not in counts:
            counts[g] = 1
            # sums fold from a zero seed, so a lone -0.0 sums to 0.0
            folded[g] = 0 + m if acc in ("SUM", "AVG") else m
            continue
        counts[g] += 1
        if acc in ("SUM", "AVG"):
            folded[g] = folded[g] + m
        elif acc == "MIN":
            if m < folded[g]:
                folded[g] = m
        elif acc == "MAX":
            if m > folded[g]:
                folded[g] = m

    empty = {"SUM": 0, "COUNT": 0}.get(acc)
    widen = f.output == V.FLOAT
    col = [None] * state._registry(f.input).next_ordinal
    for g in state.alive_ordinals(f.input):
        if g not in counts:
            v = empty
        elif acc == "COUNT":
            v = counts[g]
        elif acc == "AVG":
            v = float(folded[g]) / counts[g]
        else:
            v = _int_checked(folded[g])
        if widen and type(v) is int:
            v = float(v)
        col[g] = v
    return col


def populate_product(s, state) -> int:
    """Enumerate the combinations of ``s``'s components, filtered by its predicate."""
    schema = state.schema
    projections = schema.functions(s.name)[: len(s.components)]
    per_component = [[Ref(c, o) for o in state.alive_ordinals(c)] for c in s.components]
    combos = list(itertools.product(*per_component))
    columns = {p.name: [c[i] for c in combos] for i, p in enumerate(projections)}
    if s.predicate is not None and combos:
        overrides = {(s.name, name): col for name, col in columns.items()}
        pred = compile_expr(s.predicate, s.name, state, overrides)
        keep = [i for i in range(len(combos)) if pred(i) is True]
        columns = {name: [col[i] for i in keep] for name, col in columns.items()}
        n = len(keep)
    else:
        n = len(combos)
    state.install_product(s.name, n, columns)
    return n


# orchestration

@dataclass
class NodeReport:
    node: str
    kind: str
    rows: int
    ms: float


@dataclass
class EvaluationReport:
    nodes: list[NodeReport] = field(default_factory=list)

    def __len__(self):
        return len(self.nodes)

    def render(self) -> str:
        from .table import format_table

        rows = [[n.node, n.kind, str(n.rows), f"{n.ms:.3f}"] for n in self.nodes]
        return format_table(["node", "kind", "rows", "ms"], rows, align_right=(2, 3))


def evaluate(state) -> EvaluationReport:
    """Recompute every dirty derived node; clean nodes keep their columns."""
    schema = state.schema
    order = schema.topo_order()
    state._sync()
    report = EvaluationReport()
    if not state._dirty:
        return report
    problems = schema.validate()
    if problems:
        raise InvalidSchema("; ".join(problems))
    for node in order:
        if not state.is_dirty(node):
            continue
        start = time.perf_counter()
        if "." not in node:
            s = schema.set(node)
            rows = populate_product(s, state)
            kind = PRODUCT
        else:
            f = schema.function(*node.split(".", 1))
            if f.kind == CALC:
                col = eval_calc(f, state)
            elif f.kind == LINK:
                col = eval_link(f, state)
            else:
                assert f.kind == AGGREGATE
                col = eval_aggregate(f, state)
            state.install_column(f, col)
            rows = state._registry(f.input).count
            kind = f.kind
        report.nodes.append(NodeReport(node, kind, rows, (time.perf_counter() - start) * 1000))
    return report
