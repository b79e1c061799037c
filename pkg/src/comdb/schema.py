"""Sets, function signatures, derived-function definitions and their dependency graph."""
from __future__ import annotations

import graphlib
from collections import Counter, deque
from dataclasses import dataclass, field

from . import values as V
from .errors import (
    ComError,
    CycleDetected,
    DependencyError,
    DuplicateFunction,
    DuplicateSet,
    EmptyMatchList,
    InvalidArity,
    InvalidInput,
    TypeMismatch,
    UnknownFunction,
    UnknownPathSegment,
    UnknownSet,
)
from .expr import Expr, assignable, infer_type, paths
from .names import is_identifier

PRIMITIVE = "primitive"
ENTITY = "entity"
PRODUCT = "product"

BASE = "base"
CALC = "calc"
LINK = "link"
AGGREGATE = "aggregate"
PROJECTION = "projection"
DERIVED_KINDS = (CALC, LINK, AGGREGATE)

ACCUMULATORS = ("SUM", "COUNT", "MIN", "MAX", "AVG")


@dataclass(frozen=True)
class SetDef:
    name: str
    kind: str
    components: tuple[str, ...] = ()
    predicate: Expr | None = None

    def __post_init__(self):
        if self.kind not in (PRIMITIVE, ENTITY, PRODUCT):
            raise ValueError(f"unknown set kind {self.kind!r}")
        if (self.kind == PRODUCT) != bool(self.components):
            raise ValueError("components are required for, and only for, product sets")
        if self.predicate is not None and self.kind != PRODUCT:
            raise ValueError("only product sets take a predicate")


@dataclass(frozen=True)
class AggSpec:
    fact: str
    link: str
    measure: Expr
    accumulator: str

    def __post_init__(self):
        if self.accumulator not in ACCUMULATORS:
            raise ValueError(f"unknown accumulator {self.accumulator!r}")


@dataclass(frozen=True)
class FunctionDef:
    name: str
    input: str
    output: str
    kind: str
    calc_expr: Expr | None = None
    link_matches: tuple[tuple[tuple[str, ...], str], ...] = ()
    agg_spec: AggSpec | None = None

    def __post_init__(self):
        if self.kind not in (BASE, PROJECTION) + DERIVED_KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        if (self.calc_expr is not None) != (self.kind == CALC):
            raise ValueError("calc_expr is required for, and only for, calc functions")
        if self.kind != LINK and self.link_matches:
            raise ValueError("link_matches is only valid for link functions")
        if (self.agg_spec is not None) != (self.kind == AGGREGATE):
            raise ValueError("agg_spec is required for, and only for, aggregate functions")

    @property
    def qualname(self) -> str:
        return f"{self.input}.{self.name}"

    @property
    def derived(self) -> bool:
        return self.kind != BASE


def _as_path(path) -> tuple[str, ...]:
    if isinstance(path, str):
        return tuple(path.split("."))
    return tuple(path)


def _as_expr(expr) -> Expr:
    if isinstance(expr, str):
        from .dsl.parser import parse_expression

        return parse_expression(expr)
    return expr


def projection_names(components) -> list[str]:
    """Projection function names for a product over ``components``."""
    lowered = [c.lower() for c in components]
    counts = Counter(lowered)
    seen: Counter = Counter()
    names = []
    for name in lowered:
        if counts[name] > 1:
            seen[name] += 1
            names.append(f"{name}{seen[name]}")
        else:
            names.append(name)
    return names


@dataclass
class Schema:
    """The pair of declared sets and functions, without any elements.

    ``define_*`` methods check a definition fully (types, references,
    acyclicity) and leave the schema untouched when they raise.
    """

    _sets: dict = field(default_factory=dict)
    _functions: dict = field(default_factory=dict)
    version: int = 0

    def __post_init__(self):
        for p in V.PRIMITIVES:
            self._sets.setdefault(p, SetDef(p, PRIMITIVE))
        self._order: list = []
        self._graph_cache = None

    # lookup

    @property
    def sets(self) -> list[SetDef]:
        """User-declared sets in definition order."""
        return [s for s in self._sets.values() if s.kind != PRIMITIVE]

    def set(self, name: str) -> SetDef:
        try:
            return self._sets[name]
        except KeyError:
            raise UnknownSet(f"unknown set {name}") from None

    def has_set(self, name: str) -> bool:
        return name in self._sets

    def function(self, input: str, name: str) -> FunctionDef:
        try:
            return self._functions[input, name]
        except KeyError:
            raise UnknownFunction(f"unknown function {input}.{name}") from None

    def has_function(self, input: str, name: str) -> bool:
        return (input, name) in self._functions

    def functions(self, input: str | None = None) -> list[FunctionDef]:
        if input is None:
            return list(self._functions.values())
        return [f for f in self._functions.values() if f.input == input]

    def definitions(self) -> list:
        """User-declared sets and functions in definition order (no projections)."""
        return list(self._order)

    def resolve_path(self, anchor: str, segments) -> list[FunctionDef]:
        current = anchor
        chain = []
        for seg in _as_path(segments):
            if self._sets.get(current, SetDef(current, ENTITY)).kind == PRIMITIVE:
                raise UnknownPathSegment(f"cannot apply {seg} to a {current} value")
            f = self._functions.get((current, seg))
            if f is None:
                raise UnknownPathSegment(f"{current} has no function {seg}")
            chain.append(f)
            current = f.output
        return chain

    # definitions

    def define_entity_set(self, name: str) -> SetDef:
        return self.add_set(SetDef(name, ENTITY))

    def define_base_function(self, name: str, input: str, output: str) -> FunctionDef:
        return self.add_function(FunctionDef(name, input, output, BASE))

    def define_calc(self, name: str, input: str, output: str, expr) -> FunctionDef:
        return self.add_function(FunctionDef(name, input, output, CALC, calc_expr=_as_expr(expr)))

    def define_link(self, name: str, input: str, target: str, matches) -> FunctionDef:
        pairs = tuple((_as_path(p), t) for p, t in matches)
        if not pairs:
            raise EmptyMatchList(f"link {input}.{name} needs at least one match")
        return self.add_function(FunctionDef(name, input, target, LINK, link_matches=pairs))

    def define_aggregate(self, name: str, group: str, output: str, fact: str, link: str,
                         measure, accumulator: str) -> FunctionDef:
        if accumulator not in ACCUMULATORS:
            raise InvalidInput(f"unknown accumulator {accumulator}")
        spec = AggSpec(fact, link, _as_expr(measure), accumulator)
        return self.add_function(FunctionDef(name, group, output, AGGREGATE, agg_spec=spec))

    def define_product(self, name: str, components, predicate=None) -> SetDef:
        components = tuple(components)
        if len(components) < 2:
            raise InvalidArity(f"product {name} needs at least two components")
        for c in components:
            if self.set(c).kind == PRIMITIVE:
                raise InvalidInput(f"product component {c} is a primitive set")
        pred = None if predicate is None else _as_expr(predicate)
        return self.add_set(SetDef(name, PRODUCT, components, pred))

    def add_set(self, sdef: SetDef, check: bool = True) -> SetDef:
        """Register a set; product sets also get their projection functions."""
        if sdef.name in self._sets:
            raise DuplicateSet(f"set {sdef.name} already exists")
        if sdef.kind == PRIMITIVE:
            raise InvalidInput("primitive sets are built in")
        if not is_identifier(sdef.name):
            raise InvalidInput(f"invalid set name {sdef.name!r}")
        for c in sdef.components:
            if self.set(c).kind == PRIMITIVE:
                raise InvalidInput(f"product component {c} is a primitive set")
        self._sets[sdef.name] = sdef
        self._order.append(sdef)
        for comp, pname in zip(sdef.components, projection_names(sdef.components)):
            self._functions[sdef.name, pname] = FunctionDef(pname, sdef.name, comp, PROJECTION)
        self._touch()
        if check and sdef.kind == PRODUCT:
            try:
                self._check_product(sdef)
                self.topo_order()
            except ComError:
                self._remove_set(sdef.name)
                raise
        return sdef

    def add_function(self, fdef: FunctionDef, check: bool = True) -> FunctionDef:
        """Register a function.

        With ``check=False`` only names and set existence are verified, which
        allows building (and then diagnosing) forward-referencing or cyclic
        schemas.
        """
        key = (fdef.input, fdef.name)
        if fdef.kind == PROJECTION:
            raise InvalidInput("projection functions are generated by define_product")
        if not is_identifier(fdef.name):
            raise InvalidInput(f"invalid function name {fdef.name!r}")
        in_set = self.set(fdef.input)
        self.set(fdef.output)
        if in_set.kind == PRIMITIVE:
            raise InvalidInput(f"primitive set {fdef.input} cannot have functions")
        if key in self._functions:
            raise DuplicateFunction(f"function {fdef.qualname} already exists")
        if check:
            self._check_function(fdef)
        self._functions[key] = fdef
        self._order.append(fdef)
        self._touch()
        if check:
            try:
                self.topo_order()
            except CycleDetected:
                del self._functions[key]
                self._order.remove(fdef)
                self._touch()
                raise
        return fdef

    def drop_function(self, input: str, name: str) -> FunctionDef:
        fdef = self.function(input, name)
        if fdef.kind == PROJECTION:
            raise InvalidInput("projection functions cannot be dropped")
        node = fdef.qualname
        users = [n for n in self._all_nodes() if n != node and node in self.dependencies(n)]
        if users:
            raise DependencyError(f"{node} is used by {', '.join(users)}")
        del self._functions[input, name]
        self._order.remove(fdef)
        self._touch()
        return fdef

    def _remove_set(self, name: str):
        del self._sets[name]
        self._order = [d for d in self._order
                       if not (d.name == name if isinstance(d, SetDef) else d.input == name)]
        for key in [k for k in self._functions if k[0] == name]:
            del self._functions[key]
        self._touch()

    def _touch(self):
        self.version += 1
        self._graph_cache = None

    # checks

    def _check_function(self, f: FunctionDef):
        in_kind = self.set(f.input).kind
        out_kind = self.set(f.output).kind
        if f.kind == BASE:
            if in_kind != ENTITY:
                raise InvalidInput(f"base function {f.qualname} needs an entity input set")
            if out_kind == PRODUCT:
                raise InvalidInput(f"base function {f.qualname} cannot output product elements")
        elif f.kind == CALC:
            t = infer_type(f.calc_expr, f.input, self)
            if not assignable(t, f.output):
                raise TypeMismatch(f"{f.qualname}: expression is {t}, declared {f.output}")
        elif f.kind == LINK:
            if out_kind == PRIMITIVE:
                raise TypeMismatch(f"link {f.qualname} must target an entity or product set")
            if not f.link_matches:
                raise EmptyMatchList(f"link {f.qualname} needs at least one match")
            for path, target_fn in f.link_matches:
                source = self.resolve_path(f.input, path)[-1]
                target = self.function(f.output, target_fn)
                if source.output != target.output:
                    raise TypeMismatch(
                        f"{f.qualname}: {'.'.join(path)} is {source.output}, "
                        f"{target.qualname} is {target.output}")
        elif f.kind == AGGREGATE:
            spec = f.agg_spec
            if self.set(spec.fact).kind == PRIMITIVE:
                raise InvalidInput(f"fact set {spec.fact} is primitive")
            link = self.function(spec.fact, spec.link)
            if link.output != f.input:
                raise TypeMismatch(f"{link.qualname} maps to {link.output}, not {f.input}")
            t = infer_type(spec.measure, spec.fact, self)
            acc = spec.accumulator
            if acc == "COUNT":
                result = V.INT
            else:
                if t not in V.NUMERIC + ("NULL",):
                    raise TypeMismatch(f"{acc} needs a numeric measure, got {t}")
                result = V.FLOAT if acc == "AVG" else t
            if f.output not in V.NUMERIC or not assignable(result, f.output):
                raise TypeMismatch(f"{f.qualname}: {acc} yields {result}, declared {f.output}")

    def _check_product(self, s: SetDef):
        for c in s.components:
            if self.set(c).kind == PRIMITIVE:
                raise InvalidInput(f"product component {c} is a primitive set")
        if s.predicate is None:
            return
        t = infer_type(s.predicate, s.name, self)
        if t not in (V.BOOL, "NULL"):
            raise TypeMismatch(f"predicate of {s.name} is {t}, not BOOL")
        projections = set(projection_names(s.components))
        for p in paths(s.predicate):
            if p.segments[0] not in projections:
                raise TypeMismatch(f"predicate of {s.name} may only start paths at projections")

    def validate(self) -> list[str]:
        """Diagnostics for every violated schema invariant; empty when sound."""
        out = []
        for s in self.sets:
            for c in s.components:
                if c not in self._sets:
                    out.append(f"{s.name}: UnknownSet: component {c}")
            if s.kind == PRODUCT:
                try:
                    self._check_product(s)
                except ComError as e:
                    out.append(f"{s.name}: {e.code}: {e}")
        for f in self._functions.values():
            if f.input not in self._sets or f.output not in self._sets:
                out.append(f"{f.qualname}: UnknownSet: signature {f.input} -> {f.output}")
                continue
            if f.kind == PROJECTION:
                continue
            try:
                self._check_function(f)
            except ComError as e:
                out.append(f"{f.qualname}: {e.code}: {e}")
        try:
            self.topo_order()
        except CycleDetected as e:
            out.append(f"{e.code}: {e}")
        return out

    # dependency graph

    def node_of(self, f: FunctionDef) -> str:
        """Graph node computing ``f``: projections belong to their product set."""
        return f.input if f.kind == PROJECTION else f.qualname

    def _path_nodes(self, anchor: str, segments) -> list[str]:
        nodes = []
        current = anchor
        for seg in segments:
            f = self._functions.get((current, seg))
            if f is None:
                break
            nodes.append(self.node_of(f))
            current = f.output
        return nodes

    def _expr_nodes(self, expr: Expr, anchor: str) -> list[str]:
        return [n for p in paths(expr) for n in self._path_nodes(anchor, p.segments)]

    def dependencies(self, node: str) -> set[str]:
        """Direct dependencies of a node (a set name or ``Set.function``)."""
        if "." not in node:
            s = self.set(node)
            if s.kind != PRODUCT:
                return set()
            deps = set(s.components)
            if s.predicate is not None:
                deps.update(self._expr_nodes(s.predicate, s.name))
            deps.discard(node)
            return deps
        input, name = node.split(".", 1)
        f = self.function(input, name)
        if f.kind == BASE:
            return set()
        if f.kind == PROJECTION:
            return {f.input}
        deps = {f.input}
        if f.kind == CALC:
            deps.update(self._expr_nodes(f.calc_expr, f.input))
        elif f.kind == LINK:
            deps.add(f.output)
            for path, target_fn in f.link_matches:
                deps.update(self._path_nodes(f.input, path))
                deps.update(self._path_nodes(f.output, (target_fn,)))
        else:
            spec = f.agg_spec
            deps.add(spec.fact)
            deps.update(self._path_nodes(spec.fact, (spec.link,)))
            deps.update(self._expr_nodes(spec.measure, spec.fact))
        return deps

    def _all_nodes(self) -> list[str]:
        nodes = [s.name for s in self.sets]
        nodes += [f.qualname for f in self._functions.values() if f.kind != PROJECTION]
        return nodes

    def derived_nodes(self) -> list[str]:
        """Product sets and calc/link/aggregate functions, in definition order."""
        nodes = []
        for s in self.sets:
            if s.kind == PRODUCT:
                nodes.append(s.name)
        nodes += [f.qualname for f in self._functions.values() if f.kind in DERIVED_KINDS]
        return nodes

    def is_derived_node(self, node: str) -> bool:
        if "." not in node:
            return self._sets.get(node, SetDef(node, ENTITY)).kind == PRODUCT
        input, name = node.split(".", 1)
        f = self._functions.get((input, name))
        return f is not None and f.kind in DERIVED_KINDS

    def _graph(self):
        if self._graph_cache is None:
            deps = {n: self.dependencies(n) for n in self._all_nodes()}
            users: dict[str, set] = {n: set() for n in deps}
            for n, ds in deps.items():
                for d in ds:
                    users.setdefault(d, set()).add(n)
            self._graph_cache = (deps, users, {})
        return self._graph_cache

    def topo_order(self) -> list[str]:
        """Derived nodes ordered so that each follows all of its dependencies."""
        deps = self._graph()[0]
        sorter = graphlib.TopologicalSorter()
        for node in self.derived_nodes():
            sorter.add(node, *sorted(d for d in deps[node] if self.is_derived_node(d)))
        try:
            return list(sorter.static_order())
        except graphlib.CycleError as e:
            cycle = e.args[1]
            raise CycleDetected(cycle[:-1][::-1] if len(cycle) > 1 else cycle) from None

    def downstream(self, node: str) -> frozenset[str]:
        """Derived nodes transitively depending on ``node`` (excluding itself)."""
        deps, users, memo = self._graph()
        if node not in memo:
            seen = set()
            queue = deque(users.get(node, ()))
            while queue:
                n = queue.popleft()
                if n in seen:
                    continue
                seen.add(n)
                queue.extend(users.get(n, ()))
            seen.discard(node)
            memo[node] = frozenset(n for n in seen if self.is_derived_node(n))
        return memo[node]


def validate(schema: Schema) -> list[str]:
    return schema.validate()


def topo_order(schema: Schema) -> list[str]:
    return schema.topo_order()
