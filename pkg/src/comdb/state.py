"""Data state: alive elements per set and one column per function.

Columns are dense lists indexed by ordinal. Dead ordinals keep a ``None``
slot; the registry's ``alive`` mask says which slots are meaningful.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from . import values as V
from .errors import (
    DeadRef,
    InvalidInput,
    NotBaseFunction,
    NotEntitySet,
    StaleDerived,
    TypeMismatch,
    UnknownSet,
)
from .schema import BASE, ENTITY, PRIMITIVE, PRODUCT, Schema
from .values import Ref


@dataclass(frozen=True)
class ObjectView:
    """A reference together with a snapshot of some of its function outputs."""

    ref: Ref
    fields: tuple[tuple[str, object], ...]

    def __getitem__(self, name):
        for k, v in self.fields:
            if k == name:
                return v
        raise KeyError(name)


class _Registry:
    __slots__ = ("alive", "count")

    def __init__(self):
        self.alive = bytearray()
        self.count = 0

    @property
    def next_ordinal(self) -> int:
        return len(self.alive)

    def ordinals(self) -> list[int]:
        alive = self.alive
        return [i for i in range(len(alive)) if alive[i]]


class State:
    """Elements and function mappings for one :class:`Schema`.

    The state follows schema changes lazily: new base functions start as all
    Null, new derived nodes start dirty.
    """

    def __init__(self, schema: Schema | None = None):
        self.schema = schema if schema is not None else Schema()
        self._registries: dict[str, _Registry] = {}
        self._columns: dict[tuple[str, str], list] = {}
        self._owners: dict = {}  # column or node -> definition object it was built for
        self._dirty: set[str] = set()
        self._generation: Counter = Counter()
        self._synced = -1
        self._sync()

    # schema tracking

    def _sync(self):
        schema = self.schema
        if schema.version == self._synced:
            return
        for s in schema.sets:
            if s.name not in self._registries or self._owners.get(s.name) is not s:
                self._registries[s.name] = _Registry()
                self._owners[s.name] = s
                if s.kind == PRODUCT:
                    self._mark_new(s.name)
        for name in [n for n in self._registries if not schema.has_set(n)]:
            del self._registries[name]
            self._owners.pop(name, None)
            self._dirty.discard(name)
        for f in schema.functions():
            key = (f.input, f.name)
            if self._owners.get(key) is f:
                continue
            self._owners[key] = f
            if f.kind == BASE:
                self._columns[key] = [None] * self._registries[f.input].next_ordinal
                self._mark_dirty(f.qualname)
            else:
                self._columns.pop(key, None)
                self._mark_new(schema.node_of(f))
        for key in [k for k in self._owners if isinstance(k, tuple)
                    and not schema.has_function(*k)]:
            del self._owners[key]
            self._columns.pop(key, None)
            self._dirty.discard(f"{key[0]}.{key[1]}")
        self._synced = schema.version

    def _mark_new(self, node: str):
        self._dirty.add(node)
        self._dirty.update(self.schema.downstream(node))

    def _mark_dirty(self, node: str):
        self._dirty.update(self.schema.downstream(node))

    def is_dirty(self, node: str) -> bool:
        self._sync()
        return node in self._dirty

    def dirty_nodes(self) -> set[str]:
        self._sync()
        return set(self._dirty)

    def generation(self, node: str) -> int:
        """Number of times the engine has recomputed ``node``."""
        return self._generation[node]

    # lookups

    def _registry(self, set_name: str) -> _Registry:
        self._sync()
        reg = self._registries.get(set_name)
        if reg is None:
            if self.schema.set(set_name).kind == PRIMITIVE:
                raise InvalidInput(f"primitive set {set_name} has no element registry")
            raise UnknownSet(f"unknown set {set_name}")
        return reg

    def _check_ref(self, ref) -> _Registry:
        if type(ref) is not Ref:
            raise TypeMismatch(f"expected a reference, got {ref!r}")
        reg = self._registry(ref.set)
        if ref.set in self._dirty:
            raise StaleDerived(f"product set {ref.set} is not evaluated")
        if not (0 <= ref.ordinal < reg.next_ordinal and reg.alive[ref.ordinal]):
            raise DeadRef(f"{ref} is not alive")
        return reg

    def is_alive(self, ref: Ref) -> bool:
        self._sync()
        reg = self._registries.get(ref.set)
        return (reg is not None and ref.set not in self._dirty
                and 0 <= ref.ordinal < reg.next_ordinal and bool(reg.alive[ref.ordinal]))

    def _column(self, f):
        if f.kind != BASE:
            node = self.schema.node_of(f)
            if node in self._dirty:
                raise StaleDerived(f"{node} is not evaluated")
        return self._columns[f.input, f.name]

    # the four primitive operations

    def add_element(self, set_name: str) -> Ref:
        reg = self._registry(set_name)
        if self.schema.set(set_name).kind != ENTITY:
            raise NotEntitySet(f"{set_name} is not an entity set")
        return self._append(set_name, reg)

    def _append(self, set_name: str, reg: _Registry) -> Ref:
        ordinal = reg.next_ordinal
        reg.alive.append(1)
        reg.count += 1
        for f in self.schema.functions(set_name):
            col = self._columns.get((set_name, f.name))
            if col is not None:
                col.append(None)
        self._mark_dirty(set_name)
        return Ref(set_name, ordinal)

    def remove_element(self, ref: Ref) -> None:
        if type(ref) is Ref and self.schema.has_set(ref.set) \
                and self.schema.set(ref.set).kind != ENTITY:
            raise NotEntitySet(f"{ref.set} is not an entity set")
        reg = self._check_ref(ref)
        reg.alive[ref.ordinal] = 0
        reg.count -= 1
        for f in self.schema.functions(ref.set):
            col = self._columns.get((ref.set, f.name))
            if col is not None:
                col[ref.ordinal] = None
        # inbound references become Null
        for f in self.schema.functions():
            if f.output != ref.set:
                continue
            col = self._columns.get((f.input, f.name))
            if col is not None and ref in col:
                for i, v in enumerate(col):
                    if v == ref:
                        col[i] = None
                if f.kind == BASE:
                    self._mark_dirty(f.qualname)
        self._mark_dirty(ref.set)

    def set_value(self, function: str, ref: Ref, value) -> None:
        self._check_ref(ref)
        f = self.schema.function(ref.set, function)
        if f.kind != BASE:
            raise NotBaseFunction(f"{f.qualname} is {f.kind}; derived functions are read-only")
        if value is not None:
            if not V.conforms(value, f.output):
                raise TypeMismatch(f"{f.qualname} expects {f.output}, got {V.render(value)}")
            if type(value) is Ref:
                self._check_ref(value)
            value = V.coerce(value, f.output)
        self._columns[ref.set, function][ref.ordinal] = value
        self._mark_dirty(f.qualname)

    def get_value(self, function: str, ref: Ref):
        self._check_ref(ref)
        f = self.schema.function(ref.set, function)
        return self._column(f)[ref.ordinal]

    # reads built on get

    def eval_path(self, ref: Ref, path):
        """Apply the functions of ``path`` in turn; Null short-circuits to Null."""
        self._check_ref(ref)
        chain = self.schema.resolve_path(ref.set, path)
        v = ref
        for f in chain:
            v = self._column(f)[v.ordinal]
            if v is None:
                return None
        return v

    def materialize_object(self, ref: Ref, functions=()) -> ObjectView:
        self._check_ref(ref)
        return ObjectView(ref, tuple((name, self.get_value(name, ref)) for name in functions))

    def count(self, set_name: str) -> int:
        reg = self._registry(set_name)
        if set_name in self._dirty:
            raise StaleDerived(f"product set {set_name} is not evaluated")
        return reg.count

    def list_refs(self, set_name: str) -> list[Ref]:
        reg = self._registry(set_name)
        if set_name in self._dirty:
            raise StaleDerived(f"product set {set_name} is not evaluated")
        return [Ref(set_name, i) for i in reg.ordinals()]

    def iter_columns(self):
        """Yield ``(FunctionDef, column)`` for every materialized column."""
        self._sync()
        for f in self.schema.functions():
            col = self._columns.get((f.input, f.name))
            if col is not None:
                yield f, col

    # engine and loader hooks

    def alive_ordinals(self, set_name: str) -> list[int]:
        return self._registry(set_name).ordinals()

    def raw_column(self, f) -> list:
        """Column backing ``f`` without staleness checks."""
        self._sync()
        return self._columns[f.input, f.name]

    def install_column(self, f, column: list):
        self._columns[f.input, f.name] = column
        node = self.schema.node_of(f)
        self._dirty.discard(node)
        self._generation[node] += 1

    def install_product(self, set_name: str, count: int, projections: dict[str, list]):
        """Replace a product population: ordinals ``0..count-1``, all alive."""
        reg = self._registries[set_name]
        reg.alive = bytearray(b"\x01") * count
        reg.count = count
        for f in self.schema.functions(set_name):
            key = (set_name, f.name)
            if f.name in projections:
                self._columns[key] = projections[f.name]
            else:
                self._columns[key] = [None] * count
        self._dirty.discard(set_name)
        self._generation[set_name] += 1

    def restore_element(self, ref: Ref):
        """Recreate an entity element with a fixed ordinal (snapshot loading)."""
        reg = self._registry(ref.set)
        if self.schema.set(ref.set).kind != ENTITY:
            raise NotEntitySet(f"{ref.set} is not an entity set")
        while reg.next_ordinal < ref.ordinal:
            self._append(ref.set, reg)
            reg.alive[-1] = 0
            reg.count -= 1
        if reg.next_ordinal > ref.ordinal:
            raise DeadRef(f"ordinal {ref} cannot be restored")
        self._append(ref.set, reg)
