"""Value representation.

Values are plain Python objects: ``None`` is Null, ``int``/``float``/``str``/
``bool`` are the primitive domains and :class:`Ref` identifies a set element.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

INT = "INT"
FLOAT = "FLOAT"
STR = "STR"
BOOL = "BOOL"
PRIMITIVES = (INT, FLOAT, STR, BOOL)
NUMERIC = (INT, FLOAT)

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


@dataclass(frozen=True, slots=True)
class Ref:
    """Immutable surrogate identifying one element of a set."""

    set: str
    ordinal: int

    def __str__(self) -> str:
        return f"{self.set}#{self.ordinal}"


def in_int_range(v: int) -> bool:
    return INT_MIN <= v <= INT_MAX


def float_bits(x: float) -> int:
    return struct.unpack("<q", struct.pack("<d", x))[0]


def values_equal(a, b) -> bool:
    """Equality used by links and predicates: floats compare bitwise."""
    if type(a) is float or type(b) is float:
        if type(a) is bool or type(b) is bool:
            return False
        return float_bits(float(a)) == float_bits(float(b))
    return type(a) is type(b) and a == b


def match_key(v):
    """Hashable key with the same equality as :func:`values_equal`."""
    if type(v) is float:
        return (FLOAT, float_bits(v))
    return (type(v).__name__, v)


def type_of(v) -> str | None:
    """Domain name of a non-Null value (a set name for refs)."""
    t = type(v)
    if t is bool:
        return BOOL
    if t is int:
        return INT
    if t is float:
        return FLOAT
    if t is str:
        return STR
    if t is Ref:
        return v.set
    return None


def conforms(v, domain: str) -> bool:
    """Whether non-Null ``v`` belongs to ``domain`` (ints widen to FLOAT)."""
    t = type(v)
    if domain == INT:
        return t is int and in_int_range(v)
    if domain == FLOAT:
        return (t is float and math.isfinite(v)) or (t is int and in_int_range(v))
    if domain == STR:
        return t is str
    if domain == BOOL:
        return t is bool
    return t is Ref and v.set == domain


def coerce(v, domain: str):
    if domain == FLOAT and type(v) is int:
        return float(v)
    return v


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\t": "\\t"}


def quote(s: str) -> str:
    return '"' + "".join(_ESCAPES.get(c, c) for c in s) + '"'


def render(v) -> str:
    """Literal text of a value, as accepted back by the DSL."""
    if v is None:
        return "NULL"
    t = type(v)
    if t is bool:
        return "TRUE" if v else "FALSE"
    if t is float:
        # repr is the shortest string that round-trips the 64-bit value
        return repr(v)
    if t is str:
        return quote(v)
    return str(v)
