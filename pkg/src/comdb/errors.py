"""Exception hierarchy.

Every error carries a ``code`` (the class name) so front ends can render
``ERROR <Code>: <message>`` uniformly.
"""
from __future__ import annotations


class ComError(Exception):
    """Base class for all engine errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# schema definition
class DuplicateSet(ComError):
    pass


class DuplicateFunction(ComError):
    pass


class UnknownSet(ComError):
    pass


class UnknownFunction(ComError):
    pass


class UnknownPathSegment(ComError):
    pass


class InvalidInput(ComError):
    pass


class InvalidArity(ComError):
    pass


class TypeMismatch(ComError):
    pass


class EmptyMatchList(ComError):
    pass


class DependencyError(ComError):
    """Raised when dropping a function that other definitions still use."""


class CycleDetected(ComError):
    def __init__(self, members):
        self.members = list(members)
        super().__init__("dependency cycle: " + " -> ".join(self.members))


class InvalidSchema(ComError):
    pass


# state
class NotEntitySet(ComError):
    pass


class DeadRef(ComError):
    pass


class NotBaseFunction(ComError):
    pass


class StaleDerived(ComError):
    pass


class LinkAmbiguous(ComError):
    def __init__(self, function: str, ref):
        self.function = function
        self.ref = ref
        super().__init__(f"link {function} matches more than one target for {ref}")


# text formats
class PositionedError(ComError):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        self.message = message
        super().__init__(f"{message} at {line}:{col}")


class LexError(PositionedError):
    pass


class ParseError(PositionedError):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.expected = tuple(sorted(set(expected)))
        super().__init__(message, line, col)


class CsvFormatError(ComError):
    def __init__(self, message: str, record: int):
        self.record = record
        super().__init__(f"record {record}: {message}")


class SnapshotFormatError(ComError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class VersionMismatch(ComError):
    pass
