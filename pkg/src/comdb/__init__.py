"""In-memory columnar engine for the concept-oriented model.

Sets hold immutable element references; functions map elements to values and
are the only thing that changes when an entity's properties change.
"""
from .engine import EvaluationReport, evaluate
from .errors import ComError
from .schema import FunctionDef, Schema, SetDef
from .state import ObjectView, State
from .values import Ref

__version__ = "0.1.0"

__all__ = [
    "ComError", "EvaluationReport", "FunctionDef", "ObjectView", "Ref", "Schema",
    "SetDef", "State", "evaluate", "__version__",
]
