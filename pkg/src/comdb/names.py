"""Lexical rules shared by the schema and the DSL."""
import re

KEYWORDS = frozenset("""
SET FUNC CALC LINK AGG PROD ON WHERE ADD DEL UPD GET SHOW LOAD SAVE DUMP EVAL
FROM TO SUM COUNT MIN MAX AVG AND OR NOT TRUE FALSE NULL INT FLOAT STR BOOL
""".split())

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def is_identifier(name) -> bool:
    return isinstance(name, str) and IDENT_RE.fullmatch(name) is not None and name not in KEYWORDS
