"""The script/REPL language: tokens, statements, parser."""
from .lexer import Token, tokenize
from .parser import parse, parse_expression, parse_literal
from .statements import render, render_script

__all__ = ["Token", "tokenize", "parse", "parse_expression", "parse_literal",
           "render", "render_script"]
