"""Run the DSL script next to this file in an in-process session.

Same as ``comdb run demos/05_shop.com`` on the command line.
"""
from pathlib import Path

from comdb.dsl.executor import Session

Session().run((Path(__file__).parent / "05_shop.com").read_text())
