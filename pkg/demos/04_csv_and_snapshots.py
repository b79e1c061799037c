"""CSV in, CSV out, and a text snapshot of the whole engine.

Column types are inferred on import. The snapshot stores only base data;
derived columns come back by re-evaluation.
"""
import tempfile
from pathlib import Path

from comdb import Schema, State, evaluate
from comdb.io import export_csv, import_csv, load_snapshot, save_snapshot

work = Path(tempfile.mkdtemp())
(work / "products.csv").write_text("name,price,organic\nTea,4.5,true\nCake,3,false\n\"Jam, plum\",6.25,\n")

s = Schema()
s.define_entity_set("Product")
st = State(s)
n = import_csv(work / "products.csv", "Product", st)
print(n, "rows imported;", [(f.name, f.output) for f in s.functions("Product")])

s.define_calc("gross", "Product", "FLOAT", "price * 1.2")
evaluate(st)
export_csv(st, "Product", ["name", "gross"], work / "gross.csv")
print((work / "gross.csv").read_text())

save_snapshot(st, work / "shop.snap")
print((work / "shop.snap").read_text())

_, again = load_snapshot(work / "shop.snap")
print("reloaded gross:", [again.get_value("gross", r) for r in again.list_refs("Product")])
