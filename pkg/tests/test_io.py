import csv
import io
import random

import pytest

from comdb import Schema, State, evaluate
from comdb.errors import (
    CsvFormatError,
    NotEntitySet,
    SnapshotFormatError,
    StaleDerived,
    TypeMismatch,
    VersionMismatch,
)
from comdb.io import (
    dump_snapshot,
    export_csv,
    import_csv,
    load_snapshot,
    parse_snapshot,
    save_snapshot,
)
from comdb.values import Ref


def fresh(set_name="Product"):
    s = Schema()
    s.define_entity_set(set_name)
    return State(s)


def test_import_infers_types():
    st = fresh()
    n = import_csv(io.StringIO("name,price\nMy Product,12.34\n"), "Product", st)
    assert n == 1
    assert st.schema.function("Product", "name").output == "STR"
    assert st.schema.function("Product", "price").output == "FLOAT"
    r = st.list_refs("Product")[0]
    assert (st.get_value("name", r), st.get_value("price", r)) == ("My Product", 12.34)


def test_header_only_creates_functions():
    st = fresh()
    assert import_csv(io.StringIO("name,price\r\n"), "Product", st) == 0
    assert [f.name for f in st.schema.functions("Product")] == ["name", "price"]
    assert st.count("Product") == 0


def test_mixed_column_falls_back_to_str():
    st = fresh()
    import_csv(io.StringIO("v\n1\n2\nx\n"), "Product", st)
    assert st.schema.function("Product", "v").output == "STR"
    assert [st.get_value("v", r) for r in st.list_refs("Product")] == ["1", "2", "x"]


@pytest.mark.parametrize("column, domain, values", [
    (["1", "-2", ""], "INT", [1, -2, None]),
    (["1", "2.5", "1e3"], "FLOAT", [1.0, 2.5, 1000.0]),
    (["true", "FALSE", "True"], "BOOL", [True, False, True]),
    (["", ""], "STR", [None, None]),
    (["9223372036854775808"], "FLOAT", [9.223372036854776e18]),
    (["inf"], "STR", ["inf"]),
])
def test_inference(column, domain, values):
    st = fresh()
    import_csv(io.StringIO("v\n" + "\n".join(column) + "\n"), "Product", st)
    assert st.schema.function("Product", "v").output == domain
    got = [st.get_value("v", r) for r in st.list_refs("Product")]
    assert got == values and [type(g) for g in got] == [type(v) for v in values]


def test_rfc4180_quoting():
    text = 'name,note\r\n"a, b","say ""hi"""\r\n"multi\r\nline",x\r\n'
    st = fresh()
    assert import_csv(io.StringIO(text), "Product", st) == 2
    assert st.get_value("name", Ref("Product", 0)) == "a, b"
    assert st.get_value("note", Ref("Product", 0)) == 'say "hi"'
    assert st.get_value("name", Ref("Product", 1)) == "multi\r\nline"


def test_existing_functions_are_reused(shop_state):
    n = import_csv(io.StringIO("name,price\nThird,3\n"), "Product", shop_state)
    assert n == 1
    r = shop_state.list_refs("Product")[-1]
    assert shop_state.get_value("price", r) == 3.0
    with pytest.raises(TypeMismatch):
        import_csv(io.StringIO("qty\n1.5\n"), "OrderItem", shop_state)


@pytest.mark.parametrize("text, record", [
    ("a,b\n1,2\n3\n", 3),
    ("a,b\n1,2,3\n", 2),
    ('a\n"x"y\n', 2),
    ("", 1),
    ("bad name\n1\n", 1),
    ("a,a\n1,2\n", 1),
])
def test_csv_format_errors(text, record):
    st = fresh()
    with pytest.raises(CsvFormatError) as info:
        import_csv(io.StringIO(text), "Product", st)
    assert info.value.record == record


def test_failed_import_changes_nothing(shop_state):
    before = dump_snapshot(shop_state)
    for text in ["name,price,extra\nA,1.0,x\nB,oops,y\n",  # conflicts with FLOAT price
                 "name,weight\nA,1\nB\n"]:
        with pytest.raises((TypeMismatch, CsvFormatError)):
            import_csv(io.StringIO(text), "Product", shop_state)
        assert dump_snapshot(shop_state) == before
    assert not shop_state.schema.has_function("Product", "extra")


def test_import_into_non_entity_set():
    s = Schema()
    s.define_entity_set("A")
    s.define_entity_set("B")
    s.define_product("AB", ["A", "B"])
    with pytest.raises(NotEntitySet):
        import_csv(io.StringIO("x\n1\n"), "AB", State(s))


def test_export_example(tmp_path):
    st = fresh()
    st.schema.define_base_function("name", "Product", "STR")
    st.schema.define_base_function("price", "Product", "FLOAT")
    r = st.add_element("Product")
    st.set_value("name", r, "My Product")
    st.set_value("price", r, 12.34)
    st.set_value("price", r, 23.45)
    out = tmp_path / "p.csv"
    assert export_csv(st, "Product", ["name", "price"], out) == 1
    assert out.read_bytes() == b"name,price\r\nMy Product,23.45\r\n"


def test_export_paths_nulls_and_refs(shop_state):
    buf = io.StringIO()
    with pytest.raises(StaleDerived):
        export_csv(shop_state, "OrderItem", ["product.price"], buf)
    evaluate(shop_state)
    export_csv(shop_state, "OrderItem", ["product.price", "product", "qty"], buf)
    assert buf.getvalue().split("\r\n") == [
        "product.price,product,qty", "23.45,Product#0,2", "10.0,Product#1,1", ",,3",
        "23.45,Product#0,", ""]


def test_str_round_trip_is_byte_identical():
    rng = random.Random(5)
    alphabet = 'ab ,"\r\n\txyz'
    for _ in range(30):
        rows = [[rng.choice(["", "q"]) + "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6)))
                 for _ in range(3)] for _ in range(rng.randint(1, 8))]
        src = io.StringIO(newline="")
        csv.writer(src, lineterminator="\r\n").writerows([["a", "b", "c"]] + rows)
        text = src.getvalue()
        st = fresh()
        import_csv(io.StringIO(text, newline=""), "Product", st)
        assert {f.output for f in st.schema.functions("Product")} == {"STR"}
        out = io.StringIO(newline="")
        export_csv(st, "Product", ["a", "b", "c"], out)
        assert out.getvalue() == text


# snapshots

def test_empty_snapshot():
    assert dump_snapshot(State(Schema())) == "COMSNAP 1\n"


def test_one_product_snapshot():
    st = fresh()
    st.schema.define_base_function("name", "Product", "STR")
    st.schema.define_base_function("price", "Product", "FLOAT")
    r = st.add_element("Product")
    st.set_value("name", r, "My Product")
    st.set_value("price", r, 23.45)
    lines = dump_snapshot(st).splitlines()
    e_lines = [x for x in lines if x.startswith("E ")]
    v_lines = [x for x in lines if x.startswith("V ")]
    assert len(e_lines) == st.count("Product")
    non_null = sum(st.get_value(f.name, r) is not None for f in st.schema.functions("Product"))
    assert len(v_lines) == non_null == 2
    assert lines[0] == "COMSNAP 1"
    assert 'V Product 0 name "My Product"' in lines
    assert "V Product 0 price 23.45" in lines


def test_snapshot_preserves_ordinals_and_recomputes(shop_state, tmp_path):
    shop_state.remove_element(Ref("OrderItem", 1))
    evaluate(shop_state)
    path = tmp_path / "snap.txt"
    save_snapshot(shop_state, path)
    assert "revenue" not in "".join(x for x in path.read_text().splitlines() if x.startswith("V"))
    schema, st = load_snapshot(path)
    assert st.list_refs("OrderItem") == shop_state.list_refs("OrderItem")
    assert st.get_value("revenue", Ref("Product", 0)) == shop_state.get_value("revenue", Ref("Product", 0))
    assert st.add_element("OrderItem") == Ref("OrderItem", 4)
    assert schema.topo_order() == shop_state.schema.topo_order()


def test_snapshot_values_round_trip():
    s = Schema()
    s.define_entity_set("T")
    for name, dom in [("s", "STR"), ("f", "FLOAT"), ("i", "INT"), ("b", "BOOL"), ("r", "T")]:
        s.define_base_function(name, "T", dom)
    st = State(s)
    values = [("s", 'line\nbreak "q" \\ \t'), ("f", -0.0), ("i", -2**63), ("b", False),
              ("s", ""), ("f", 1e-300), ("f", 0.1 + 0.2)]
    refs = []
    for fn, v in values:
        r = st.add_element("T")
        st.set_value(fn, r, v)
        st.set_value("r", r, r)
        refs.append(r)
    _, back = parse_snapshot(dump_snapshot(st))
    for r, (fn, v) in zip(refs, values):
        got = back.get_value(fn, r)
        assert repr(got) == repr(v)
        assert back.get_value("r", r) == r


@pytest.mark.parametrize("text, error, line", [
    ("COMSNAP 2\n", VersionMismatch, 1),
    ("", SnapshotFormatError, 1),
    ("HELLO\n", SnapshotFormatError, 1),
    ("COMSNAP 1\nSET A;\nE A x\n", SnapshotFormatError, 3),
    ("COMSNAP 1\nSET A;\nE B 0\n", SnapshotFormatError, 3),
    ("COMSNAP 1\nSET A;\nFUNC n: A -> INT;\nE A 0\nV A 0 n \"s\"\n", SnapshotFormatError, 5),
    ("COMSNAP 1\nSET A;\nE A 0\nSET B;\n", SnapshotFormatError, 4),
    ("COMSNAP 1\nSET A;\nE A 1\nE A 0\n", SnapshotFormatError, 4),
    ("COMSNAP 1\nSET A\n", SnapshotFormatError, 2),
    ("COMSNAP 1\nQ 1 2\n", SnapshotFormatError, 2),
])
def test_snapshot_errors(text, error, line):
    with pytest.raises(error) as info:
        parse_snapshot(text)
    if error is SnapshotFormatError:
        assert info.value.line == line
