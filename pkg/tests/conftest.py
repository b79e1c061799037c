import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from comdb import Schema, State  # noqa: E402

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or report.failed:
        ok = report.passed and report.when == "call"
        previous = _criteria.get(number, (title, True))[1]
        _criteria[number] = (title, previous and ok)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture
def shop():
    """Products with name/price and order items linking to them by name."""
    s = Schema()
    s.define_entity_set("Product")
    s.define_base_function("name", "Product", "STR")
    s.define_base_function("price", "Product", "FLOAT")
    s.define_entity_set("OrderItem")
    s.define_base_function("qty", "OrderItem", "INT")
    s.define_base_function("pname", "OrderItem", "STR")
    s.define_link("product", "OrderItem", "Product", [("pname", "name")])
    s.define_calc("amount", "OrderItem", "FLOAT", "qty * product.price")
    s.define_aggregate("revenue", "Product", "FLOAT", "OrderItem", "product", "amount", "SUM")
    return s


@pytest.fixture
def shop_state(shop):
    st = State(shop)
    p = st.add_element("Product")
    st.set_value("name", p, "My Product")
    st.set_value("price", p, 23.45)
    q = st.add_element("Product")
    st.set_value("name", q, "Other")
    st.set_value("price", q, 10.0)
    for qty, pname in [(2, "My Product"), (1, "Other"), (3, None), (None, "My Product")]:
        r = st.add_element("OrderItem")
        st.set_value("qty", r, qty)
        st.set_value("pname", r, pname)
    return st
