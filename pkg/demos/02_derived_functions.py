"""Links, calculated columns and aggregates.

Order items find their product by name, compute an amount and roll up into
product revenue. Changing one price only recomputes what depends on it.
"""
from comdb import Schema, State, evaluate

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
s.define_aggregate("lines", "Product", "INT", "OrderItem", "product", "qty", "COUNT")

st = State(s)
for name, price in [("Tea", 4.5), ("Cake", 3.0), ("Jam", 6.25)]:
    r = st.add_element("Product")
    st.set_value("name", r, name)
    st.set_value("price", r, price)
for pname, qty in [("Tea", 2), ("Cake", 1), ("Tea", 3), ("Scone", 5), ("Cake", None)]:
    r = st.add_element("OrderItem")
    st.set_value("pname", r, pname)
    st.set_value("qty", r, qty)

print("dependency order:", s.topo_order())
print(evaluate(st).render())
print()
for p in st.list_refs("Product"):
    print(f"{st.get_value('name', p):6} revenue={st.get_value('revenue', p)} "
          f"lines={st.get_value('lines', p)}")

# a dangling name links to Null; so does everything computed through it
scone = next(r for r in st.list_refs("OrderItem") if st.get_value("pname", r) == "Scone")
print("\nScone item links to", st.get_value("product", scone), "amount", st.get_value("amount", scone))

st.set_value("price", st.list_refs("Product")[0], 5.0)
print("\nafter repricing Tea, dirty nodes:", sorted(st.dirty_nodes()))
print(evaluate(st).render())
