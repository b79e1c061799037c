"""Elements keep their identity while their values change.

A product is added, priced, then repriced. Its reference never moves and the
set still holds exactly one element.
"""
from comdb import Schema, State

schema = Schema()
schema.define_entity_set("Product")
schema.define_base_function("name", "Product", "STR")
schema.define_base_function("price", "Product", "FLOAT")

state = State(schema)
ref = state.add_element("Product")
state.set_value("name", ref, "My Product")
state.set_value("price", ref, 12.34)
print("added", ref, "priced at", state.get_value("price", ref))

state.set_value("price", ref, 23.45)
print("repriced", ref, "to", state.get_value("price", ref))
print("members of Product:", [str(r) for r in state.list_refs("Product")])

view = state.materialize_object(ref, ["name", "price"])
print("object view:", dict(view.fields))
