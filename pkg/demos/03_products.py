"""Product sets: every combination of component elements, optionally filtered.

Rooms times time slots gives a booking grid. A predicate drops the slots a
room is closed for.
"""
from comdb import Schema, State, evaluate

s = Schema()
s.define_entity_set("Room")
s.define_base_function("label", "Room", "STR")
s.define_base_function("closes", "Room", "INT")
s.define_entity_set("Slot")
s.define_base_function("hour", "Slot", "INT")
s.define_product("Grid", ["Room", "Slot"], "slot.hour < room.closes")
s.define_calc("title", "Grid", "STR", "room.label")

st = State(s)
for label, closes in [("North", 11), ("South", 13)]:
    r = st.add_element("Room")
    st.set_value("label", r, label)
    st.set_value("closes", r, closes)
for hour in (9, 10, 11, 12):
    st.set_value("hour", st.add_element("Slot"), hour)

evaluate(st)
print("projections:", [f.name for f in s.functions("Grid")])
for g in st.list_refs("Grid"):
    print(g, st.get_value("title", g), st.eval_path(g, ["slot", "hour"]))

# removing a slot repopulates the grid from scratch
st.remove_element(st.list_refs("Slot")[0])
evaluate(st)
print("\nafter dropping 9:00 ->", st.count("Grid"), "cells:", [str(g) for g in st.list_refs("Grid")])
