"""
Deterministic mean-payoff games as boolean concurrent games
===========================================================

Each edge becomes a four-state gadget paying its reward over 3M steps in
expectation, so values shrink by exactly 3M.
"""

from cmpg.fileio import parse_dmpg
from cmpg.reduction import dmpg_values, gadget_expectations, reduce_dmpg, transported_values

text = """dmpg demo
node s owner=1
node t owner=2
node u owner=1
node w owner=2
edge s t r=1
edge s u r=3
edge t s r=4
edge t w r=0
edge u u r=2
edge u s r=4
edge w w r=1
"""
d = parse_dmpg(text)
game, gmap = reduce_dmpg(d)
print(f"{len(d.nodes)} nodes, {len(d.edges)} edges -> {len(game.states)} states, scale 3M = {gmap.scale}")
print(gmap.to_text(d))

for r in range(d.max_reward + 1):
    reward, steps = gadget_expectations(r, d.max_reward)
    print(f"gadget r={r}: expected reward {reward}, expected steps {steps}")

vals = dmpg_values(d)
moved = transported_values(d)
for v in d.nodes:
    print(f"{v}: val={vals[v]}  transported={moved[v]}  val/3M={vals[v] / gmap.scale}")
