"""
Almost-sure and positive winning sets
=====================================

Solve a few small concurrent games and look at the level structure the
solvers produce.
"""

from cmpg import almost_set_improved, almost_set_naive, positive_set
from cmpg.generators import gen_gbar, gen_gm, gen_gn, gen_pennies

# G^3: every state wins almost surely, but the states sit on different levels
g = gen_gn(3)
naive = almost_set_naive(g)
improved = almost_set_improved(g)
print("G^3 almost-sure set:", sorted(naive.winning))
for i, layer in enumerate(naive.y_chain):
    print(f"  Y_{i} = {sorted(layer)}")
print(improved.to_text())

# the level solver reports how much work it did
print("counters:", {k: (sum(v.values()) if isinstance(v, dict) else v) for k, v in improved.counters.items()})

# Gbar: only v1 wins almost surely, v also wins with positive probability
gb = gen_gbar()
print("Gbar almost-sure:", sorted(almost_set_naive(gb).winning))
print("Gbar positive:", sorted(positive_set(gb).winning))

# G_m: a one-state game that player 1 cannot win even with positive probability
for m in (2, 3, 4):
    print(f"G_{m} positive:", sorted(positive_set(gen_gm(m)).winning))

# matching pennies, both flavours
for variant in (False, True):
    game = gen_pennies(variant)
    print(game.name, sorted(almost_set_improved(game).winning))
