"""
Finite memory is not enough
===========================

For any finite-memory strategy on G^1 a player-2 responder that reads the
same memory keeps the payoff at most 1 - p, p being the smallest positive
weight on the risky action.  Enumerate a small suite and confirm.
"""

from fractions import Fraction

from cmpg.generators import gen_gbar, gen_gn
from cmpg.verification import enumerate_finite_memory, spoil_finite_memory

grid = [Fraction(0), Fraction(1, 2), Fraction(1)]
for name, game, hub in (("G1", gen_gn(1), "v1"), ("Gbar", gen_gbar(), "v")):
    worst = Fraction(0)
    total = failures = 0
    for fm in enumerate_finite_memory(game, hub, grid, max_memory=2):
        _, report = spoil_finite_memory(game, fm)
        total += 1
        failures += not report.passed
        worst = max(worst, max(v for v, _ in report.per_state.values()))
    print(f"{name}: {total} automata, {failures} escaped, best value kept = {worst}")
