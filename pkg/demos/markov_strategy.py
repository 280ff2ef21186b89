"""
A Markov strategy for mean payoff exactly 1
===========================================

Stationary strategies only reach 1 - epsilon on G^1.  Halving epsilon
segment by segment gives a Markov strategy; here we print its schedule
and simulate it against the reply that punishes the risky action.
"""

from fractions import Fraction

from cmpg import almost_set_naive, simulate, synth_markov_almost
from cmpg.generators import gen_gn
from cmpg.model import StationaryStrategy

g = gen_gn(1)
sigma = synth_markov_almost(g, almost_set_naive(g))
for k in range(4):
    first, last = sigma.segment_bounds(k)
    weight = sigma.segment(k)[1].at("v1")["a1"]
    print(f"segment {k}: rounds {first}..{last}, a1 weight {weight}")

stay = StationaryStrategy(2, {"v0": {"b": Fraction(1)}, "v1": {"b2": Fraction(1)}})
trace = simulate(g, sigma, stay, "v1", 20000, seed=0)
for t, avg in sorted(trace.checkpoints.items()):
    print(f"after {t:>6} steps: average {float(avg):.4f}")
