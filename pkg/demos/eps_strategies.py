"""
Stationary strategies for mean payoff 1 - epsilon
=================================================

Build the stationary strategy on G^n, check it exactly against every
player-2 reply, and watch its patience blow up with n.
"""

from fractions import Fraction

from cmpg import almost_set_naive, synth_eps_stationary, verify_eps_claim
from cmpg.generators import gen_gn
from cmpg.model import patience

eps = Fraction(1, 4)
for n in range(1, 4):
    g = gen_gn(n)
    report = almost_set_naive(g)
    sigma = synth_eps_stationary(g, report, eps)
    check = verify_eps_claim(g, sigma, report.winning, eps)
    worst = min(value for value, _ in check.per_state.values())
    print(f"n={n} patience={patience(sigma)} worst value={worst} passed={check.passed}")

# the distribution at the top state of G^2
g = gen_gn(2)
sigma = synth_eps_stationary(g, almost_set_naive(g), eps)
for s in g.states:
    print(s, dict(sigma.at(s)))

# a uniform strategy is too impatient: the verifier hands back the reply that beats it
uniform = type(sigma)(1, {s: {a: Fraction(1, len(g.actions1[s])) for a in g.actions1[s]} for s in g.states})
print(verify_eps_claim(g, uniform, g.states, eps).to_text())
