"""Witness strategies for the almost-sure and positive winning sets.

Every constructor returns explicit strategy data with exact weights:

* ``synth_eps_stationary``: player-1 stationary strategy securing mean payoff
  at least 1 - eps with probability 1 from the almost-sure set.
* ``synth_markov_almost``: player-1 Markov strategy playing the eps-strategy
  for J_i rounds with eps halving from 1/4.
* ``synth_spoiler_markov``: player-2 Markov strategy outside the almost-sure set.
* ``synth_positive_spoiler_stationary``: player-2 stationary strategy outside
  the positive set.
* ``synth_positive_markov``: player-1 Markov strategy with the eps schedule
  advancing every round, from the positive set.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .model import (
    ConstructionTag,
    GameStructure,
    RoundIndexedStrategy,
    SolveReport,
    StationaryStrategy,
    integer_root_le,
    patience,
    uniform,
)
from .markov import fix_strategy
from .solver import _bad2, _good1, allow1, almost_set_naive

__all__ = [
    "HorizonError",
    "SynthesisError",
    "beta",
    "compute_horizon",
    "patience",
    "patience_bound_holds",
    "spoiler_constant",
    "synth_eps_stationary",
    "synth_markov_almost",
    "synth_positive_markov",
    "synth_positive_spoiler_stationary",
    "synth_spoiler_markov",
]

DEFAULT_HORIZON_CAP = 200_000
# value iteration keeps lower bounds on this dyadic grid
GRID_BITS = 96


class SynthesisError(RuntimeError):
    """A construction hit a case its correctness argument rules out."""


class HorizonError(RuntimeError):
    def __init__(self, message: str, best: Fraction, steps: int):
        super().__init__(message)
        self.best = best
        self.steps = steps


def _geometric(n: int, k: int) -> int:
    """1 + n + ... + n^(k-1); equals k when n == 1."""
    if n == 1:
        return k
    return (n**k - 1) // (n - 1)


def beta(j: int, n: int, m: int, delta_min, epsilon) -> Fraction:
    """Weight on non-good actions at the j-th layer below the top one."""
    delta_min = Fraction(delta_min)
    epsilon = Fraction(epsilon)
    if j < 2 or n < 1 or m < 1:
        raise ValueError("beta needs j >= 2, n >= 1, m >= 1")
    if not (0 < delta_min <= 1) or not (0 < epsilon <= 1):
        raise ValueError("beta needs 0 < delta_min <= 1 and 0 < epsilon <= 1")
    g_prev = _geometric(n, j - 1)
    g = _geometric(n, j)
    return Fraction(1, n**g_prev) * (Fraction(m) / delta_min) ** (1 - g) * epsilon**g


def _mixture(allowed: list, good: list, weight: Fraction) -> dict:
    """Good actions share 1 - weight, the other allowed actions share weight."""
    if not good:
        raise SynthesisError("no good action at a winning state")
    rest = [a for a in allowed if a not in good]
    if not rest:
        return uniform(good)
    out = {a: (1 - weight) / len(good) for a in good}
    out.update({a: weight / len(rest) for a in rest})
    return out


def _layers(report: SolveReport) -> list:
    chain = report.y_chain
    if not chain or chain[-1] != report.winning:
        raise SynthesisError("report does not carry a Y-chain ending in its winning set")
    return chain


def synth_eps_stationary(game: GameStructure, report: SolveReport, epsilon) -> StationaryStrategy:
    """Stationary player-1 strategy for mean payoff >= 1 - epsilon on X*.

    A state in layer Y_i \\ Y_{i-1} sits k = l - i layers below the top; it
    puts epsilon (k = 0) or beta_{k+1} (k >= 1) on allowed non-good actions.
    """
    epsilon = Fraction(epsilon)
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    chain = _layers(report)
    xstar = report.winning
    depth = len(chain) - 1
    n, m, dmin = game.n, game.m, game.delta_min
    dist = {}
    for i in range(1, depth + 1):
        k = depth - i
        weight = epsilon if k == 0 else beta(k + 1, n, m, dmin, epsilon)
        for s in chain[i] - chain[i - 1]:
            allowed = allow1(game, s, xstar)
            bad = set(_bad2(game, s, allowed, chain[i - 1]))
            good = _good1(game, s, allowed, bad, chain[i])
            dist[s] = _mixture(allowed, good, weight)
    for s in game.states:
        if s not in xstar:
            dist[s] = uniform(game.actions1[s])
    return StationaryStrategy(1, {s: dist[s] for s in game.states}, {"epsilon": epsilon})


def patience_bound_holds(game: GameStructure, sigma: StationaryStrategy, epsilon) -> bool:
    """patience(sigma) <= (n m / (delta_min epsilon))^(n^(n+2)), decided exactly."""
    base = Fraction(game.n * game.m) / (game.delta_min * Fraction(epsilon))
    return integer_root_le(base, game.n ** (game.n + 2), patience(sigma))


def compute_horizon(
    game: GameStructure,
    sigma: StationaryStrategy,
    epsilon_i,
    region=None,
    cap: int = DEFAULT_HORIZON_CAP,
) -> int:
    """Smallest T whose T-step worst case average reward is >= 1 - 2 epsilon_i.

    Runs value iteration on the player-2 minimizing MDP left by ``sigma`` and
    checks every state of ``region`` (default: all states).  Values are
    rounded down to a dyadic grid after every step, which keeps them small
    and only weakens the certificate.
    """
    epsilon_i = Fraction(epsilon_i)
    mdp = fix_strategy(game, sigma)
    region = list(game.states if region is None else [s for s in game.states if s in region])
    scale = 1 << GRID_BITS
    target = 1 - 2 * epsilon_i
    # integer tables: value v stands for v / 2^GRID_BITS
    rows = {
        s: [
            (mdp.reward[(s, b)] * scale, [(t, p) for t, p in mdp.delta[(s, b)].items()])
            for b in mdp.actions[s]
        ]
        for s in mdp.states
    }
    values = {s: 0 for s in mdp.states}
    best = Fraction(0)
    for T in range(1, cap + 1):
        nxt = {}
        for s, options in rows.items():
            low = None
            for r, succ in options:
                v = r + sum(p * values[t] for t, p in succ)
                if low is None or v < low:
                    low = v
            nxt[s] = low.numerator // low.denominator if isinstance(low, Fraction) else low
        values = nxt
        worst = min(values[s] for s in region) if region else scale * T
        best = Fraction(worst, scale * T)
        if best >= target:
            return T
    raise HorizonError(f"no certified horizon within {cap} steps", best, cap)


def synth_markov_almost(
    game: GameStructure, report: SolveReport, cap: int = DEFAULT_HORIZON_CAP
) -> RoundIndexedStrategy:
    """Markov player-1 strategy: segment i plays the eps_i strategy for J_i rounds."""
    if not report.winning:
        raise SynthesisError("almost-sure winning set is empty")
    first = Fraction(1, 4)

    def segment(k: int):
        eps = first / 2**k
        sigma = synth_eps_stationary(game, report, eps)
        return compute_horizon(game, sigma, eps, report.winning, cap), sigma

    tag = ConstructionTag("eps-halving", (("eps1", first), ("ratio", Fraction(1, 2)), ("horizon", "value-iteration")))
    return RoundIndexedStrategy(1, tag, segment)


def spoiler_constant(game: GameStructure) -> Fraction:
    """c = (delta_min / m)^(n-1) / m."""
    return (game.delta_min / game.m) ** (game.n - 1) / game.m


def _non_bad(game, s, X, Y) -> list:
    allowed = allow1(game, s, X)
    bad = set(_bad2(game, s, allowed, Y))
    rest = [b for b in game.actions2[s] if b not in bad]
    if not rest:
        raise SynthesisError(f"every player-2 action is bad at {s}")
    return rest


def synth_spoiler_markov(game: GameStructure, report: SolveReport, spoiler_eps=Fraction(1, 2)) -> RoundIndexedStrategy:
    """Markov player-2 strategy refuting almost-sure winning outside X*.

    In round i at a state of X_{j-1} \\ X_j (j >= 2) it mixes uniform over all
    actions (weight spoiler_eps / 2^i) with uniform over the actions that are
    not bad for (X_{j-1}, X_j).  Outside X_1 it always plays uniform over the
    non-bad actions for (S, X_1).
    """
    spoiler_eps = Fraction(spoiler_eps)
    if not (0 < spoiler_eps < 1):
        raise ValueError("spoiler_eps must lie in (0, 1)")
    xs = report.x_chain
    if not xs or xs[-1] != report.winning:
        xs = almost_set_naive(game).x_chain
    if len(xs) < 2:
        raise SynthesisError("every state is almost-sure winning; nothing to spoil")
    base, inner = {}, {}
    for j in range(1, len(xs)):
        for s in xs[j - 1] - xs[j]:
            rest = uniform(_non_bad(game, s, xs[j - 1], xs[j]))
            (base if j == 1 else inner)[s] = rest

    def at_round(i: int) -> StationaryStrategy:
        coin = spoiler_eps / 2**i
        dist = {}
        for s in game.states:
            if s in base:
                dist[s] = base[s]
            elif s in inner:
                full = uniform(game.actions2[s])
                mixed = {b: coin * w for b, w in full.items()}
                for b, w in inner[s].items():
                    mixed[b] = mixed.get(b, 0) + (1 - coin) * w
                dist[s] = mixed
            else:
                dist[s] = uniform(game.actions2[s])
        return StationaryStrategy(2, dist)

    c = spoiler_constant(game)
    tag = ConstructionTag("spoiler-markov", (("eps", spoiler_eps), ("coin", "eps/2^i")))
    if not inner:
        fixed = at_round(1)
        return RoundIndexedStrategy(2, tag, lambda k: (None, fixed), {"c": c})
    return RoundIndexedStrategy(2, tag, lambda k: (1, at_round(k + 1)), {"c": c})


def synth_positive_spoiler_stationary(game: GameStructure, positive: SolveReport) -> StationaryStrategy:
    """Player-2 stationary strategy outside Y*: uniform over non-bad actions for (S, Y*)."""
    ystar = positive.winning
    if ystar == frozenset(game.states):
        raise SynthesisError("every state is positively winning; nothing to spoil")
    S = frozenset(game.states)
    dist = {}
    for s in game.states:
        if s in ystar:
            dist[s] = uniform(game.actions2[s])
        else:
            dist[s] = uniform(_non_bad(game, s, S, ystar))
    return StationaryStrategy(2, dist, {"c": spoiler_constant(game)})


def synth_positive_markov(game: GameStructure, positive: SolveReport) -> RoundIndexedStrategy:
    """Player-1 Markov strategy for positive winning; eps_k = 1/4 / 2^(k-1) in round k."""
    chain = _layers(positive)
    if not positive.winning:
        raise SynthesisError("positive winning set is empty")
    S = frozenset(game.states)
    parts = {}
    for i in range(1, len(chain)):
        for s in chain[i] - chain[i - 1]:
            allowed = allow1(game, s, S)
            bad = set(_bad2(game, s, allowed, chain[i - 1]))
            parts[s] = (allowed, _good1(game, s, allowed, bad, chain[i]))

    def at_round(k: int) -> StationaryStrategy:
        eps = Fraction(1, 4) / 2 ** (k - 1)
        dist = {}
        for s in game.states:
            if s in parts:
                dist[s] = _mixture(parts[s][0], parts[s][1], eps)
            else:
                dist[s] = uniform(game.actions1[s])
        return StationaryStrategy(1, dist, {"epsilon": eps})

    tag = ConstructionTag("positive-markov", (("eps1", Fraction(1, 4)), ("ratio", Fraction(1, 2))))
    return RoundIndexedStrategy(1, tag, lambda k: (1, at_round(k + 1)))
