"""Exact Markov chains and MDPs obtained by fixing strategies in a game.

Mean-payoff values are computed exactly: Markov chains through bottom strongly
connected components and stationary distributions, MDPs by enumerating
positional policies or by multichain policy iteration (gain/bias).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

import networkx as nx

from .linalg import solve_sparse
from .model import GameStructure, StationaryStrategy, check_distribution

DEFAULT_ENUMERATION_BOUND = 10**6


class PolicyIterationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Mdp:
    """One-player stochastic model; ``player`` is the player still choosing."""

    states: tuple
    actions: Mapping[str, tuple]
    delta: Mapping[tuple, Mapping[str, Fraction]]
    reward: Mapping[tuple, Fraction]
    player: int = 2

    def __post_init__(self):
        for (s, a), d in self.delta.items():
            check_distribution(d, f"mdp transition ({s}, {a})")

    def policy_count(self) -> int:
        total = 1
        for s in self.states:
            total *= len(self.actions[s])
        return total


@dataclass(frozen=True, eq=False)
class MarkovChain:
    states: tuple
    step: Mapping[str, Mapping[str, Fraction]]
    reward: Mapping[str, Fraction]

    def __post_init__(self):
        for s, d in self.step.items():
            check_distribution(d, f"chain step at {s}")

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.states)
        for s in self.states:
            g.add_edges_from((s, t) for t in self.step[s])
        return g


def _mix(parts) -> dict:
    out: dict = {}
    for w, dist in parts:
        for t, p in dist.items():
            out[t] = out.get(t, 0) + w * p
    return out


def fix_strategy(game: GameStructure, sigma: StationaryStrategy) -> Mdp:
    """The MDP left to the other player once ``sigma`` is fixed."""
    sigma.validate(game)
    delta, reward, actions = {}, {}, {}
    if sigma.player == 1:
        for s in game.states:
            mix = sigma.at(s)
            actions[s] = game.actions2[s]
            for b in game.actions2[s]:
                delta[(s, b)] = _mix((w, game.delta[(s, a, b)]) for a, w in mix.items())
                reward[(s, b)] = sum((w * game.reward[(s, a, b)] for a, w in mix.items()), Fraction(0))
        return Mdp(game.states, actions, delta, reward, player=2)
    for s in game.states:
        mix = sigma.at(s)
        actions[s] = game.actions1[s]
        for a in game.actions1[s]:
            delta[(s, a)] = _mix((w, game.delta[(s, a, b)]) for b, w in mix.items())
            reward[(s, a)] = sum((w * game.reward[(s, a, b)] for b, w in mix.items()), Fraction(0))
    return Mdp(game.states, actions, delta, reward, player=1)


def fix_policy(mdp: Mdp, policy: Mapping[str, object]) -> MarkovChain:
    """Markov chain of an MDP under a positional (action) or randomized ({action: p}) policy."""
    step, reward = {}, {}
    for s in mdp.states:
        choice = policy[s]
        mix = choice if isinstance(choice, Mapping) else {choice: Fraction(1)}
        step[s] = _mix((w, mdp.delta[(s, a)]) for a, w in mix.items())
        reward[s] = sum((w * mdp.reward[(s, a)] for a, w in mix.items()), Fraction(0))
    return MarkovChain(mdp.states, step, reward)


def fix_both(game: GameStructure, sigma1: StationaryStrategy, sigma2: StationaryStrategy) -> MarkovChain:
    if sigma1.player != 1 or sigma2.player != 2:
        raise ValueError("expected a player-1 and a player-2 strategy")
    return fix_policy(fix_strategy(game, sigma1), sigma2.dist)


# -- Markov chains ---------------------------------------------------------------


def bottom_classes(chain: MarkovChain) -> list:
    """Closed recurrent classes, each as a frozenset, in a deterministic order."""
    g = chain.graph()
    cond = nx.condensation(g)
    order = {s: i for i, s in enumerate(chain.states)}
    out = []
    for node in cond.nodes:
        if cond.out_degree(node) == 0:
            out.append(frozenset(cond.nodes[node]["members"]))
    out.sort(key=lambda c: min(order[s] for s in c))
    return out


def stationary_distribution(chain: MarkovChain, cls) -> dict:
    """Invariant distribution of a closed recurrent class."""
    members = [s for s in chain.states if s in cls]
    if len(members) == 1:
        return {members[0]: Fraction(1)}
    eqs = {}
    # pi(t) = sum_s pi(s) P(s, t), one equation replaced by normalization
    for t in members[1:]:
        coeffs = {t: Fraction(-1)}
        for s in members:
            p = chain.step[s].get(t)
            if p:
                coeffs[s] = coeffs.get(s, 0) + p
        eqs[t] = (coeffs, 0)
    eqs[members[0]] = ({s: 1 for s in members}, 1)
    return solve_sparse(eqs)


def class_gain(chain: MarkovChain, cls) -> Fraction:
    pi = stationary_distribution(chain, cls)
    return sum((p * chain.reward[s] for s, p in pi.items()), Fraction(0))


def mc_mean_payoff(chain: MarkovChain) -> dict:
    """Per state: (expected mean payoff, almost-sure mean payoff).

    Inside a closed recurrent class the running average converges to the
    class gain with probability 1, so the almost-sure value is the least gain
    among the reachable classes and the expected value weights each gain by
    its absorption probability.
    """
    classes = bottom_classes(chain)
    gain = {}
    where = {}
    for cls in classes:
        g = class_gain(chain, cls)
        for s in cls:
            gain[s] = g
            where[s] = cls
    transient = [s for s in chain.states if s not in where]
    expected = dict(gain)
    if transient:
        eqs = {}
        for s in transient:
            coeffs = {s: Fraction(1)}
            rhs = Fraction(0)
            for t, p in chain.step[s].items():
                if t in where:
                    rhs += p * gain[t]
                else:
                    coeffs[t] = coeffs.get(t, 0) - p
            eqs[s] = (coeffs, rhs)
        expected.update(solve_sparse(eqs))
    graph = chain.graph()
    result = {}
    for s in chain.states:
        if s in where:
            result[s] = (gain[s], gain[s])
            continue
        reach = nx.descendants(graph, s)
        worst = min(gain[t] for t in reach if t in where)
        result[s] = (expected[s], worst)
    return result


def expected_accumulated(chain: MarkovChain, targets, start: Optional[str] = None):
    """Expected total reward collected before the first visit to ``targets``.

    Assumes the targets are reached with probability 1 from every non-target
    state that matters.  Pass a chain whose rewards are all 1 to get expected
    hitting times.
    """
    targets = set(targets)
    eqs = {}
    for s in chain.states:
        if s in targets:
            continue
        coeffs = {s: Fraction(1)}
        for t, p in chain.step[s].items():
            if t not in targets:
                coeffs[t] = coeffs.get(t, 0) - p
        eqs[s] = (coeffs, chain.reward[s])
    values = solve_sparse(eqs) if eqs else {}
    for t in targets:
        values[t] = Fraction(0)
    return values if start is None else values[start]


# -- MDPs ------------------------------------------------------------------------


def _negated(mdp: Mdp) -> Mdp:
    return Mdp(mdp.states, mdp.actions, mdp.delta, {k: -v for k, v in mdp.reward.items()}, mdp.player)


def _max_by_enumeration(mdp: Mdp):
    best = None
    best_policy = None
    for combo in itertools.product(*(mdp.actions[s] for s in mdp.states)):
        policy = dict(zip(mdp.states, combo))
        values = {s: v for s, (v, _) in mc_mean_payoff(fix_policy(mdp, policy)).items()}
        if best is None:
            best, best_policy = dict(values), policy
            continue
        for s in mdp.states:
            if values[s] > best[s]:
                best[s] = values[s]
    # a uniformly optimal positional policy exists; return one
    for combo in itertools.product(*(mdp.actions[s] for s in mdp.states)):
        policy = dict(zip(mdp.states, combo))
        values = {s: v for s, (v, _) in mc_mean_payoff(fix_policy(mdp, policy)).items()}
        if values == best:
            best_policy = policy
            break
    return best, best_policy


def evaluate_policy(mdp: Mdp, policy: Mapping[str, str]) -> tuple:
    """Gain and bias of a positional policy.

    The bias is pinned by h = 0 at the first state of every recurrent class.
    """
    chain = fix_policy(mdp, policy)
    classes = bottom_classes(chain)
    mp = mc_mean_payoff(chain)
    gain = {s: v for s, (v, _) in mp.items()}
    refs = {min(cls, key=chain.states.index) for cls in classes}
    eqs = {}
    for s in chain.states:
        if s in refs:
            eqs[s] = ({s: 1}, 0)
            continue
        coeffs = {s: Fraction(1)}
        for t, p in chain.step[s].items():
            coeffs[t] = coeffs.get(t, 0) - p
        eqs[s] = (coeffs, chain.reward[s] - gain[s])
    bias = solve_sparse(eqs)
    return gain, bias


def _max_by_policy_iteration(mdp: Mdp):
    policy = {s: mdp.actions[s][0] for s in mdp.states}
    seen = set()
    while True:
        key = tuple(policy[s] for s in mdp.states)
        if key in seen:
            raise PolicyIterationError("policy iteration revisited a policy")
        seen.add(key)
        gain, bias = evaluate_policy(mdp, policy)
        changed = False
        candidates = {}
        new = dict(policy)
        for s in mdp.states:
            q = {a: sum((p * gain[t] for t, p in mdp.delta[(s, a)].items()), Fraction(0)) for a in mdp.actions[s]}
            top = max(q.values())
            candidates[s] = [a for a in mdp.actions[s] if q[a] == top]
            if q[policy[s]] < top:
                new[s] = candidates[s][0]
                changed = True
        if changed:
            policy = new
            continue
        for s in mdp.states:
            w = {
                a: mdp.reward[(s, a)] + sum((p * bias[t] for t, p in mdp.delta[(s, a)].items()), Fraction(0))
                for a in candidates[s]
            }
            top = max(w.values())
            if w[policy[s]] < top:
                new[s] = next(a for a in candidates[s] if w[a] == top)
                changed = True
        if not changed:
            return gain, policy
        policy = new


def mdp_optimal(mdp: Mdp, maximize: bool = True, method: str = "auto", bound: int = DEFAULT_ENUMERATION_BOUND):
    """Optimal mean-payoff values and an optimal positional policy.

    ``method`` is "enumerate", "policy-iteration" or "auto" (enumerate when the
    number of positional policies is at most ``bound``).
    """
    target = mdp if maximize else _negated(mdp)
    if method == "auto":
        method = "enumerate" if mdp.policy_count() <= bound else "policy-iteration"
    if method == "enumerate":
        values, policy = _max_by_enumeration(target)
    elif method == "policy-iteration":
        values, policy = _max_by_policy_iteration(target)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not maximize:
        values = {s: -v for s, v in values.items()}
    return values, policy


def mdp_max_mean_payoff(mdp: Mdp, method: str = "auto", bound: int = DEFAULT_ENUMERATION_BOUND) -> dict:
    return mdp_optimal(mdp, True, method, bound)[0]


def mdp_min_mean_payoff(mdp: Mdp, method: str = "auto", bound: int = DEFAULT_ENUMERATION_BOUND) -> dict:
    return mdp_optimal(mdp, False, method, bound)[0]
