"""From deterministic mean-payoff games to boolean concurrent games.

Each edge e = (s, t) with reward r is replaced by four probabilistic states:
v1 -> v2 w.p. r/M, v3 w.p. (M-r)/M; v2, v3 -> v4 w.p. 1 - 1/M, t w.p. 1/M
(v2 pays 1, v3 pays 0); v4 -> v1.  Traversing the gadget takes 3M steps and
collects reward r in expectation, so a DMPG value val becomes val / (3M).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .markov import MarkovChain, expected_accumulated, mc_mean_payoff
from .model import Dmpg, GameError, GameStructure

DEFAULT_PAIR_BOUND = 10**6

SINGLE = "go"
WAIT = "wait"


class EnumerationBoundError(GameError):
    pass


# -- brute-force DMPG values -----------------------------------------------------


def _choice_space(d: Dmpg, player: int) -> tuple:
    nodes = [v for v in d.nodes if d.owner[v] == player]
    options = [[i for i, e in enumerate(d.edges) if e[0] == v] for v in nodes]
    return nodes, options


def _lasso(d: Dmpg, choice: dict, s) -> tuple:
    """Edge indices of the path from s up to its cycle, and where the cycle starts."""
    path, pos = [], {}
    v = s
    while v not in pos:
        pos[v] = len(path)
        k = choice[v]
        path.append(k)
        v = d.edges[k][1]
    return tuple(path), pos[v]


def _cycle_mean(d: Dmpg, path, start) -> Fraction:
    cycle = path[start:]
    return Fraction(sum(d.edges[k][2] for k in cycle), len(cycle))


def positional_pairs(d: Dmpg, bound: int = DEFAULT_PAIR_BOUND):
    """Yield (sigma1, sigma2) positional choices as dicts node -> edge index."""
    n1, o1 = _choice_space(d, 1)
    n2, o2 = _choice_space(d, 2)
    total = 1
    for opts in o1 + o2:
        total *= len(opts)
    if total > bound:
        raise EnumerationBoundError(f"{total} positional strategy pairs exceed the bound {bound}")
    for c1 in itertools.product(*o1):
        yield dict(zip(n1, c1)), [dict(zip(n2, c2)) for c2 in itertools.product(*o2)]


def dmpg_values(d: Dmpg, bound: int = DEFAULT_PAIR_BOUND) -> dict:
    """val(s) = max over positional sigma1 of min over positional sigma2, every node."""
    best = {}
    for sigma1, replies in positional_pairs(d, bound):
        worst = {}
        for sigma2 in replies:
            choice = {**sigma1, **sigma2}
            for s in d.nodes:
                path, start = _lasso(d, choice, s)
                value = _cycle_mean(d, path, start)
                if s not in worst or value < worst[s]:
                    worst[s] = value
        for s, v in worst.items():
            if s not in best or v > best[s]:
                best[s] = v
    return best


def dmpg_value_bruteforce(d: Dmpg, s, bound: int = DEFAULT_PAIR_BOUND) -> Fraction:
    if s not in d.owner:
        raise GameError(f"unknown node {s}")
    return dmpg_values(d, bound)[s]


# -- gadget reduction ------------------------------------------------------------


@dataclass(frozen=True)
class GadgetMap:
    """Where each DMPG node and edge went in the reduced game."""

    node_state: dict
    edge_states: dict  # edge index -> (v1, v2, v3, v4)
    edge_action: dict  # edge index -> action name at the source state
    scale: int  # 3M

    def to_text(self, d: Dmpg) -> str:
        lines = []
        for k, (v1, v2, v3, v4) in self.edge_states.items():
            src, dst, r = d.edges[k]
            lines.append(f"# e{k} = {src} -> {dst} r={r}")
            lines.append(f"edge e{k} -> v1={v1} v2={v2} v3={v3} v4={v4}")
        return "\n".join(lines) + "\n"


def _fresh(name: str, taken: set) -> str:
    out = name
    while out in taken:
        out = "_" + out
    taken.add(out)
    return out


def _gadget_rows(r: int, M: int, v1, v2, v3, v4, t) -> dict:
    """Transitions of one gadget as {state: (reward, {succ: prob})}."""
    step = Fraction(1, M)
    entry = {}
    if r > 0:
        entry[v2] = Fraction(r, M)
    if r < M:
        entry[v3] = Fraction(M - r, M)
    leave = {v4: 1 - step, t: step} if M > 1 else {t: Fraction(1)}
    return {
        v1: (0, entry),
        v2: (1, dict(leave)),
        v3: (0, dict(leave)),
        v4: (0, {v1: Fraction(1)}),
    }


def reduce_dmpg(d: Dmpg):
    """Boolean concurrent game simulating ``d`` through edge gadgets."""
    M = d.max_reward
    if M < 1:
        raise GameError("reduction needs a positive maximal reward")
    taken = set()
    node_state = {v: _fresh(v, taken) for v in d.nodes}
    edge_states, edge_action = {}, {}
    states = [node_state[v] for v in d.nodes]
    a1, a2, delta, reward = {}, {}, {}, {}
    for v in d.nodes:
        a1[node_state[v]] = []
        a2[node_state[v]] = []
    for k, (src, dst, r) in enumerate(d.edges):
        names = tuple(_fresh(f"e{k}_v{i}", taken) for i in range(1, 5))
        edge_states[k] = names
        states.extend(names)
        act = f"e{k}"
        edge_action[k] = act
        s = node_state[src]
        (a1 if d.owner[src] == 1 else a2)[s].append(act)
        for q, (rew, dist) in _gadget_rows(r, M, *names, node_state[dst]).items():
            a1[q] = [SINGLE]
            a2[q] = [SINGLE]
            delta[(q, SINGLE, SINGLE)] = dist
            reward[(q, SINGLE, SINGLE)] = Fraction(rew)
    for v in d.nodes:
        s = node_state[v]
        if not a1[s]:
            a1[s] = [WAIT]
        if not a2[s]:
            a2[s] = [WAIT]
        for a in a1[s]:
            for b in a2[s]:
                k = int((a if a != WAIT else b)[1:])
                delta[(s, a, b)] = {edge_states[k][0]: Fraction(1)}
                reward[(s, a, b)] = Fraction(0)
    game = GameStructure(
        f"{d.name}-reduced",
        tuple(states),
        {s: tuple(v) for s, v in a1.items()},
        {s: tuple(v) for s, v in a2.items()},
        delta,
        reward,
    )
    return game, GadgetMap(node_state, edge_states, edge_action, 3 * M)


def gadget_chain(r: int, M: int, loop: bool = False) -> MarkovChain:
    """The chain entry -> v1 -> ... -> exit of a single edge gadget.

    With ``loop`` the exit is the entry again (an edge taken forever);
    otherwise the exit is absorbing with reward 0.
    """
    if not (0 <= r <= M) or M < 1:
        raise ValueError("need 0 <= r <= M and M >= 1")
    rows = _gadget_rows(r, M, "v1", "v2", "v3", "v4", "s" if loop else "t")
    rows["s"] = (0, {"v1": Fraction(1)})
    if not loop:
        rows["t"] = (0, {"t": Fraction(1)})
    order = ("s", "v1", "v2", "v3", "v4") + (() if loop else ("t",))
    return MarkovChain(order, {q: rows[q][1] for q in order}, {q: Fraction(rows[q][0]) for q in order})


def gadget_expectations(r: int, M: int) -> tuple:
    """(expected reward, expected steps) from gadget entry to exit, exactly."""
    chain = gadget_chain(r, M)
    reward = expected_accumulated(chain, {"t"}, "s")
    ones = MarkovChain(chain.states, chain.step, {q: Fraction(1) for q in chain.states})
    steps = expected_accumulated(ones, {"t"}, "s")
    return reward, steps


# -- transport of positional strategies --------------------------------------------


def transported_chain(game: GameStructure, gmap: GadgetMap, d: Dmpg, choice: dict, start) -> MarkovChain:
    """Chain of the reduced game reachable from ``start`` under a positional DMPG pair."""
    act = {}
    for v, k in choice.items():
        s = gmap.node_state[v]
        a = gmap.edge_action[k]
        act[s] = (a, WAIT) if d.owner[v] == 1 else (WAIT, a)
    begin = gmap.node_state[start]
    step, reward = {}, {}
    todo = [begin]
    while todo:
        q = todo.pop()
        if q in step:
            continue
        a, b = act.get(q, (SINGLE, SINGLE))
        step[q] = game.delta[(q, a, b)]
        reward[q] = game.reward[(q, a, b)]
        todo.extend(t for t in step[q] if t not in step)
    return MarkovChain(tuple(step), step, reward)


def transported_values(d: Dmpg, bound: int = DEFAULT_PAIR_BOUND) -> dict:
    """Max-min over positional pairs of the reduced chain's almost-sure value, per node.

    Chains are cached by the lasso they follow, since the reachable part of
    the reduced game only depends on the edges along it.
    """
    game, gmap = reduce_dmpg(d)
    cache = {}
    best = {}
    for sigma1, replies in positional_pairs(d, bound):
        worst = {}
        for sigma2 in replies:
            choice = {**sigma1, **sigma2}
            for s in d.nodes:
                path, _ = _lasso(d, choice, s)
                key = (s, path)
                if key not in cache:
                    chain = transported_chain(game, gmap, d, choice, s)
                    cache[key] = mc_mean_payoff(chain)[gmap.node_state[s]][1]
                value = cache[key]
                if s not in worst or value < worst[s]:
                    worst[s] = value
        for s, v in worst.items():
            if s not in best or v > best[s]:
                best[s] = v
    return best


def verify_reduction(d: Dmpg, s, lam, bound: int = DEFAULT_PAIR_BOUND) -> bool:
    """Truth of: val(s) >= lam in d  iff  the transported value at s is >= lam / (3M).

    Raises when the transported value differs from val(s) / (3M), since the
    iff is then meaningless.
    """
    lam = Fraction(lam)
    scale = 3 * d.max_reward
    val = dmpg_value_bruteforce(d, s, bound)
    moved = transported_values(d, bound)[s]
    if moved != val / scale:
        raise ArithmeticError(f"transported value {moved} != {val}/{scale}")
    return (val >= lam) == (moved >= lam / scale)
