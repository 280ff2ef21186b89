"""Allow-stay-progress predecessor operator and the qualitative solvers.

``almost_set_naive`` evaluates ``nu X. mu Y. nu Z. ASP(X, Y, Z)`` directly,
``positive_set`` evaluates ``mu Y. nu Z. ASP(S, Y, Z)`` and
``almost_set_improved`` runs the level-based (small progress measure style)
algorithm in O(n * |delta|).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .model import GameStructure, SolveReport


class PreconditionError(ValueError):
    pass


def _as_set(states: Iterable[str]) -> frozenset:
    return states if isinstance(states, frozenset) else frozenset(states)


def allow1(game: GameStructure, s: str, X) -> list:
    """Player-1 actions at s that keep the play inside X against every reply."""
    X = _as_set(X)
    return [a for a in game.actions1[s] if all(game.succ(s, a, b) <= X for b in game.actions2[s])]


def _bad2(game, s, allowed, Y) -> list:
    return [b for b in game.actions2[s] if any(game.succ(s, a, b) & Y for a in allowed)]


def bad2(game: GameStructure, s: str, X, Y) -> list:
    """Player-2 actions at s that risk progress into Y against some allowed action."""
    X, Y = _as_set(X), _as_set(Y)
    if not Y <= X:
        raise PreconditionError("bad2 requires Y subset of X")
    return _bad2(game, s, allow1(game, s, X), Y)


def _good1(game, s, allowed, bad, Z) -> list:
    target = game.target_reward
    rest = [b for b in game.actions2[s] if b not in bad]
    return [
        a
        for a in allowed
        if all(game.succ(s, a, b) <= Z and game.reward[(s, a, b)] == target for b in rest)
    ]


def good1(game: GameStructure, s: str, X, Y, Z) -> list:
    X, Y, Z = _as_set(X), _as_set(Y), _as_set(Z)
    if not (Y <= Z <= X):
        raise PreconditionError("good1 requires Y subset of Z subset of X")
    allowed = allow1(game, s, X)
    return _good1(game, s, allowed, set(_bad2(game, s, allowed, Y)), Z)


def asp(game: GameStructure, X, Y, Z) -> frozenset:
    """States with at least one good player-1 action for the triple (X, Y, Z)."""
    X, Y, Z = _as_set(X), _as_set(Y), _as_set(Z)
    if not (Y <= Z <= X):
        raise PreconditionError("asp requires Y subset of Z subset of X")
    out = []
    for s in game.states:
        allowed = allow1(game, s, X)
        if allowed and _good1(game, s, allowed, set(_bad2(game, s, allowed, Y)), Z):
            out.append(s)
    return frozenset(out)


def _nu_z(game, X, Y, stats) -> frozenset:
    # ASP(X, Y, Z) = ASP(X, Y, Z & X), so shrinking from X reaches the same
    # greatest fixpoint while keeping Z inside X.
    Z = X
    while True:
        stats["z_iterations"] += 1
        nxt = asp(game, X, Y, Z) & X
        if nxt == Z:
            return Z
        Z = nxt


def _mu_y(game, X, stats) -> list:
    chain = [frozenset()]
    while True:
        stats["y_iterations"] += 1
        nxt = _nu_z(game, X, chain[-1], stats)
        if nxt == chain[-1]:
            return chain
        chain.append(nxt)


def _levels_from_chain(game, chain) -> dict:
    levels = {s: 0 for s in game.states}
    for i in range(1, len(chain)):
        for s in chain[i] - chain[i - 1]:
            levels[s] = i
    return levels


def almost_set_naive(game: GameStructure) -> SolveReport:
    """Almost-sure winning set for LimInfAvg(1) by nested fixpoint iteration."""
    stats = {"x_iterations": 0, "y_iterations": 0, "z_iterations": 0}
    X = frozenset(game.states)
    x_chain = [X]
    while True:
        stats["x_iterations"] += 1
        y_chain = _mu_y(game, X, stats)
        nxt = y_chain[-1]
        if nxt == X:
            break
        X = nxt
        x_chain.append(X)
    return SolveReport(
        objective="almost",
        algorithm="naive",
        states=game.states,
        winning=X,
        levels=_levels_from_chain(game, y_chain),
        y_chain=y_chain,
        x_chain=x_chain,
        counters=stats,
    )


def positive_set(game: GameStructure) -> SolveReport:
    """Positive winning set for LimInfAvg(1): mu Y. nu Z. ASP(S, Y, Z)."""
    stats = {"y_iterations": 0, "z_iterations": 0}
    S = frozenset(game.states)
    y_chain = _mu_y(game, S, stats)
    return SolveReport(
        objective="positive",
        algorithm="naive",
        states=game.states,
        winning=y_chain[-1],
        levels=_levels_from_chain(game, y_chain),
        y_chain=y_chain,
        x_chain=[S],
        counters=stats,
    )


# -- improved algorithm ---------------------------------------------------------


@dataclass
class LevelState:
    """Mutable state of one ImprovedAlgo run, indexed by state position."""

    level: list
    allow: list
    bad: list
    good: list
    num: list  # per state: {b: count}
    process_calls: list
    remove_calls: dict = field(default_factory=dict)
    work: int = 0


class _Compiled:
    """Index-based view of a game used by the level algorithm."""

    def __init__(self, game: GameStructure):
        idx = game.index
        self.n = game.n
        self.acts1 = [game.actions1[s] for s in game.states]
        self.acts2 = [game.actions2[s] for s in game.states]
        target = game.target_reward
        self.succ = []
        self.hit = []
        self.cost = []
        for s in game.states:
            table, hits = {}, {}
            cost = 0
            for a in game.actions1[s]:
                for b in game.actions2[s]:
                    table[(a, b)] = tuple(idx[t] for t in game.delta[(s, a, b)])
                    hits[(a, b)] = game.reward[(s, a, b)] == target
                    cost += len(table[(a, b)])
            self.succ.append(table)
            self.hit.append(hits)
            self.cost.append(cost)
        self.pred = [[] for _ in range(self.n)]
        for i in range(self.n):
            for (a, b), ts in self.succ[i].items():
                for t in ts:
                    self.pred[t].append((i, a, b))


def process(g: _Compiled, st: LevelState, s: int) -> None:
    """Recompute allow/bad/good/num at s from the current levels."""
    st.process_calls[s] += 1
    st.work += g.cost[s]
    lvl = st.level
    ls = lvl[s]
    succ = g.succ[s]
    allow = [
        a for a in g.acts1[s] if all(lvl[t] != 0 for b in g.acts2[s] for t in succ[(a, b)])
    ]
    num = {b: 0 for b in g.acts2[s]}
    for a in allow:
        for b in g.acts2[s]:
            num[b] += sum(1 for t in succ[(a, b)] if lvl[t] > ls)
    bad = {b for b, k in num.items() if k > 0}
    hit = g.hit[s]
    good = {
        a
        for a in allow
        if all(hit[(a, b)] and all(lvl[t] >= ls for t in succ[(a, b)]) for b in g.acts2[s] if b not in bad)
    }
    st.allow[s] = set(allow)
    st.num[s] = num
    st.bad[s] = bad
    st.good[s] = good


def remove(g: _Compiled, st: LevelState, s: int, b) -> None:
    """Drop b from bad(s) once num(s, b) hits zero and prune good(s)."""
    assert st.num[s][b] == 0, "remove called while num(s, b) > 0"
    key = (s, b)
    st.remove_calls[key] = st.remove_calls.get(key, 0) + 1
    st.bad[s].discard(b)
    lvl = st.level
    ls = lvl[s]
    succ = g.succ[s]
    hit = g.hit[s]
    for a in g.acts1[s]:
        st.work += len(succ[(a, b)])
    # b is no longer excused: good actions must now also earn the target
    # reward and stay at level >= l(s) against b
    st.good[s] = {
        a for a in st.good[s] if hit[(a, b)] and all(lvl[t] >= ls for t in succ[(a, b)])
    }


def almost_set_improved(game: GameStructure, order: Optional[Sequence[str]] = None) -> SolveReport:
    """Almost-sure winning set for LimInfAvg(1) via the level algorithm.

    ``order`` permutes the state iteration order inside each pass; the result
    does not depend on it.
    """
    g = _Compiled(game)
    n = g.n
    if order is None:
        seq = list(range(n))
    else:
        seq = [game.index[s] for s in order]
        if sorted(seq) != list(range(n)):
            raise ValueError("order must be a permutation of the states")
    st = LevelState(
        level=[n] * n,
        allow=[set() for _ in range(n)],
        bad=[set() for _ in range(n)],
        good=[set() for _ in range(n)],
        num=[{} for _ in range(n)],
        process_calls=[0] * n,
    )
    for s in seq:
        process(g, st, s)
    passes = 0
    changed = True
    while changed:
        changed = False
        zero = False
        passes += 1
        dropped = [s for s in seq if st.level[s] > 0 and not st.good[s]]
        for s in dropped:
            changed = True
            st.level[s] -= 1
            if st.level[s] == 0:
                zero = True
        if zero:
            for s in seq:
                process(g, st, s)
            continue
        for s in dropped:
            process(g, st, s)
        dropped_set = set(dropped)
        for s in dropped:
            ls = st.level[s]
            for t, a, b in g.pred[s]:
                st.work += 1
                if t in dropped_set:
                    continue
                lt = st.level[t]
                if lt == ls and a in st.allow[t]:
                    # s used to sit one level above t: one progress witness fewer
                    st.num[t][b] -= 1
                    if st.num[t][b] == 0:
                        remove(g, st, t, b)
                elif lt == ls + 1 and b not in st.bad[t] and a in st.good[t]:
                    # s fell below t, so (a, b) no longer stays at t's level
                    st.good[t].discard(a)
    levels = {game.states[i]: st.level[i] for i in range(n)}
    winning = frozenset(s for s, l in levels.items() if l > 0)
    return SolveReport(
        objective="almost",
        algorithm="improved",
        states=game.states,
        winning=winning,
        levels=levels,
        y_chain=_chain_from_levels(game, levels),
        x_chain=[],
        counters={
            "passes": passes,
            "process_calls": {game.states[i]: c for i, c in enumerate(st.process_calls)},
            "remove_calls": {(game.states[i], b): c for (i, b), c in st.remove_calls.items()},
            "work": st.work,
        },
    )


def _chain_from_levels(game, levels) -> list:
    """Y_i = {s : l*(s) > n - i} for the winning states (Y_0 empty)."""
    n = game.n
    winning = [s for s in game.states if levels[s] > 0]
    chain = [frozenset()]
    if not winning:
        return chain
    depth = n + 1 - min(levels[s] for s in winning)
    for i in range(1, depth + 1):
        chain.append(frozenset(s for s in winning if levels[s] > n - i))
    return chain


def naive_layer_to_level(n: int, i: int) -> int:
    """Level l* that the improved algorithm assigns to a state of layer Y_i."""
    return n + 1 - i
