"""Independent checks for strategies and solver claims.

Everything here is exact except ``simulate``, which samples a play from exact
rational distributions with 128-bit uniform draws.
"""

from __future__ import annotations

import bisect
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .markov import (
    DEFAULT_ENUMERATION_BOUND,
    MarkovChain,
    bottom_classes,
    class_gain,
    fix_strategy,
    mc_mean_payoff,
    mdp_optimal,
)
from .model import (
    FiniteMemoryStrategy,
    GameError,
    GameStructure,
    RoundIndexedStrategy,
    StationaryStrategy,
    format_rational,
    patience,
)
from .generators import gen_gbar, gen_gn


@dataclass
class VerificationReport:
    """Per-state values against a claim threshold; ``witness`` is a counter-policy."""

    claim: str
    threshold: Fraction
    per_state: dict
    witness: Optional[dict] = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.per_state.values())

    def failing(self) -> list:
        return [s for s, (_, ok) in self.per_state.items() if not ok]

    def to_text(self) -> str:
        lines = []
        for s, (value, ok) in self.per_state.items():
            lines.append(f"{s} value={format_rational(value)} pass={'yes' if ok else 'no'}")
        if self.witness:
            lines.append("witness:")
            for s, a in self.witness.items():
                lines.append(f"  {s} -> {a}")
        for note in self.notes:
            lines.append(f"# {note}")
        return "\n".join(lines) + "\n"


def _leaks(game: GameStructure, s: str, plays1, plays2, region) -> bool:
    return any(not game.succ(s, a, b) <= region for a in plays1 for b in plays2)


def verify_eps_claim(
    game: GameStructure,
    sigma: StationaryStrategy,
    xstar,
    epsilon,
    method: str = "auto",
    bound: int = DEFAULT_ENUMERATION_BOUND,
) -> VerificationReport:
    """Check mean payoff >= 1 - epsilon surely against every reply, staying in X*.

    Passes iff no action in sigma's support can leave X* and the player-2
    minimizing MDP has value >= 1 - epsilon at every state of X*.
    """
    if sigma.player != 1:
        raise ValueError("expected a player-1 strategy")
    epsilon = Fraction(epsilon)
    region = frozenset(xstar)
    threshold = 1 - epsilon
    values, policy = mdp_optimal(fix_strategy(game, sigma), maximize=False, method=method, bound=bound)
    per_state = {}
    notes = []
    for s in game.sorted_states(region):
        safe = not _leaks(game, s, sigma.at(s), game.actions2[s], region)
        if not safe:
            notes.append(f"unsafe at {s}: support can leave the region")
        per_state[s] = (values[s], safe and values[s] >= threshold)
    report = VerificationReport("eps-as", threshold, per_state, notes=notes)
    if not report.passed:
        report.witness = {s: policy[s] for s in game.states}
    return report


def verify_spoiler_stationary(
    game: GameStructure,
    sigma2: StationaryStrategy,
    complement,
    c,
    method: str = "auto",
    bound: int = DEFAULT_ENUMERATION_BOUND,
) -> VerificationReport:
    """Check that sigma2 keeps every state of ``complement`` at mean payoff <= 1 - c.

    Also requires that no positive-probability move leaves ``complement``.
    """
    if sigma2.player != 2:
        raise ValueError("expected a player-2 strategy")
    region = frozenset(complement)
    threshold = 1 - Fraction(c)
    values, policy = mdp_optimal(fix_strategy(game, sigma2), maximize=True, method=method, bound=bound)
    per_state = {}
    notes = []
    for s in game.sorted_states(region):
        closed = not _leaks(game, s, game.actions1[s], sigma2.at(s), region)
        if not closed:
            notes.append(f"leak at {s}: play can leave the region")
        per_state[s] = (values[s], closed and values[s] <= threshold)
    report = VerificationReport("spoiler-pos", threshold, per_state, notes=notes)
    if not report.passed:
        report.witness = {s: policy[s] for s in game.states}
    return report


# -- finite-memory counterexamples -----------------------------------------------


def _same_shape(game: GameStructure, ref: GameStructure) -> bool:
    return (
        game.states == ref.states
        and dict(game.actions1) == dict(ref.actions1)
        and dict(game.actions2) == dict(ref.actions2)
        and {k: dict(v) for k, v in game.delta.items()} == {k: dict(v) for k, v in ref.delta.items()}
        and dict(game.reward) == dict(ref.reward)
    )


def product_chain(game: GameStructure, fm1: FiniteMemoryStrategy, fm2: FiniteMemoryStrategy, start=None) -> MarkovChain:
    """Markov chain over (state, memory1, memory2) for two finite-memory strategies.

    With ``start`` given, only the part reachable from (start, initial, initial)
    is built.
    """
    fm1.validate(game)
    fm2.validate(game)
    if start is None:
        todo = [(s, p, q) for s in game.states for p in fm1.memory for q in fm2.memory]
    else:
        todo = [(start, fm1.initial, fm2.initial)]
    order = list(todo)
    step, reward = {}, {}
    while todo:
        s, p, q = node = todo.pop()
        out: dict = {}
        rew = Fraction(0)
        for a, wa in fm1.next_move[(s, p)].items():
            for b, wb in fm2.next_move[(s, q)].items():
                w = wa * wb
                rew += w * game.reward[(s, a, b)]
                p2 = fm1.update[(s, a, b, p)]
                q2 = fm2.update[(s, a, b, q)]
                for t, pt in game.delta[(s, a, b)].items():
                    key = (t, p2, q2)
                    out[key] = out.get(key, 0) + w * pt
        step[node] = out
        reward[node] = rew
        for key in out:
            if key not in step and key not in todo:
                todo.append(key)
                order.append(key)
    return MarkovChain(tuple(dict.fromkeys(order)), step, reward)


def reachable_class_gains(chain: MarkovChain, start) -> list:
    """Gains of the closed classes reachable from ``start``."""
    seen = {start}
    todo = [start]
    while todo:
        s = todo.pop()
        for t in chain.step[s]:
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return [class_gain(chain, cls) for cls in bottom_classes(chain) if cls <= seen]


def spoil_finite_memory(game: GameStructure, fm: FiniteMemoryStrategy):
    """Punishing player-2 responder for a finite-memory player-1 strategy.

    The responder copies fm's memory (fm's update is deterministic) and at the
    gambling state answers b1 when fm plays a2 with probability 1, b2
    otherwise.  On G^1 every reachable class then pays at most 1 - p, p being
    fm's least positive a1 weight; on Gbar the play is absorbed in v0.
    Returns ``(responder, report)``; the report value is the largest class
    gain reachable from the start.
    """
    if fm.player != 1:
        raise ValueError("expected a player-1 finite-memory strategy")
    if _same_shape(game, gen_gn(1)):
        hub, stay, start = "v1", "a2", "v1"
        kind = "G1"
    elif _same_shape(game, gen_gbar()):
        hub, stay, start = "v", "a2", "v"
        kind = "Gbar"
    else:
        raise GameError("spoil_finite_memory expects G^1 or Gbar")
    next_move, update = {}, {}
    for s in game.states:
        for mem in fm.memory:
            if s == hub:
                move = fm.next_move[(s, mem)]
                pure_stay = set(move) == {stay}
                next_move[(s, mem)] = {"b1" if pure_stay else "b2": Fraction(1)}
            else:
                next_move[(s, mem)] = {game.actions2[s][0]: Fraction(1)}
            for a in game.actions1[s]:
                for b in game.actions2[s]:
                    update[(s, a, b, mem)] = fm.update[(s, a, b, mem)]
    responder = FiniteMemoryStrategy(2, fm.memory, fm.initial, next_move, update)
    chain = product_chain(game, fm, responder, start)
    init = (start, fm.initial, fm.initial)
    value = max(reachable_class_gains(chain, init))
    if kind == "G1":
        weights = [w for mem in fm.memory for a, w in fm.next_move[(hub, mem)].items() if a == "a1" and w > 0]
        p = min(weights) if weights else Fraction(1)
        threshold = 1 - p
        ok = value <= threshold
    else:
        threshold = Fraction(1)
        ok = value < threshold
    report = VerificationReport(
        "finite-memory-spoil", threshold, {start: (value, ok)}, notes=[f"game={kind}", f"memory={len(fm.memory)}"]
    )
    return responder, report


def enumerate_finite_memory(game: GameStructure, hub: str, grid: Iterable, max_memory: int = 3):
    """All finite-memory player-1 strategies with at most ``max_memory`` states.

    Move distributions at ``hub`` put an a1 weight from ``grid`` (a2 gets the
    rest); elsewhere the single action is played.  The update matters only on
    moves that can occur: (a, b) with a in the support and b the responder's
    answer, which depends on the memory state alone.  Those entries range over
    every memory state; all other entries keep the memory unchanged.
    """
    grid = [Fraction(x) for x in grid]
    for size in range(1, max_memory + 1):
        memory = tuple(f"m{i}" for i in range(size))
        for weights in itertools.product(grid, repeat=size):
            moves = {}
            relevant = []
            for mem, x in zip(memory, weights):
                dist = {a: w for a, w in (("a1", x), ("a2", 1 - x)) if w > 0}
                moves[mem] = dist
                answer = "b1" if set(dist) == {"a2"} else "b2"
                relevant.extend((a, answer, mem) for a in dist)
            for targets in itertools.product(memory, repeat=len(relevant)):
                next_move, update = {}, {}
                for s in game.states:
                    for mem in memory:
                        if s == hub:
                            next_move[(s, mem)] = moves[mem]
                        else:
                            next_move[(s, mem)] = {game.actions1[s][0]: Fraction(1)}
                        for a in game.actions1[s]:
                            for b in game.actions2[s]:
                                update[(s, a, b, mem)] = mem
                for (a, b, mem), tgt in zip(relevant, targets):
                    update[(hub, a, b, mem)] = tgt
                yield FiniteMemoryStrategy(1, memory, memory[0], next_move, update)


# -- patience floor ------------------------------------------------------------


def patience_floor_check(n: int, epsilon, candidate: StationaryStrategy) -> bool:
    """Truth of: patience(candidate) < epsilon^(-1.5^(n-1)) implies the eps claim fails on G^n.

    The comparison P < eps^(-(3/2)^(n-1)) is decided exactly as
    P^(2^(n-1)) < eps^(-3^(n-1)).
    """
    epsilon = Fraction(epsilon)
    game = gen_gn(n)
    p = patience(candidate)
    below = p ** (2 ** (n - 1)) < (1 / epsilon) ** (3 ** (n - 1))
    if not below:
        return True
    return not verify_eps_claim(game, candidate, game.states, epsilon).passed


# -- coBuchi ---------------------------------------------------------------------


def _attractor(nodes, succ, pred, owner, player, target) -> set:
    """Nodes (within ``nodes``) from which ``player`` can force a visit to ``target``."""
    attr = set(target)
    count = {v: sum(1 for w in succ[v] if w in nodes) for v in nodes}
    todo = list(attr)
    while todo:
        w = todo.pop()
        for v in pred[w]:
            if v not in nodes or v in attr:
                continue
            if owner[v] == player:
                attr.add(v)
                todo.append(v)
            else:
                count[v] -= 1
                if count[v] == 0:
                    attr.add(v)
                    todo.append(v)
    return attr


def cobuchi_winning_set(game: GameStructure) -> frozenset:
    """Winning set of player 1 for "eventually only maximal-reward moves".

    Works on the graph with one node per state and one per move; move nodes
    with a non-maximal reward are the ones to avoid eventually.  Solved as the
    complement of player 2's Buchi winning region for those move nodes.
    """
    if not (game.is_turn_based() and game.is_deterministic()):
        raise GameError("coBuchi check needs a turn-based deterministic game")
    succ, owner = {}, {}
    bad = set()
    for s in game.states:
        chooser = 2 if len(game.actions2[s]) > 1 else 1
        owner[("s", s)] = chooser
        succ[("s", s)] = []
        for a in game.actions1[s]:
            for b in game.actions2[s]:
                e = ("e", s, a, b)
                (t,) = game.delta[(s, a, b)]
                succ[("s", s)].append(e)
                succ[e] = [("s", t)]
                owner[e] = 1
                if game.reward[(s, a, b)] != game.target_reward:
                    bad.add(e)
    pred = {v: [] for v in succ}
    for v, ws in succ.items():
        for w in ws:
            pred[w].append(v)
    nodes = set(succ)
    lost = set()
    while True:
        reach = _attractor(nodes, succ, pred, owner, 2, bad & nodes)
        safe = nodes - reach
        if not safe:
            break
        escape = _attractor(nodes, succ, pred, owner, 1, safe)
        lost |= escape
        nodes -= escape
    # player 2 wins Buchi on what is left; player 1 wins what was peeled off
    return frozenset(s for s in game.states if ("s", s) in lost)


# -- simulation ------------------------------------------------------------------


_SCALE = 1 << 128


class _Sampler:
    """Draws from exact rational distributions using 128-bit uniform integers."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.cache: dict = {}

    def draw(self, dist):
        key = id(dist)
        entry = self.cache.get(key)
        if entry is None or entry[0] is not dist:
            items = list(dist.items())
            cuts, acc = [], Fraction(0)
            for _, p in items:
                acc += p
                cuts.append(acc * _SCALE)
            entry = (dist, [x for x, _ in items], cuts)
            self.cache[key] = entry
        _, keys, cuts = entry
        u = self.rng.getrandbits(128)
        return keys[min(bisect.bisect_right(cuts, u), len(keys) - 1)]


class _Player:
    def __init__(self, sigma):
        self.sigma = sigma
        self.memory = sigma.initial if isinstance(sigma, FiniteMemoryStrategy) else None
        self.segment = 0
        self.left = None
        if isinstance(sigma, RoundIndexedStrategy):
            self.left, self.current = sigma.segment(0)

    def move(self, s):
        sigma = self.sigma
        if isinstance(sigma, StationaryStrategy):
            return sigma.at(s)
        if isinstance(sigma, FiniteMemoryStrategy):
            return sigma.next_move[(s, self.memory)]
        return self.current.at(s)

    def advance(self, s, a, b):
        sigma = self.sigma
        if isinstance(sigma, FiniteMemoryStrategy):
            self.memory = sigma.update[(s, a, b, self.memory)]
        elif isinstance(sigma, RoundIndexedStrategy) and self.left is not None:
            self.left -= 1
            if self.left == 0:
                self.segment += 1
                self.left, self.current = sigma.segment(self.segment)


@dataclass
class SimulationTrace:
    steps: int
    total_reward: Fraction
    checkpoints: dict  # step -> running average
    visits: dict

    @property
    def average(self) -> Fraction:
        return self.total_reward / self.steps


def simulate(
    game: GameStructure,
    sigma1,
    sigma2,
    start: str,
    steps: int,
    seed: int,
    checkpoints: Optional[Iterable[int]] = None,
) -> SimulationTrace:
    """Sample one play of ``steps`` rounds; statistics are exact rationals."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if start not in game.index:
        raise GameError(f"unknown start state {start}")
    marks = set(checkpoints) if checkpoints is not None else {10**k for k in range(1, 12) if 10**k <= steps}
    marks.add(steps)
    p1, p2 = _Player(sigma1), _Player(sigma2)
    sampler = _Sampler(seed)
    visits = {s: 0 for s in game.states}
    total = Fraction(0)
    seen = {}
    s = start
    for t in range(1, steps + 1):
        visits[s] += 1
        a = sampler.draw(p1.move(s))
        b = sampler.draw(p2.move(s))
        total += game.reward[(s, a, b)]
        nxt = sampler.draw(game.delta[(s, a, b)])
        p1.advance(s, a, b)
        p2.advance(s, a, b)
        if t in marks:
            seen[t] = total / t
        s = nxt
    return SimulationTrace(steps, total, seen, visits)
