"""Game structures, strategies and solver reports.

All probabilities and rewards are :class:`fractions.Fraction` values.  Every
container is treated as immutable once built; derived data (index maps,
successor sets, predecessor lists) is cached on first use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Optional

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class GameError(ValueError):
    """Base class for malformed games, strategies and input files."""


class ParseError(GameError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DistributionSumError(GameError):
    pass


class NonPositiveWeightError(GameError):
    pass


class RewardRangeError(GameError):
    pass


class MissingActionsError(GameError):
    pass


class MissingTransitionError(GameError):
    pass


class UnknownNameError(GameError):
    pass


class StrategyError(GameError):
    pass


def as_rational(value) -> Fraction:
    """Convert ``int``, ``Fraction`` or a ``"p/q"`` / decimal string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def check_distribution(dist: Mapping[str, Fraction], what: str) -> None:
    if not dist:
        raise DistributionSumError(f"{what}: empty distribution")
    total = ZERO
    for key, w in dist.items():
        if w <= 0:
            raise NonPositiveWeightError(f"{what}: weight of {key} is {format_rational(w)}, must be positive")
        total += w
    if total != 1:
        raise DistributionSumError(f"{what}: distribution sums to {format_rational(total)}")


@dataclass(frozen=True, eq=False)
class GameStructure:
    """Finite concurrent stochastic game with rational rewards in [0, 1].

    ``delta[(s, a, b)]`` maps successor state to its (positive) probability and
    ``reward[(s, a, b)]`` is the reward of the joint move.  Action names live
    in a per-(player, state) namespace, so the same name may appear at
    different states.
    """

    name: str
    states: tuple
    actions1: Mapping[str, tuple]
    actions2: Mapping[str, tuple]
    delta: Mapping[tuple, Mapping[str, Fraction]]
    reward: Mapping[tuple, Fraction]

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.states:
            raise GameError("game has no states")
        if len(set(self.states)) != len(self.states):
            raise GameError("duplicate state id")
        known = set(self.states)
        for player, acts in ((1, self.actions1), (2, self.actions2)):
            for s in self.states:
                if not acts.get(s):
                    raise MissingActionsError(f"state {s}: no actions for player {player}")
                if len(set(acts[s])) != len(acts[s]):
                    raise GameError(f"state {s}: duplicate action for player {player}")
            extra = set(acts) - known
            if extra:
                raise UnknownNameError(f"actions declared for unknown state {sorted(extra)[0]}")
        for s in self.states:
            for a in self.actions1[s]:
                for b in self.actions2[s]:
                    key = (s, a, b)
                    if key not in self.delta:
                        raise MissingTransitionError(f"no transition for state {s}, actions {a} {b}")
                    if key not in self.reward:
                        raise MissingTransitionError(f"no reward for state {s}, actions {a} {b}")
                    dist = self.delta[key]
                    for t in dist:
                        if t not in known:
                            raise UnknownNameError(f"transition {s} {a} {b}: unknown successor {t}")
                    check_distribution(dist, f"transition {s} {a} {b}")
                    r = self.reward[key]
                    if not (0 <= r <= 1):
                        raise RewardRangeError(f"transition {s} {a} {b}: reward {format_rational(r)} outside [0,1]")
        expected = sum(len(self.actions1[s]) * len(self.actions2[s]) for s in self.states)
        if len(self.delta) != expected:
            raise GameError("transition table has entries for undeclared actions")

    # -- derived quantities -------------------------------------------------

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    @property
    def n(self) -> int:
        return len(self.states)

    @cached_property
    def m(self) -> int:
        return max(max(len(self.actions1[s]), len(self.actions2[s])) for s in self.states)

    @cached_property
    def size(self) -> int:
        """|delta|: total number of (state, a, b, successor) entries."""
        return sum(len(d) for d in self.delta.values())

    @cached_property
    def delta_min(self) -> Fraction:
        return min(p for d in self.delta.values() for p in d.values())

    @cached_property
    def is_boolean(self) -> bool:
        return all(r in (ZERO, ONE) for r in self.reward.values())

    @cached_property
    def target_reward(self) -> Fraction:
        """Reward value a "good" joint move must earn.

        1 for boolean games; otherwise the maximal reward of the game.
        """
        if self.is_boolean:
            return ONE
        return max(self.reward.values())

    def actions(self, player: int, s: str) -> tuple:
        return self.actions1[s] if player == 1 else self.actions2[s]

    def succ(self, s: str, a: str, b: str) -> frozenset:
        return self._succ[(s, a, b)]

    @cached_property
    def _succ(self) -> dict:
        return {k: frozenset(d) for k, d in self.delta.items()}

    @cached_property
    def pred(self) -> dict:
        """state -> list of (t, a, b) with state in Succ(t, a, b)."""
        out = {s: [] for s in self.states}
        for s in self.states:
            for a in self.actions1[s]:
                for b in self.actions2[s]:
                    for t in self.delta[(s, a, b)]:
                        out[t].append((s, a, b))
        return out

    def is_turn_based(self) -> bool:
        return all(min(len(self.actions1[s]), len(self.actions2[s])) == 1 for s in self.states)

    def is_deterministic(self) -> bool:
        return all(len(d) == 1 for d in self.delta.values())

    def sorted_states(self, subset: Iterable[str]) -> list:
        subset = set(subset)
        return [s for s in self.states if s in subset]


def build_game(name, states, actions1, actions2, transitions) -> GameStructure:
    """Convenience constructor.

    ``transitions`` maps ``(s, a, b)`` to ``(reward, {t: p})``; rewards and
    probabilities may be ints, Fractions or strings.
    """
    delta = {}
    reward = {}
    for key, (r, dist) in transitions.items():
        delta[key] = {t: as_rational(p) for t, p in dist.items()}
        reward[key] = as_rational(r)
    return GameStructure(
        name=name,
        states=tuple(states),
        actions1={s: tuple(actions1[s]) for s in states},
        actions2={s: tuple(actions2[s]) for s in states},
        delta=delta,
        reward=reward,
    )


def normalize_rewards(game: GameStructure, shift=None, scale=None, rewards=None):
    """Shift and scale rewards into [0, 1].

    ``rewards`` optionally supplies arbitrary rational rewards keyed like
    ``game.reward`` (the stored game only holds rewards already in [0, 1]).
    With ``shift``/``scale`` omitted the range ``[lo, hi]`` of the rewards is
    mapped onto [0, 1].  Returns ``(new_game, degenerate)``; ``degenerate`` is
    True when all rewards were equal, in which case every reward becomes 1.
    """
    source = dict(rewards if rewards is not None else game.reward)
    source = {k: as_rational(v) for k, v in source.items()}
    if set(source) != set(game.delta):
        raise GameError("reward table does not match the transition table")
    degenerate = False
    if shift is None and scale is None:
        lo, hi = min(source.values()), max(source.values())
        if lo == hi:
            degenerate = True
            new = {k: ONE for k in source}
        else:
            shift, scale = -lo, 1 / (hi - lo)
            new = {k: scale * (v + shift) for k, v in source.items()}
    else:
        shift = as_rational(shift if shift is not None else 0)
        scale = as_rational(scale if scale is not None else 1)
        if scale <= 0:
            raise ValueError("scale must be positive")
        new = {k: scale * (v + shift) for k, v in source.items()}
    out = GameStructure(game.name, game.states, game.actions1, game.actions2, game.delta, new)
    return out, degenerate


@dataclass(frozen=True, eq=False)
class Dmpg:
    """Turn-based deterministic mean-payoff game with integer edge rewards >= 0."""

    name: str
    nodes: tuple
    owner: Mapping[str, int]
    edges: tuple  # (source, target, reward) in declaration order

    def __post_init__(self):
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise GameError("duplicate node id")
        for v in self.nodes:
            if self.owner.get(v) not in (1, 2):
                raise GameError(f"node {v}: owner must be 1 or 2")
        seen = set()
        for src, dst, r in self.edges:
            if src not in known or dst not in known:
                raise UnknownNameError(f"edge {src}->{dst}: unknown node")
            if not isinstance(r, int) or r < 0:
                raise GameError(f"edge {src}->{dst}: reward must be a nonnegative integer")
            if (src, dst) in seen:
                raise GameError(f"duplicate edge {src}->{dst}")
            seen.add((src, dst))
        for v in self.nodes:
            if not self.out_edges(v):
                raise GameError(f"node {v} has no outgoing edge")

    @property
    def max_reward(self) -> int:
        return max(r for _, _, r in self.edges)

    def out_edges(self, v) -> list:
        return [e for e in self.edges if e[0] == v]


# -- strategies -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StationaryStrategy:
    """Memoryless strategy: state -> {action: positive probability}."""

    player: int
    dist: Mapping[str, Mapping[str, Fraction]]
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.player not in (1, 2):
            raise StrategyError("player must be 1 or 2")
        for s, d in self.dist.items():
            check_distribution(d, f"strategy at {s}")

    def at(self, s: str) -> Mapping[str, Fraction]:
        return self.dist[s]

    @property
    def patience(self) -> Fraction:
        return patience(self)

    def is_positional(self) -> bool:
        return all(len(d) == 1 for d in self.dist.values())

    def validate(self, game: GameStructure) -> None:
        for s in game.states:
            if s not in self.dist:
                raise StrategyError(f"strategy has no distribution at {s}")
            allowed = set(game.actions(self.player, s))
            for a in self.dist[s]:
                if a not in allowed:
                    raise StrategyError(f"strategy plays {a} at {s}, not an action of player {self.player}")

    def __eq__(self, other):
        if not isinstance(other, StationaryStrategy):
            return NotImplemented
        return self.player == other.player and {s: dict(d) for s, d in self.dist.items()} == {
            s: dict(d) for s, d in other.dist.items()
        }

    __hash__ = None


def patience(sigma: StationaryStrategy) -> Fraction:
    """Largest inverse of a positive probability the strategy uses."""
    smallest = min(w for d in sigma.dist.values() for w in d.values())
    return 1 / smallest


def uniform(actions: Iterable[str]) -> dict:
    actions = list(actions)
    w = Fraction(1, len(actions))
    return {a: w for a in actions}


@dataclass(frozen=True)
class ConstructionTag:
    """Names the parametric construction behind a round-indexed strategy."""

    kind: str
    params: tuple = ()

    def describe(self) -> str:
        parts = []
        for key, value in self.params:
            if isinstance(value, Fraction):
                value = format_rational(value)
            parts.append(f"{key}={value}")
        return ",".join(parts)


class RoundIndexedStrategy:
    """Markov strategy: a stationary strategy per round, given as segments.

    Rounds are numbered from 1.  Segment ``k`` (0-based) covers ``length``
    consecutive rounds; a length of ``None`` means the segment lasts forever.
    Segments are produced lazily by ``segment_fn(k)`` and cached.
    """

    def __init__(
        self,
        player: int,
        tag: ConstructionTag,
        segment_fn: Callable[[int], tuple],
        metadata: Optional[dict] = None,
    ):
        self.player = player
        self.tag = tag
        self._segment_fn = segment_fn
        self._segments: list = []
        self.metadata = dict(metadata or {})

    def segment(self, k: int) -> tuple:
        while len(self._segments) <= k:
            if self._segments and self._segments[-1][0] is None:
                raise IndexError("strategy has a final infinite segment")
            length, strat = self._segment_fn(len(self._segments))
            if length is not None and length < 1:
                raise StrategyError("segment lengths must be positive")
            if strat.player != self.player:
                raise StrategyError("segment strategy belongs to the wrong player")
            self._segments.append((length, strat))
        return self._segments[k]

    @property
    def materialized(self) -> list:
        return list(self._segments)

    def strategy_at(self, t: int) -> StationaryStrategy:
        if t < 1:
            raise ValueError("rounds are numbered from 1")
        start = 1
        k = 0
        while True:
            length, strat = self.segment(k)
            if length is None or t < start + length:
                return strat
            start += length
            k += 1

    def segment_bounds(self, k: int) -> tuple:
        """First and last round of segment ``k`` (last is None if infinite)."""
        start = 1
        for i in range(k):
            length, _ = self.segment(i)
            start += length
        length, _ = self.segment(k)
        return start, (None if length is None else start + length - 1)

    def time_dependent_memory(self, T: int) -> int:
        if T < 1:
            raise ValueError("T must be positive")
        return T


@dataclass(frozen=True, eq=False)
class FiniteMemoryStrategy:
    """Strategy with a finite memory: next-move and deterministic update tables.

    ``next_move[(s, mem)]`` is a distribution over the player's actions at
    ``s`` and ``update[(s, a, b, mem)]`` is the next memory state.
    """

    player: int
    memory: tuple
    initial: str
    next_move: Mapping[tuple, Mapping[str, Fraction]]
    update: Mapping[tuple, str]

    def __post_init__(self):
        if self.initial not in self.memory:
            raise StrategyError("initial memory state not declared")
        for key, d in self.next_move.items():
            check_distribution(d, f"next move at {key}")
        mem = set(self.memory)
        for key, nxt in self.update.items():
            if nxt not in mem:
                raise StrategyError(f"update {key} leads to undeclared memory {nxt}")

    def validate(self, game: GameStructure) -> None:
        for s in game.states:
            for mstate in self.memory:
                d = self.next_move.get((s, mstate))
                if d is None:
                    raise StrategyError(f"no move at ({s}, {mstate})")
                for a in d:
                    if a not in game.actions(self.player, s):
                        raise StrategyError(f"move {a} at {s} is not an action of player {self.player}")
                for a in game.actions1[s]:
                    for b in game.actions2[s]:
                        if (s, a, b, mstate) not in self.update:
                            raise StrategyError(f"update undefined at ({s}, {a}, {b}, {mstate})")

    def time_dependent_memory(self, T: int) -> int:
        return len(self.memory)


# -- reports ------------------------------------------------------------------


@dataclass
class SolveReport:
    """Winning set plus the level decomposition a solver produced.

    ``y_chain`` is ``[Y_0, Y_1, ..., Y_l]`` for the final inner least fixpoint
    (Y_0 empty, Y_l the winning set); ``x_chain`` the outer chain
    ``[X_0 = S, X_1, ...]`` for the almost-sure solvers.
    """

    objective: str  # "almost" | "positive"
    algorithm: str  # "naive" | "improved"
    states: tuple
    winning: frozenset
    levels: dict
    y_chain: list = field(default_factory=list)
    x_chain: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)

    @property
    def winning_set(self) -> list:
        return [s for s in self.states if s in self.winning]

    def layer_of(self, s: str) -> int:
        """Index i with s in Y_i \\ Y_{i-1}; 0 if s is not winning."""
        for i in range(1, len(self.y_chain)):
            if s in self.y_chain[i] and s not in self.y_chain[i - 1]:
                return i
        return 0

    def to_text(self) -> str:
        lines = []
        for s in self.states:
            flag = "yes" if s in self.winning else "no"
            lines.append(f"{s} level={self.levels.get(s, 0)} in_winning={flag}")
        return "\n".join(lines) + "\n"


def integer_root_le(base: Fraction, exponent: int, value: Fraction) -> bool:
    """Decide ``value <= base ** exponent`` exactly for base >= 1, value > 0.

    Avoids materializing huge powers when bit-length estimates settle it.
    """
    if value <= 0:
        return True
    if exponent == 0:
        return value <= 1
    if base == 1:
        return value <= 1
    # log2 bounds: floor/ceil via bit lengths of numerator and denominator
    def log2_bounds(q: Fraction) -> tuple:
        num, den = q.numerator, q.denominator
        lo = (num.bit_length() - 1) - den.bit_length()
        hi = num.bit_length() - (den.bit_length() - 1)
        return lo, hi

    b_lo, b_hi = log2_bounds(base)
    v_lo, v_hi = log2_bounds(value)
    if b_lo > 0 and v_hi <= b_lo * exponent:
        return True
    if v_lo > b_hi * exponent:
        return False
    # fall back to floating logs with a safety margin, then exact
    lb = math.log2(base.numerator) - math.log2(base.denominator)
    lv = math.log2(value.numerator) - math.log2(value.denominator)
    margin = 1e-9 * max(1.0, abs(lb * exponent)) + 1e-6
    if lv < lb * exponent - margin:
        return True
    if lv > lb * exponent + margin:
        return False
    return value <= base**exponent
