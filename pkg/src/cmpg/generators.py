"""Named game families and seeded random generators."""

from __future__ import annotations

import random
from fractions import Fraction

from .model import Dmpg, GameStructure, build_game


def gen_gn(n: int) -> GameStructure:
    """Family G^n: states v0..vn, v0 absorbing with reward 1.

    At v^l (l >= 1) both players pick from two actions; matching on the first
    action moves to v^{l-1}, matching on the second stays with reward 1, and
    a mismatch jumps to v^n with reward 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    states = [f"v{i}" for i in range(n + 1)]
    a1 = {"v0": ["a"]}
    a2 = {"v0": ["b"]}
    trans = {("v0", "a", "b"): (1, {"v0": 1})}
    last = f"v{n}"
    for l in range(1, n + 1):
        s = f"v{l}"
        a1[s] = ["a1", "a2"]
        a2[s] = ["b1", "b2"]
        trans[(s, "a1", "b1")] = (0, {f"v{l - 1}": 1})
        trans[(s, "a2", "b2")] = (1, {s: 1})
        trans[(s, "a1", "b2")] = (0, {last: 1})
        trans[(s, "a2", "b1")] = (0, {last: 1})
    return build_game(f"G{n}", states, a1, a2, trans)


def gen_gbar() -> GameStructure:
    """Three-state game with absorbing v0 (reward 0) and v1 (reward 1)."""
    states = ["v0", "v1", "v"]
    a1 = {"v0": ["a"], "v1": ["a"], "v": ["a1", "a2"]}
    a2 = {"v0": ["b"], "v1": ["b"], "v": ["b1", "b2"]}
    trans = {
        ("v0", "a", "b"): (0, {"v0": 1}),
        ("v1", "a", "b"): (1, {"v1": 1}),
        ("v", "a1", "b1"): (0, {"v1": 1}),
        ("v", "a2", "b2"): (1, {"v": 1}),
        ("v", "a1", "b2"): (0, {"v0": 1}),
        ("v", "a2", "b1"): (0, {"v0": 1}),
    }
    return build_game("Gbar", states, a1, a2, trans)


def gen_gm(m: int) -> GameStructure:
    """Single-state game with m actions per side; matching actions pay 0."""
    if m < 1:
        raise ValueError("m must be >= 1")
    acts1 = [f"a{i}" for i in range(1, m + 1)]
    acts2 = [f"b{i}" for i in range(1, m + 1)]
    trans = {}
    for i, a in enumerate(acts1):
        for j, b in enumerate(acts2):
            trans[("v", a, b)] = (0 if i == j else 1, {"v": 1})
    return build_game(f"Gm{m}", ["v"], {"v": acts1}, {"v": acts2}, trans)


def gen_pennies(variant: bool = False) -> GameStructure:
    """Matching pennies as a two-state game; s1 is absorbing with reward 1.

    Classical: any match moves to s1, a mismatch stays at s0 with reward 0.
    Variant: matching heads pays 1 and stays at s0; matching tails pays 1 and
    moves to s1.
    """
    states = ["s0", "s1"]
    a1 = {"s0": ["t", "h"], "s1": ["a"]}
    a2 = {"s0": ["t", "h"], "s1": ["b"]}
    trans = {
        ("s1", "a", "b"): (1, {"s1": 1}),
        ("s0", "t", "h"): (0, {"s0": 1}),
        ("s0", "h", "t"): (0, {"s0": 1}),
    }
    if variant:
        trans[("s0", "t", "t")] = (1, {"s1": 1})
        trans[("s0", "h", "h")] = (1, {"s0": 1})
    else:
        trans[("s0", "t", "t")] = (0, {"s1": 1})
        trans[("s0", "h", "h")] = (0, {"s1": 1})
    return build_game("pennies-variant" if variant else "pennies", states, a1, a2, trans)


def _random_dist(rng: random.Random, targets: list) -> dict:
    weights = [rng.randint(1, 4) for _ in targets]
    total = sum(weights)
    return {t: Fraction(w, total) for t, w in zip(targets, weights)}


def gen_random(
    n: int,
    m_max: int = 2,
    branching: int = 2,
    reward_density: float = 0.5,
    seed: int = 0,
    deterministic_fraction: float = 0.5,
) -> GameStructure:
    """Seeded random concurrent game.

    Each state gets 1..m_max actions per player.  A joint move is Dirac with
    probability ``deterministic_fraction``; otherwise it spreads over
    1..branching distinct successors with random small-integer weights.
    Rewards are boolean, 1 with probability ``reward_density``.
    """
    rng = random.Random(seed)
    states = [f"s{i}" for i in range(n)]
    a1, a2, trans = {}, {}, {}
    for s in states:
        a1[s] = [f"a{i}" for i in range(1, rng.randint(1, m_max) + 1)]
        a2[s] = [f"b{i}" for i in range(1, rng.randint(1, m_max) + 1)]
        for a in a1[s]:
            for b in a2[s]:
                if rng.random() < deterministic_fraction:
                    k = 1
                else:
                    k = rng.randint(1, min(branching, n))
                targets = rng.sample(states, k)
                r = 1 if rng.random() < reward_density else 0
                trans[(s, a, b)] = (r, _random_dist(rng, targets))
    return build_game(f"random{n}_{seed}", states, a1, a2, trans)


def gen_random_turn_based(n: int, max_out: int = 3, reward_density: float = 0.6, seed: int = 0) -> GameStructure:
    """Seeded random turn-based deterministic game with boolean rewards."""
    rng = random.Random(seed)
    states = [f"s{i}" for i in range(n)]
    a1, a2, trans = {}, {}, {}
    for s in states:
        k = rng.randint(1, max_out)
        moves = [f"e{i}" for i in range(1, k + 1)]
        if rng.random() < 0.5:
            a1[s], a2[s] = moves, ["-"]
        else:
            a1[s], a2[s] = ["-"], moves
        for mv in moves:
            key = (s, mv, "-") if a2[s] == ["-"] else (s, "-", mv)
            r = 1 if rng.random() < reward_density else 0
            trans[key] = (r, {rng.choice(states): 1})
    return build_game(f"tb{n}_{seed}", states, a1, a2, trans)


def gen_random_dmpg(n: int, max_out: int = 3, max_reward: int = 4, seed: int = 0) -> Dmpg:
    """Seeded random DMPG; at least one edge carries a positive reward."""
    rng = random.Random(seed)
    nodes = [f"u{i}" for i in range(n)]
    owner = {v: rng.choice((1, 2)) for v in nodes}
    edges = []
    for v in nodes:
        k = rng.randint(1, min(max_out, n))
        for t in rng.sample(nodes, k):
            edges.append((v, t, rng.randint(0, max_reward)))
    if all(r == 0 for _, _, r in edges):
        s, t, _ = edges[0]
        edges[0] = (s, t, max(1, max_reward))
    return Dmpg(f"dmpg{n}_{seed}", tuple(nodes), owner, tuple(edges))


def reweight(game: GameStructure, seed: int) -> GameStructure:
    """Same supports, fresh random positive probabilities."""
    rng = random.Random(seed)
    delta = {k: _random_dist(rng, list(d)) for k, d in game.delta.items()}
    return GameStructure(game.name, game.states, game.actions1, game.actions2, delta, dict(game.reward))
