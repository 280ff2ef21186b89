"""Text formats: ``.cmpg`` games, ``.dmpg`` games and strategy files.

``.cmpg`` (one directive per line, ``#`` starts a comment)::

    game NAME
    state SID
    actions1 SID A1 A2 ...
    actions2 SID B1 B2 ...
    trans SID A B r=R -> T1:P1 T2:P2 ...

``.dmpg``::

    dmpg NAME
    node SID owner=1|2
    edge SID TID r=INT
"""

from __future__ import annotations

from fractions import Fraction

from .model import (
    ConstructionTag,
    DistributionSumError,
    Dmpg,
    FiniteMemoryStrategy,
    GameError,
    GameStructure,
    MissingActionsError,
    MissingTransitionError,
    NonPositiveWeightError,
    ParseError,
    RewardRangeError,
    RoundIndexedStrategy,
    StationaryStrategy,
    StrategyError,
    UnknownNameError,
    as_rational,
    format_rational,
)


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _rational(token: str, lineno: int) -> Fraction:
    try:
        return as_rational(token)
    except ValueError:
        raise ParseError(f"bad rational {token!r}", lineno) from None


def _keyval(token: str, key: str, lineno: int) -> str:
    prefix = key + "="
    if not token.startswith(prefix):
        raise ParseError(f"expected {prefix}..., got {token!r}", lineno)
    return token[len(prefix):]


def parse_game(text: str) -> GameStructure:
    name = None
    states: list = []
    actions1: dict = {}
    actions2: dict = {}
    delta: dict = {}
    reward: dict = {}
    trans_line: dict = {}
    for lineno, tok in _lines(text):
        kw = tok[0]
        if kw == "game":
            if len(tok) != 2:
                raise ParseError("expected: game NAME", lineno)
            if name is not None:
                raise ParseError("duplicate game header", lineno)
            name = tok[1]
        elif kw == "state":
            if len(tok) != 2:
                raise ParseError("expected: state SID", lineno)
            if tok[1] in states:
                raise ParseError(f"duplicate state {tok[1]}", lineno)
            states.append(tok[1])
        elif kw in ("actions1", "actions2"):
            if len(tok) < 3:
                raise ParseError(f"expected: {kw} SID ACTION...", lineno)
            sid = tok[1]
            if sid not in states:
                raise UnknownNameError(f"line {lineno}: unknown state {sid}")
            table = actions1 if kw == "actions1" else actions2
            if sid in table:
                raise ParseError(f"duplicate {kw} for {sid}", lineno)
            if len(set(tok[2:])) != len(tok) - 2:
                raise ParseError(f"duplicate action name in {kw} {sid}", lineno)
            table[sid] = tuple(tok[2:])
        elif kw == "trans":
            if len(tok) < 7 or tok[5] != "->":
                raise ParseError("expected: trans SID A B r=R -> T:P ...", lineno)
            sid, a, b = tok[1], tok[2], tok[3]
            if sid not in states:
                raise UnknownNameError(f"line {lineno}: unknown state {sid}")
            if sid not in actions1 or sid not in actions2:
                raise MissingActionsError(f"line {lineno}: actions of {sid} must be declared before its transitions")
            if a not in actions1[sid]:
                raise UnknownNameError(f"line {lineno}: {a} is not a player-1 action at {sid}")
            if b not in actions2[sid]:
                raise UnknownNameError(f"line {lineno}: {b} is not a player-2 action at {sid}")
            key = (sid, a, b)
            if key in delta:
                raise ParseError(f"duplicate transition {sid} {a} {b}", lineno)
            r = _rational(_keyval(tok[4], "r", lineno), lineno)
            if not (0 <= r <= 1):
                raise RewardRangeError(f"line {lineno}: reward {format_rational(r)} outside [0,1]")
            dist: dict = {}
            for item in tok[6:]:
                if ":" not in item:
                    raise ParseError(f"expected T:P, got {item!r}", lineno)
                t, p = item.split(":", 1)
                if t in dist:
                    raise ParseError(f"successor {t} listed twice", lineno)
                dist[t] = _rational(p, lineno)
            for t, p in dist.items():
                if p <= 0:
                    raise NonPositiveWeightError(f"line {lineno}: probability of {t} is {format_rational(p)}")
            total = sum(dist.values(), Fraction(0))
            if total != 1:
                raise DistributionSumError(f"line {lineno}: distribution sums to {format_rational(total)}")
            delta[key] = dist
            reward[key] = r
            trans_line[key] = lineno
        else:
            raise ParseError(f"unknown directive {kw!r}", lineno)
    if name is None:
        raise ParseError("missing 'game NAME' header")
    for t_key, lineno in trans_line.items():
        for t in delta[t_key]:
            if t not in states:
                raise UnknownNameError(f"line {lineno}: unknown successor state {t}")
    for s in states:
        if s not in actions1 or s not in actions2:
            raise MissingActionsError(f"state {s}: missing action set")
        for a in actions1[s]:
            for b in actions2[s]:
                if (s, a, b) not in delta:
                    raise MissingTransitionError(f"missing transition for {s} {a} {b}")
    return GameStructure(name, tuple(states), actions1, actions2, delta, reward)


def serialize_game(game: GameStructure) -> str:
    out = [f"game {game.name}"]
    for s in game.states:
        out.append(f"state {s}")
    for s in game.states:
        out.append(f"actions1 {s} " + " ".join(game.actions1[s]))
        out.append(f"actions2 {s} " + " ".join(game.actions2[s]))
    order = game.index
    for s in game.states:
        for a in game.actions1[s]:
            for b in game.actions2[s]:
                dist = game.delta[(s, a, b)]
                succ = " ".join(
                    f"{t}:{format_rational(dist[t])}" for t in sorted(dist, key=order.__getitem__)
                )
                out.append(f"trans {s} {a} {b} r={format_rational(game.reward[(s, a, b)])} -> {succ}")
    return "\n".join(out) + "\n"


def parse_dmpg(text: str) -> Dmpg:
    name = None
    nodes: list = []
    owner: dict = {}
    edges: list = []
    for lineno, tok in _lines(text):
        kw = tok[0]
        if kw == "dmpg":
            if len(tok) != 2:
                raise ParseError("expected: dmpg NAME", lineno)
            name = tok[1]
        elif kw == "node":
            if len(tok) != 3:
                raise ParseError("expected: node SID owner=1|2", lineno)
            val = _keyval(tok[2], "owner", lineno)
            if val not in ("1", "2"):
                raise ParseError("owner must be 1 or 2", lineno)
            if tok[1] in owner:
                raise ParseError(f"duplicate node {tok[1]}", lineno)
            nodes.append(tok[1])
            owner[tok[1]] = int(val)
        elif kw == "edge":
            if len(tok) != 4:
                raise ParseError("expected: edge SID TID r=INT", lineno)
            val = _keyval(tok[3], "r", lineno)
            try:
                r = int(val)
            except ValueError:
                raise ParseError(f"edge reward must be an integer, got {val!r}", lineno) from None
            if r < 0:
                raise ParseError("edge reward must be nonnegative", lineno)
            for v in tok[1:3]:
                if v not in owner:
                    raise UnknownNameError(f"line {lineno}: unknown node {v}")
            edges.append((tok[1], tok[2], r))
        else:
            raise ParseError(f"unknown directive {kw!r}", lineno)
    if name is None:
        raise ParseError("missing 'dmpg NAME' header")
    return Dmpg(name, tuple(nodes), owner, tuple(edges))


def serialize_dmpg(d: Dmpg) -> str:
    out = [f"dmpg {d.name}"]
    out += [f"node {v} owner={d.owner[v]}" for v in d.nodes]
    out += [f"edge {s} {t} r={r}" for s, t, r in d.edges]
    return "\n".join(out) + "\n"


# -- strategies ---------------------------------------------------------------


def _dist_line(s: str, dist, order=None) -> str:
    keys = list(dist) if order is None else [a for a in order if a in dist]
    return f"at {s}: " + " ".join(f"{a}={format_rational(dist[a])}" for a in keys)


def _stationary_body(sigma: StationaryStrategy, game: GameStructure | None) -> list:
    states = game.states if game is not None else list(sigma.dist)
    lines = []
    for s in states:
        order = game.actions(sigma.player, s) if game is not None else None
        lines.append(_dist_line(s, sigma.dist[s], order))
    return lines


def serialize_strategy(sigma, game: GameStructure | None = None, rounds: int | None = None) -> str:
    """Serialize any of the three strategy classes.

    For round-indexed strategies, segments are materialized until they cover
    ``rounds`` rounds (default: whatever is already materialized, at least one
    segment).
    """
    if isinstance(sigma, StationaryStrategy):
        return "\n".join([f"stationary player={sigma.player}"] + _stationary_body(sigma, game)) + "\n"
    if isinstance(sigma, RoundIndexedStrategy):
        if rounds is not None:
            k = 0
            while True:
                start, end = sigma.segment_bounds(k)
                if end is None or end >= rounds:
                    break
                k += 1
        elif not sigma.materialized:
            sigma.segment(0)
        out = [f"markov player={sigma.player} kind={sigma.tag.kind} param={sigma.tag.describe() or '-'}"]
        start = 1
        for length, strat in sigma.materialized:
            end = "*" if length is None else str(start + length - 1)
            out.append(f"segment {start}..{end}:")
            out += _stationary_body(strat, game)
            if length is None:
                break
            start += length
        return "\n".join(out) + "\n"
    if isinstance(sigma, FiniteMemoryStrategy):
        out = [
            f"finite-memory player={sigma.player} memory={','.join(sigma.memory)} initial={sigma.initial}"
        ]
        for (s, mstate), dist in sigma.next_move.items():
            out.append(f"move {s} {mstate}: " + " ".join(f"{a}={format_rational(w)}" for a, w in dist.items()))
        for (s, a, b, mstate), nxt in sigma.update.items():
            out.append(f"update {s} {a} {b} {mstate} -> {nxt}")
        return "\n".join(out) + "\n"
    raise TypeError(f"not a strategy: {type(sigma).__name__}")


def _parse_weights(tokens, lineno) -> dict:
    dist = {}
    for item in tokens:
        if "=" not in item:
            raise ParseError(f"expected ACTION=p/q, got {item!r}", lineno)
        a, w = item.split("=", 1)
        dist[a] = _rational(w, lineno)
    return dist


def parse_strategy(text: str):
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty strategy file")
    lineno, head = lines[0]
    kind = head[0]
    if kind == "stationary":
        if len(head) != 2:
            raise ParseError("expected: stationary player=1|2", lineno)
        player = int(_keyval(head[1], "player", lineno))
        dist = {}
        for lineno, tok in lines[1:]:
            if tok[0] != "at" or not tok[1].endswith(":"):
                raise ParseError("expected: at SID: A=p/q ...", lineno)
            dist[tok[1][:-1]] = _parse_weights(tok[2:], lineno)
        try:
            return StationaryStrategy(player, dist)
        except GameError as exc:
            raise StrategyError(str(exc)) from None
    if kind == "markov":
        if len(head) != 4:
            raise ParseError("expected: markov player=P kind=K param=...", lineno)
        player = int(_keyval(head[1], "player", lineno))
        tag_kind = _keyval(head[2], "kind", lineno)
        param = _keyval(head[3], "param", lineno)
        segments = []
        current = None
        for lineno, tok in lines[1:]:
            if tok[0] == "segment":
                lo, hi = tok[1].rstrip(":").split("..")
                length = None if hi == "*" else int(hi) - int(lo) + 1
                current = {}
                segments.append((length, current))
            elif tok[0] == "at":
                if current is None:
                    raise ParseError("distribution outside a segment", lineno)
                current[tok[1][:-1]] = _parse_weights(tok[2:], lineno)
            else:
                raise ParseError(f"unexpected {tok[0]!r}", lineno)
        built = [(length, StationaryStrategy(player, d)) for length, d in segments]
        tag = ConstructionTag(tag_kind, (("param", param),) if param != "-" else ())

        def segment_fn(k):
            if k >= len(built):
                raise StrategyError("round beyond the materialized prefix of a parsed Markov strategy")
            return built[k]

        return RoundIndexedStrategy(player, tag, segment_fn)
    if kind == "finite-memory":
        if len(head) != 4:
            raise ParseError("expected: finite-memory player=P memory=M1,M2 initial=M", lineno)
        player = int(_keyval(head[1], "player", lineno))
        memory = tuple(_keyval(head[2], "memory", lineno).split(","))
        initial = _keyval(head[3], "initial", lineno)
        next_move, update = {}, {}
        for lineno, tok in lines[1:]:
            if tok[0] == "move" and len(tok) >= 4 and tok[2].endswith(":"):
                next_move[(tok[1], tok[2][:-1])] = _parse_weights(tok[3:], lineno)
            elif tok[0] == "update" and len(tok) == 7 and tok[5] == "->":
                update[(tok[1], tok[2], tok[3], tok[4])] = tok[6]
            else:
                raise ParseError("expected a move or update line", lineno)
        return FiniteMemoryStrategy(player, memory, initial, next_move, update)
    raise ParseError(f"unknown strategy kind {kind!r}", lineno)
