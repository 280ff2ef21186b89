"""Command-line front end: ``cmpg <command> ...``.

Exit codes: 0 ok, 1 claim failed (or nothing to synthesize), 2 input error,
3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import fileio, generators
from .model import GameError, StationaryStrategy, as_rational, format_rational
from .reduction import dmpg_value_bruteforce, reduce_dmpg
from .solver import almost_set_improved, almost_set_naive, positive_set
from .synthesis import (
    SynthesisError,
    patience,
    spoiler_constant,
    synth_eps_stationary,
    synth_markov_almost,
    synth_positive_markov,
    synth_positive_spoiler_stationary,
    synth_spoiler_markov,
)
from .verification import simulate, verify_eps_claim, verify_spoiler_stationary

OK, CLAIM_FAILED, INPUT_ERROR, INCONSISTENT = 0, 1, 2, 3

# rounds written out for strategies whose schedule changes every round
PER_ROUND_PREFIX = 8


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_game(path):
    return fileio.parse_game(_read(path))


def _rational(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (ValueError, ZeroDivisionError, GameError):
        raise InputError(f"not a rational number: {text!r}") from None


def _set_text(game, states) -> str:
    return "{" + ", ".join(game.sorted_states(states)) + "}"


def cmd_solve(args, out) -> int:
    game = _load_game(args.file)
    if args.objective == "positive":
        report = positive_set(game)
        out.write(f"winning {_set_text(game, report.winning)}\n")
        out.write(report.to_text())
        return OK
    reports = []
    if args.algo in ("naive", "both"):
        reports.append(almost_set_naive(game))
    if args.algo in ("improved", "both"):
        reports.append(almost_set_improved(game))
    for report in reports:
        out.write(f"[{report.algorithm}] winning {_set_text(game, report.winning)}\n")
        out.write(report.to_text())
    if len(reports) == 2:
        naive, improved = reports
        only_naive = naive.winning - improved.winning
        only_improved = improved.winning - naive.winning
        out.write("DIFF\n")
        out.write(f"only-naive {_set_text(game, only_naive)}\n")
        out.write(f"only-improved {_set_text(game, only_improved)}\n")
        if only_naive or only_improved:
            return INCONSISTENT
    return OK


def cmd_synth(args, out) -> int:
    game = _load_game(args.file)
    eps = _rational(args.eps)
    kind = args.kind
    rounds = None
    if kind in ("eps-stationary", "markov-as", "spoiler-markov"):
        report = almost_set_naive(game)
        if kind == "spoiler-markov":
            if report.winning == frozenset(game.states):
                out.write("nothing to synthesize: every state is almost-sure winning\n")
                return CLAIM_FAILED
            sigma = synth_spoiler_markov(game, report, eps)
            rounds = PER_ROUND_PREFIX
        elif not report.winning:
            out.write("nothing to synthesize: almost-sure winning set is empty\n")
            return CLAIM_FAILED
        elif kind == "eps-stationary":
            sigma = synth_eps_stationary(game, report, eps)
        else:
            sigma = synth_markov_almost(game, report)
    else:
        report = positive_set(game)
        if kind == "spoiler-stationary":
            if report.winning == frozenset(game.states):
                out.write("nothing to synthesize: every state is positively winning\n")
                return CLAIM_FAILED
            sigma = synth_positive_spoiler_stationary(game, report)
        else:
            if not report.winning:
                out.write("nothing to synthesize: positive winning set is empty\n")
                return CLAIM_FAILED
            sigma = synth_positive_markov(game, report)
            rounds = PER_ROUND_PREFIX
    text = fileio.serialize_strategy(sigma, game, rounds)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    if isinstance(sigma, StationaryStrategy):
        out.write(f"patience {format_rational(patience(sigma))}\n")
        for key, value in sorted(sigma.metadata.items()):
            out.write(f"{key} {format_rational(value)}\n")
    else:
        out.write(f"construction {sigma.tag.kind} {sigma.tag.describe()}\n")
        worst = max(patience(strat) for _, strat in sigma.materialized)
        out.write(f"patience-of-materialized-prefix {format_rational(worst)}\n")
        for key, value in sorted(sigma.metadata.items()):
            out.write(f"{key} {format_rational(value)}\n")
        out.write("time-dependent-memory T\n")
    return OK


def cmd_verify(args, out) -> int:
    game = _load_game(args.file)
    sigma = fileio.parse_strategy(_read(args.strategy))
    if not isinstance(sigma, StationaryStrategy):
        raise InputError("verify checks stationary strategies only")
    sigma.validate(game)
    if args.claim == "eps-as":
        if sigma.player != 1:
            raise InputError("eps-as needs a player-1 strategy")
        if args.param is None:
            raise InputError("eps-as needs --param EPS")
        xstar = almost_set_improved(game).winning
        report = verify_eps_claim(game, sigma, xstar, _rational(args.param))
    else:
        if sigma.player != 2:
            raise InputError("spoiler-pos needs a player-2 strategy")
        c = spoiler_constant(game) if args.param is None else _rational(args.param)
        complement = frozenset(game.states) - positive_set(game).winning
        report = verify_spoiler_stationary(game, sigma, complement, c)
    out.write(report.to_text())
    return OK if report.passed else CLAIM_FAILED


def cmd_gen(args, out) -> int:
    fam = args.family
    if fam == "gn":
        game = generators.gen_gn(args.n)
    elif fam == "gbar":
        game = generators.gen_gbar()
    elif fam == "gm":
        game = generators.gen_gm(args.m)
    elif fam == "pennies":
        game = generators.gen_pennies(False)
    elif fam == "pennies-variant":
        game = generators.gen_pennies(True)
    else:
        game = generators.gen_random(args.n, m_max=args.m, seed=args.seed)
    out.write(fileio.serialize_game(game))
    return OK


def cmd_reduce(args, out) -> int:
    d = fileio.parse_dmpg(_read(args.file))
    game, gmap = reduce_dmpg(d)
    out.write(fileio.serialize_game(game))
    sidecar = gmap.to_text(d)
    if args.map:
        with open(args.map, "w") as fh:
            fh.write(sidecar)
    else:
        for line in sidecar.splitlines():
            out.write(line if line.startswith("#") else "# " + line)
            out.write("\n")
    return OK


def cmd_dmpg_value(args, out) -> int:
    d = fileio.parse_dmpg(_read(args.file))
    if args.state not in d.owner:
        raise InputError(f"unknown node {args.state}")
    out.write(format_rational(dmpg_value_bruteforce(d, args.state)) + "\n")
    return OK


def cmd_simulate(args, out) -> int:
    game = _load_game(args.file)
    strategies = [fileio.parse_strategy(_read(p)) for p in args.strategies]
    by_player = {s.player: s for s in strategies}
    if set(by_player) != {1, 2}:
        raise InputError("simulate needs one strategy per player")
    trace = simulate(game, by_player[1], by_player[2], args.start, args.steps, args.seed)
    for t, avg in sorted(trace.checkpoints.items()):
        out.write(f"step {t} average={format_rational(avg)} ~{float(avg):.6f}\n")
    for s in game.states:
        out.write(f"visits {s} {trace.visits[s]}\n")
    return OK


def _bench_one(job):
    n, seed = job
    game = generators.gen_random(n, m_max=2, branching=2, reward_density=0.8, seed=seed)
    t0 = time.perf_counter()
    naive = almost_set_naive(game)
    t1 = time.perf_counter()
    improved = almost_set_improved(game)
    t2 = time.perf_counter()
    c = improved.counters
    return (
        n,
        seed,
        game.size,
        (t1 - t0) * 1000,
        (t2 - t1) * 1000,
        sum(c["process_calls"].values()),
        sum(c["remove_calls"].values()),
        c["work"],
        naive.winning == improved.winning,
    )


def cmd_bench(args, out) -> int:
    try:
        sizes = [int(x) for x in args.sizes.split(",") if x]
    except ValueError:
        raise InputError(f"bad --sizes {args.sizes!r}") from None
    jobs = [(n, seed) for n in sizes for seed in range(args.seeds)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    out.write("n seed |delta| naive_ms improved_ms process remove work work/(n|delta|)\n")
    agree = True
    for n, seed, size, tn, ti, proc, rem, work, same in rows:
        agree &= same
        out.write(f"{n} {seed} {size} {tn:.1f} {ti:.1f} {proc} {rem} {work} {work / (n * size):.3f}\n")
    if not agree:
        out.write("MISMATCH between naive and improved solvers\n")
        return INCONSISTENT
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmpg", description="Qualitative analysis of concurrent mean-payoff games.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="almost-sure or positive winning set")
    s.add_argument("file")
    s.add_argument("--objective", choices=["almost", "positive"], default="almost")
    s.add_argument("--algo", choices=["naive", "improved", "both"], default="improved")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("synth", help="witness strategy synthesis")
    s.add_argument("file")
    s.add_argument(
        "--kind",
        choices=["eps-stationary", "markov-as", "spoiler-markov", "positive-markov", "spoiler-stationary"],
        default="eps-stationary",
    )
    s.add_argument("--eps", default="1/4", help="epsilon (spoiler-markov: coin parameter)")
    s.add_argument("--out", help="write the strategy here instead of stdout")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("verify", help="check a stationary strategy against a claim")
    s.add_argument("file")
    s.add_argument("--strategy", required=True)
    s.add_argument("--claim", choices=["eps-as", "spoiler-pos"], required=True)
    s.add_argument("--param", help="epsilon for eps-as, c for spoiler-pos")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("gen", help="print a generated game")
    s.add_argument("--family", choices=["gn", "gbar", "gm", "pennies", "pennies-variant", "random"], required=True)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("reduce", help="reduce a .dmpg game to a boolean concurrent game")
    s.add_argument("file")
    s.add_argument("--map", help="write the edge-to-gadget map here (default: comments on stdout)")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("dmpg-value", help="value of a DMPG node by positional enumeration")
    s.add_argument("file")
    s.add_argument("--state", required=True)
    s.set_defaults(func=cmd_dmpg_value)

    s = sub.add_parser("simulate", help="sample one play")
    s.add_argument("file")
    s.add_argument("strategies", nargs=2, metavar="STRATEGY")
    s.add_argument("--start", required=True)
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("bench", help="naive vs improved solver on random games")
    s.add_argument("--sizes", default="50,100,200")
    s.add_argument("--seeds", type=int, default=3)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    try:
        return args.func(args, out)
    except (InputError, GameError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return INPUT_ERROR
    except SynthesisError as exc:
        sys.stderr.write(f"internal inconsistency: {exc}\n")
        return INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
