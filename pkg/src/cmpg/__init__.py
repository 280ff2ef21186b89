"""Qualitative analysis of concurrent stochastic mean-payoff games.

Exact-rational game model, almost-sure and positive winning-set solvers,
witness strategy synthesis, independent verification oracles and the
reduction from deterministic mean-payoff games.
"""

from .fileio import parse_dmpg, parse_game, parse_strategy, serialize_dmpg, serialize_game, serialize_strategy
from .generators import gen_gbar, gen_gm, gen_gn, gen_pennies, gen_random, gen_random_dmpg, gen_random_turn_based
from .markov import (
    MarkovChain,
    Mdp,
    fix_both,
    fix_policy,
    fix_strategy,
    mc_mean_payoff,
    mdp_max_mean_payoff,
    mdp_min_mean_payoff,
)
from .model import (
    Dmpg,
    FiniteMemoryStrategy,
    GameError,
    GameStructure,
    ParseError,
    RoundIndexedStrategy,
    SolveReport,
    StationaryStrategy,
    build_game,
    normalize_rewards,
    patience,
)
from .reduction import dmpg_value_bruteforce, reduce_dmpg, verify_reduction
from .solver import allow1, almost_set_improved, almost_set_naive, asp, bad2, good1, positive_set
from .synthesis import (
    beta,
    compute_horizon,
    synth_eps_stationary,
    synth_markov_almost,
    synth_positive_markov,
    synth_positive_spoiler_stationary,
    synth_spoiler_markov,
)
from .verification import (
    cobuchi_winning_set,
    patience_floor_check,
    simulate,
    spoil_finite_memory,
    verify_eps_claim,
    verify_spoiler_stationary,
)

__version__ = "0.1.0"
