import random
from fractions import Fraction as F

import pytest

from cmpg.generators import gen_gbar, gen_gm, gen_gn, gen_random
from cmpg.markov import fix_strategy, mdp_min_mean_payoff
from cmpg.model import build_game, patience
from cmpg.solver import almost_set_naive, positive_set
from cmpg.synthesis import (
    HorizonError,
    SynthesisError,
    beta,
    compute_horizon,
    patience_bound_holds,
    spoiler_constant,
    synth_eps_stationary,
    synth_markov_almost,
    synth_positive_markov,
    synth_positive_spoiler_stationary,
    synth_spoiler_markov,
)


def random_game(seed, n_max=6):
    rng = random.Random(seed)
    return gen_random(rng.randint(1, n_max), m_max=3, branching=3,
                      reward_density=rng.choice([0.3, 0.5, 0.8]), seed=seed)


def test_beta_values():
    assert beta(2, 2, 2, 1, F(1, 4)) == F(1, 512)
    assert beta(2, 2, 2, 1, 1) == F(1, 8)
    # with a single state the layer weights collapse to powers of epsilon
    assert beta(3, 1, 1, 1, F(1, 2)) == F(1, 8)


def test_beta_shrinks_with_depth_and_epsilon():
    for n, m, dmin in [(2, 2, 1), (3, 2, F(1, 2)), (2, 3, F(1, 3))]:
        values = [beta(j, n, m, dmin, F(1, 4)) for j in range(2, 5)]
        assert values == sorted(values, reverse=True)
        assert beta(2, n, m, dmin, F(1, 8)) < beta(2, n, m, dmin, F(1, 4))


def test_beta_rejects_bad_arguments():
    with pytest.raises(ValueError):
        beta(1, 2, 2, 1, F(1, 4))
    with pytest.raises(ValueError):
        beta(2, 2, 2, 0, F(1, 4))


def test_eps_strategy_on_g1():
    g = gen_gn(1)
    sigma = synth_eps_stationary(g, almost_set_naive(g), F(1, 4))
    assert sigma.dist["v1"] == {"a2": F(3, 4), "a1": F(1, 4)}
    assert patience(sigma) == 4
    assert sigma.metadata["epsilon"] == F(1, 4)
    values = mdp_min_mean_payoff(fix_strategy(g, sigma))
    assert min(values.values()) == F(3, 4)


def test_eps_strategy_rejects_out_of_range_epsilon():
    g = gen_gn(1)
    with pytest.raises(ValueError):
        synth_eps_stationary(g, almost_set_naive(g), 1)


def test_patience_bound_on_g3():
    g = gen_gn(3)
    sigma = synth_eps_stationary(g, almost_set_naive(g), F(1, 8))
    assert patience_bound_holds(g, sigma, F(1, 8))
    # deeper layers need far more patience than the top one
    assert patience(sigma) > 8**4


def test_eps_strategy_is_a_valid_distribution_on_random_games():
    for seed in range(60):
        g = random_game(seed)
        rep = almost_set_naive(g)
        if not rep.winning:
            continue
        sigma = synth_eps_stationary(g, rep, F(1, 8))
        sigma.validate(g)
        for s in g.states:
            assert sum(sigma.dist[s].values()) == 1
        assert synth_eps_stationary(g, rep, F(1, 8)) == sigma


def test_eps_strategy_stays_inside_the_winning_set():
    for seed in range(60):
        g = random_game(seed)
        rep = almost_set_naive(g)
        X = rep.winning
        if not X:
            continue
        sigma = synth_eps_stationary(g, rep, F(1, 4))
        for s in X:
            for a in sigma.dist[s]:
                for b in g.actions2[s]:
                    assert set(g.delta[(s, a, b)]) <= X, (seed, s, a, b)


def test_horizon_of_absorbing_reward_state():
    g = build_game("one", ["s"], {"s": ["a"]}, {"s": ["b"]}, {("s", "a", "b"): (1, {"s": 1})})
    sigma = synth_eps_stationary(g, almost_set_naive(g), F(1, 4))
    assert compute_horizon(g, sigma, F(1, 4)) == 1


def test_horizon_on_g1_shrinks_with_epsilon():
    g = gen_gn(1)
    rep = almost_set_naive(g)
    horizons = []
    for eps in (F(1, 4), F(1, 8), F(1, 16)):
        sigma = synth_eps_stationary(g, rep, eps)
        horizons.append(compute_horizon(g, sigma, eps, rep.winning))
    assert horizons[0] == 8
    assert horizons == sorted(horizons)


def test_horizon_cap_raises_with_best_so_far():
    g = gen_gn(1)
    sigma = synth_eps_stationary(g, almost_set_naive(g), F(1, 16))
    with pytest.raises(HorizonError) as info:
        compute_horizon(g, sigma, F(1, 16), cap=3)
    assert info.value.steps == 3
    assert 0 <= info.value.best < F(7, 8)


def test_markov_strategy_segments_on_g1():
    g = gen_gn(1)
    rep = almost_set_naive(g)
    strat = synth_markov_almost(g, rep)
    length, first = strat.segment(0)
    assert length == 8
    assert first == synth_eps_stationary(g, rep, F(1, 4))
    weights = [strat.segment(k)[1].dist["v1"]["a1"] for k in range(3)]
    assert weights == [F(1, 4), F(1, 8), F(1, 16)]
    assert strat.segment_bounds(1) == (9, 8 + strat.segment(1)[0])
    assert strat.strategy_at(8) == first
    assert strat.strategy_at(9) == strat.segment(1)[1]
    assert strat.time_dependent_memory(1000) == 1000
    assert strat.tag.kind == "eps-halving"


def test_markov_strategy_needs_a_winning_state():
    g = gen_gm(2)
    with pytest.raises(SynthesisError):
        synth_markov_almost(g, almost_set_naive(g))


def test_spoiler_constant():
    assert spoiler_constant(gen_gm(2)) == F(1, 2)
    assert spoiler_constant(gen_gm(3)) == F(1, 3)


def test_spoiler_on_gm_is_uniform_forever():
    for m in (2, 3):
        g = gen_gm(m)
        strat = synth_spoiler_markov(g, almost_set_naive(g))
        assert strat.segment(0)[0] is None
        for t in (1, 5, 100):
            assert strat.strategy_at(t).dist["v"] == {f"b{i}": F(1, m) for i in range(1, m + 1)}
        assert strat.metadata["c"] == F(1, m)


def test_spoiler_round_coin_shrinks():
    # X-chain {s0..s3} > {s1, s2, s3} > {s1}: s2 and s3 sit in an inner layer
    g = build_game(
        "layers",
        ["s0", "s1", "s2", "s3"],
        {"s0": ["a1"], "s1": ["a1"], "s2": ["a1", "a2"], "s3": ["a1"]},
        {"s0": ["b1", "b2"], "s1": ["b1"], "s2": ["b1", "b2"], "s3": ["b1"]},
        {
            ("s0", "a1", "b1"): (0, {"s0": 1}),
            ("s0", "a1", "b2"): (1, {"s3": 1}),
            ("s1", "a1", "b1"): (1, {"s1": 1}),
            ("s2", "a1", "b1"): (1, {"s1": "2/5", "s2": "3/5"}),
            ("s2", "a1", "b2"): (0, {"s2": 1}),
            ("s2", "a2", "b1"): (1, {"s0": "1/2", "s2": "1/2"}),
            ("s2", "a2", "b2"): (1, {"s1": 1}),
            ("s3", "a1", "b1"): (0, {"s2": 1}),
        },
    )
    rep = almost_set_naive(g)
    assert rep.x_chain == [{"s0", "s1", "s2", "s3"}, {"s1", "s2", "s3"}, {"s1"}]
    strat = synth_spoiler_markov(g, rep)
    assert strat.strategy_at(1).dist["s0"] == {"b1": 1}
    coins = [strat.strategy_at(t).dist["s2"]["b1"] for t in (1, 2, 3)]
    assert coins == [F(1, 8), F(1, 16), F(1, 32)]
    assert strat.strategy_at(3).dist["s2"]["b2"] == F(31, 32)


def test_spoiler_refuses_when_everything_wins():
    g = gen_gn(2)
    with pytest.raises(SynthesisError):
        synth_spoiler_markov(g, almost_set_naive(g))


def test_positive_spoiler_on_gbar():
    g = gen_gbar()
    sigma2 = synth_positive_spoiler_stationary(g, positive_set(g))
    assert sigma2.dist["v"] == {"b1": F(1, 2), "b2": F(1, 2)}
    assert patience(sigma2) <= g.m


def test_positive_spoiler_patience_at_most_m():
    for seed in range(60):
        g = random_game(seed)
        pos = positive_set(g)
        if pos.winning == frozenset(g.states):
            continue
        sigma2 = synth_positive_spoiler_stationary(g, pos)
        assert patience(sigma2) <= g.m


def test_positive_markov_on_gbar():
    g = gen_gbar()
    strat = synth_positive_markov(g, positive_set(g))
    assert strat.strategy_at(1).dist["v"] == {"a2": F(3, 4), "a1": F(1, 4)}
    assert strat.strategy_at(2).dist["v"] == {"a2": F(7, 8), "a1": F(1, 8)}
    assert strat.segment_bounds(4) == (5, 5)
