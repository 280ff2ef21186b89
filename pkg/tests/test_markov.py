import random
from fractions import Fraction as F

import pytest

from cmpg.generators import gen_gn
from cmpg.linalg import SingularSystemError, solve_sparse
from cmpg.markov import (
    MarkovChain,
    Mdp,
    evaluate_policy,
    expected_accumulated,
    fix_both,
    fix_policy,
    fix_strategy,
    mc_mean_payoff,
    mdp_max_mean_payoff,
    mdp_min_mean_payoff,
    mdp_optimal,
    stationary_distribution,
)
from cmpg.model import StationaryStrategy, uniform
from cmpg.reduction import gadget_chain


def uniform_strategy(game, player):
    return StationaryStrategy(player, {s: uniform(game.actions(player, s)) for s in game.states})


def random_mdp(seed, n_max=6, a_max=3):
    rng = random.Random(seed)
    n = rng.randint(1, n_max)
    states = tuple(f"s{i}" for i in range(n))
    actions = {s: tuple(f"a{j}" for j in range(rng.randint(1, a_max))) for s in states}
    delta, reward = {}, {}
    for s in states:
        for a in actions[s]:
            succ = rng.sample(states, rng.randint(1, min(3, n)))
            w = [rng.randint(1, 3) for _ in succ]
            delta[(s, a)] = {t: F(x, sum(w)) for t, x in zip(succ, w)}
            reward[(s, a)] = F(rng.randint(0, 4), 4)
    return Mdp(states, actions, delta, reward)


def test_solve_sparse_small_system():
    sol = solve_sparse({"x": ({"x": 2, "y": 1}, 5), "y": ({"x": 1, "y": -1}, 1)})
    assert sol == {"x": 2, "y": 1}
    with pytest.raises(SingularSystemError):
        solve_sparse({"x": ({"x": 1, "y": 1}, 1), "y": ({"x": 2, "y": 2}, 2)})


def test_fix_strategy_averages_rewards():
    g1 = gen_gn(1)
    mdp = fix_strategy(g1, uniform_strategy(g1, 1))
    assert mdp.player == 2
    assert mdp.reward[("v1", "b2")] == F(1, 2)
    assert mdp.delta[("v1", "b2")] == {"v1": 1}
    assert mdp.delta[("v1", "b1")] == {"v0": F(1, 2), "v1": F(1, 2)}


def test_fix_positional_strategy_keeps_boolean_rewards():
    g1 = gen_gn(1)
    pure = StationaryStrategy(1, {"v0": {"a": F(1)}, "v1": {"a2": F(1)}})
    mdp = fix_strategy(g1, pure)
    assert set(mdp.reward.values()) <= {0, 1}


def test_fixing_both_players_gives_a_chain():
    g1 = gen_gn(1)
    chain = fix_both(g1, uniform_strategy(g1, 1), uniform_strategy(g1, 2))
    assert isinstance(chain, MarkovChain)
    assert chain.step["v1"] == {"v0": F(1, 4), "v1": F(3, 4)}
    assert chain.reward["v1"] == F(1, 4)


def test_min_value_of_uniform_on_g1():
    g1 = gen_gn(1)
    mdp = fix_strategy(g1, uniform_strategy(g1, 1))
    for method in ("enumerate", "policy-iteration"):
        values, policy = mdp_optimal(mdp, maximize=False, method=method)
        assert values == {"v0": 1, "v1": F(1, 2)}
        assert policy["v1"] == "b2"


def test_trivial_mdps():
    absorbing = Mdp(("s",), {"s": ("a",)}, {("s", "a"): {"s": F(1)}}, {("s", "a"): F(1)})
    assert mdp_min_mean_payoff(absorbing) == {"s": 1}
    cycle = Mdp(("s", "t"), {"s": ("a",), "t": ("a",)},
                {("s", "a"): {"t": F(1)}, ("t", "a"): {"s": F(1)}},
                {("s", "a"): F(0), ("t", "a"): F(1)})
    assert mdp_max_mean_payoff(cycle) == {"s": F(1, 2), "t": F(1, 2)}


def test_chain_examples():
    loop = MarkovChain(("s",), {"s": {"s": F(1)}}, {"s": F(1)})
    assert mc_mean_payoff(loop) == {"s": (1, 1)}
    split = MarkovChain(
        ("s", "zero", "one"),
        {"s": {"zero": F(1, 2), "one": F(1, 2)}, "zero": {"zero": F(1)}, "one": {"one": F(1)}},
        {"s": F(0), "zero": F(0), "one": F(1)},
    )
    assert mc_mean_payoff(split)["s"] == (F(1, 2), 0)


def test_gadget_loop_gain_and_hitting_time():
    chain = gadget_chain(2, 3, loop=True)
    assert mc_mean_payoff(chain)["s"] == (F(2, 9), F(2, 9))
    pi = stationary_distribution(chain, set(chain.states))
    assert sum(pi.values()) == 1
    # one traversal takes 9 = 3M steps on average
    assert 1 / pi["s"] == 9


def test_expected_accumulated_counts_steps():
    chain = gadget_chain(1, 2)
    ones = MarkovChain(chain.states, chain.step, {s: F(1) for s in chain.states})
    assert expected_accumulated(ones, {"t"}, "s") == 6
    assert expected_accumulated(chain, {"t"}, "s") == 1


def test_enumeration_and_policy_iteration_agree():
    for seed in range(150):
        mdp = random_mdp(seed)
        for maximize in (True, False):
            a = mdp_optimal(mdp, maximize, "enumerate")[0]
            b, policy = mdp_optimal(mdp, maximize, "policy-iteration")
            assert a == b, seed
            gain, _ = evaluate_policy(mdp if maximize else mdp, policy)
            assert gain == b


def test_auto_switches_on_bound():
    mdp = random_mdp(7)
    assert mdp_optimal(mdp, True, "auto", bound=1)[0] == mdp_optimal(mdp, True, "enumerate")[0]
    with pytest.raises(ValueError):
        mdp_optimal(mdp, True, "simplex")


def test_chain_values_do_not_depend_on_state_order():
    for seed in range(40):
        mdp = random_mdp(seed)
        policy = {s: mdp.actions[s][-1] for s in mdp.states}
        chain = fix_policy(mdp, policy)
        order = list(chain.states)
        random.Random(seed).shuffle(order)
        permuted = MarkovChain(tuple(order), chain.step, chain.reward)
        assert mc_mean_payoff(chain) == mc_mean_payoff(permuted)


def test_bias_is_pinned_per_recurrent_class():
    mdp = random_mdp(3)
    policy = {s: mdp.actions[s][0] for s in mdp.states}
    gain, bias = evaluate_policy(mdp, policy)
    chain = fix_policy(mdp, policy)
    for s in mdp.states:
        lhs = gain[s] + bias[s]
        rhs = chain.reward[s] + sum(p * bias[t] for t, p in chain.step[s].items())
        # the pinned reference states satisfy h = 0 instead
        assert lhs == rhs or bias[s] == 0
