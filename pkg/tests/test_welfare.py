import random
from fractions import Fraction as F

import pytest

from twostage import (
    ActionProfile,
    LinearContract,
    PayHalfwayContract,
    StandardContract,
    TerminateHalfwayContract,
    best_response,
    max_welfare,
    profile_cost,
    profile_reward,
    random_instance,
)
from twostage.generators import cost_ladder_instance

from oracles import brute_force_max_welfare


def test_profile_reward_worked_example(midterm):
    assert profile_reward(midterm, ActionProfile(0, {0: 0, 1: 1})) == F(49, 10)
    # the null initial action goes to the fail state for sure
    assert profile_reward(midterm, ActionProfile(1, {0: 1, 1: 1})) == F(1, 2)


def test_profile_reward_zero_rewards():
    inst = random_instance("general", seed=3)
    zeroed = type(inst)((F(0),) * inst.num_outcomes, inst.initial_actions, inst.states)
    profile = ActionProfile(0, {s: 0 for s in range(zeroed.num_states)})
    assert profile_reward(zeroed, profile) == 0


def test_profile_cost_worked_examples(midterm, interim_review):
    assert profile_cost(midterm, ActionProfile(0, {0: 0, 1: 0})) == F(29, 10)
    assert profile_cost(midterm, ActionProfile(1, {0: 1, 1: 1})) == 0
    assert profile_cost(interim_review, ActionProfile(0, {0: 0, 1: 1})) == F(201, 25)  # 8.04


def test_max_welfare_worked_examples(midterm, interim_review):
    report = max_welfare(midterm)
    assert report.max_welfare == F(29, 10)
    assert report.argmax_profile == ActionProfile(0, {0: 0, 1: 1})
    assert report.per_state_best[0].value == F(2)  # fail state: effort surplus 4 - 2

    # The best plan skips the costly initial action entirely: its 1.92 surplus
    # loses to taking the bad state head on (surplus 2 for sure).
    report2 = max_welfare(interim_review)
    assert report2.max_welfare == F(2)
    assert report2.argmax_profile.initial == 1
    assert report2.argmax_profile.finals[0] == 0


def test_max_welfare_cost_ladder_closed_form():
    for n1, n2 in ((1, 1), (2, 2), (3, 2)):
        assert max_welfare(cost_ladder_instance(n1, n2)).max_welfare == (n1 + 1) * n2 + 1


def test_max_welfare_matches_brute_force():
    for seed in range(60):
        kind = ("general", "tree", "deterministic_first_stage", "stochastic_first_stage")[seed % 4]
        inst = random_instance(kind, seed=seed, max_states=4, max_final_actions=4)
        report = max_welfare(inst)
        assert report.max_welfare == brute_force_max_welfare(inst)
        recomputed = profile_reward(inst, report.argmax_profile) - profile_cost(
            inst, report.argmax_profile
        )
        assert recomputed == report.max_welfare
        assert report.max_welfare >= 0  # the all-null profile costs nothing


def _random_contract(inst, rng):
    m, s = inst.num_outcomes, inst.num_states
    kind = rng.randrange(4)
    if kind == 0:
        return StandardContract(tuple(F(rng.randint(0, 8), 2) for _ in range(m)))
    if kind == 1:
        return LinearContract(F(rng.randint(0, 4), 4))
    if kind == 2:
        return PayHalfwayContract(
            tuple(F(rng.randint(0, 4), 2) for _ in range(s)),
            tuple(F(rng.randint(0, 8), 2) for _ in range(m)),
        )
    blocked = frozenset(t for t in range(s) if rng.random() < 0.4)
    return TerminateHalfwayContract(tuple(F(rng.randint(0, 8), 2) for _ in range(m)), blocked)


def test_profit_never_exceeds_welfare():
    rng = random.Random(99)
    for seed in range(80):
        inst = random_instance("general", seed=seed)
        contract = _random_contract(inst, rng)
        response = best_response(inst, contract)
        assert response.principal_profit <= max_welfare(inst).max_welfare


def test_profile_reward_index_errors(midterm):
    with pytest.raises(IndexError):
        profile_reward(midterm, ActionProfile(5, {0: 0, 1: 0}))
    with pytest.raises(KeyError):
        profile_reward(midterm, ActionProfile(0, {0: 0}))  # missing a state
