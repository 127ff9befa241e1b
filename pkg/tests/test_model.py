from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twostage import (
    FinalAction,
    InitialAction,
    Instance,
    InstanceFormatError,
    LinearContract,
    PayHalfwayContract,
    StandardContract,
    State,
    TerminateHalfwayContract,
    classify,
    contract_from_json,
    contract_to_json,
    expected_state_reward,
    instance_from_json,
    instance_to_json,
    parse_rational,
    random_instance,
    validate,
)
from twostage.generators import cost_ladder_instance, state_markers_instance


def test_parse_rational_decimal_and_ratio():
    assert parse_rational("0.9") == F(9, 10)
    assert parse_rational("9/10") == F(9, 10)
    assert parse_rational("5") == F(5)
    assert parse_rational(7) == F(7)
    assert parse_rational("-1.25") == F(-5, 4)


@pytest.mark.parametrize("bad", [0.9, True, "abc", "1/0", None, [1]])
def test_parse_rational_rejects_inexact_and_garbage(bad):
    with pytest.raises(InstanceFormatError):
        parse_rational(bad)


def test_validate_accepts_worked_example(midterm):
    assert validate(midterm).ok


def test_validate_flags_bad_transition_sum(midterm):
    broken = Instance(
        rewards=midterm.rewards,
        initial_actions=(
            InitialAction("effort", F(9, 5), (F(1, 10), F(8, 10))),
            midterm.initial_actions[1],
        ),
        states=midterm.states,
    )
    report = validate(broken)
    assert not report.ok
    assert any("does not sum to 1" in v.rule for v in report.violations)
    assert any("initial_actions[0]" in v.location for v in report.violations)


def test_validate_flags_missing_null_initial(midterm):
    broken = Instance(
        rewards=midterm.rewards,
        initial_actions=(midterm.initial_actions[0],),  # only the costly one
        states=midterm.states,
    )
    report = validate(broken)
    assert any("missing null initial action" in v.rule for v in report.violations)


def test_validate_flags_missing_null_final(midterm):
    costly_only = State("fail", (midterm.states[0].final_actions[0],))
    broken = Instance(midterm.rewards, midterm.initial_actions, (costly_only, midterm.states[1]))
    report = validate(broken)
    assert any("missing null final action" in v.rule for v in report.violations)


def test_validate_flags_negative_cost_and_bad_probability(midterm):
    broken = Instance(
        rewards=midterm.rewards,
        initial_actions=(
            InitialAction("weird", F(-1), (F(3, 2), F(-1, 2))),
            midterm.initial_actions[1],
        ),
        states=midterm.states,
    )
    rules = [v.rule for v in validate(broken).violations]
    assert any("non-negative" in r for r in rules)
    assert any("[0, 1]" in r for r in rules)


def test_classify_worked_example_is_general(midterm):
    pc = classify(midterm)
    assert not pc.is_tree
    assert not pc.is_stochastic_first_stage
    assert not pc.is_deterministic_first_stage
    assert pc.label == "general"


def test_classify_families():
    assert classify(cost_ladder_instance(2, 2)).is_deterministic_first_stage
    assert classify(state_markers_instance(2, 2)).is_stochastic_first_stage


def test_classify_random_classes_carry_their_flag():
    for seed in range(25):
        assert classify(random_instance("tree", seed=seed)).is_tree
        assert classify(random_instance("stochastic_first_stage", seed=seed)).is_stochastic_first_stage
        det = random_instance("deterministic_first_stage", seed=seed)
        assert classify(det).is_deterministic_first_stage


def test_classify_stable_under_final_action_permutation(midterm):
    shuffled = Instance(
        midterm.rewards,
        midterm.initial_actions,
        (
            State("fail", tuple(reversed(midterm.states[0].final_actions))),
            midterm.states[1],
        ),
    )
    assert classify(shuffled) == classify(midterm)


def test_expected_state_reward_worked_example(midterm):
    assert expected_state_reward(midterm, 0, 0) == F(4)  # fail, effort
    assert expected_state_reward(midterm, 1, 1) == F(5)  # pass, null
    with pytest.raises(IndexError):
        expected_state_reward(midterm, 5, 0)


def test_expected_state_reward_zero_reward_mass():
    inst = Instance(
        rewards=(F(0), F(7)),
        initial_actions=(InitialAction("null", F(0), (F(1),)),),
        states=(State("s", (FinalAction("null", F(0), (F(1), F(0))),)),),
    )
    assert expected_state_reward(inst, 0, 0) == 0


def test_instance_round_trip_examples(midterm, interim_review):
    for inst in (midterm, interim_review, cost_ladder_instance(2, 2), state_markers_instance(1, 2)):
        assert instance_from_json(instance_to_json(inst)) == inst


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["tree", "general", "deterministic_first_stage"]))
def test_instance_round_trip_random(seed, kind):
    inst = random_instance(kind, seed=seed)
    assert instance_from_json(instance_to_json(inst)) == inst


def test_contract_round_trips():
    contracts = [
        StandardContract((F(0), F(20, 9))),
        LinearContract(F(4, 9)),
        PayHalfwayContract((F(0), F(2)), (F(0), F(1, 10))),
        TerminateHalfwayContract((F(0), F(41, 5)), frozenset({0})),
    ]
    for contract in contracts:
        assert contract_from_json(contract_to_json(contract)) == contract


def test_contract_parsing_rejects_bad_documents():
    with pytest.raises(InstanceFormatError):
        contract_from_json('{"kind": "mystery"}')
    with pytest.raises(InstanceFormatError):
        contract_from_json('{"t": ["1"]}')
    with pytest.raises(InstanceFormatError):
        contract_from_json('{"kind": "standard", "t": ["-1"]}')
    with pytest.raises(InstanceFormatError):
        contract_from_json("not json")


def test_instance_parsing_rejects_floats_and_shapes():
    with pytest.raises(InstanceFormatError):
        instance_from_json('{"rewards": [0.9], "initial_actions": [], "states": []}')
    with pytest.raises(InstanceFormatError):
        instance_from_json('[1, 2]')
    with pytest.raises(InstanceFormatError):
        instance_from_json('{"rewards": ["1"], "initial_actions": [5], "states": []}')


def test_contract_invariants():
    with pytest.raises(ValueError):
        StandardContract((F(-1),))
    with pytest.raises(ValueError):
        LinearContract(F(3, 2))
    with pytest.raises(ValueError):
        PayHalfwayContract((F(-1),), (F(0),))
