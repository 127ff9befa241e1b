"""Agent best response under a contract, and a sampling cross-check.

The agent solves her sequential problem by backward induction: best final
action per intermediate state first, then the initial action given the state
values, any state transfers, and the risk of termination.  Ties are broken in
the principal's favor (the principal can steer an indifferent agent via
recommendations), and remaining ties go to the lowest action index so results
are deterministic.

All computations are exact; ``simulate`` is the only place floats appear, as
sample statistics over exactly-sampled episodes.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    ActionProfile,
    Contract,
    Instance,
    LinearContract,
    PayHalfwayContract,
    StandardContract,
    TerminateHalfwayContract,
)

_ZERO = Fraction(0)


@dataclass(frozen=True)
class BestResponse:
    """The agent's optimal behavior and its value to both parties.

    ``profile.finals`` covers exactly the non-terminated states.
    ``per_state_utility[s]`` is the agent's continuation value at state s
    (zero for terminated states).
    """

    profile: ActionProfile
    agent_utility: Fraction
    expected_payment: Fraction
    principal_profit: Fraction
    per_state_utility: tuple[Fraction, ...]


@dataclass(frozen=True)
class ProfileEvaluation:
    agent_utility: Fraction
    expected_payment: Fraction
    principal_profit: Fraction


@dataclass(frozen=True)
class SimulationResult:
    empirical_profit: float
    empirical_payment: float
    std_error: float


def _contract_pieces(
    instance: Instance, contract: Contract
) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...], frozenset[int]]:
    """Normalize any contract to (outcome transfers, state transfers, terminated)."""
    m, s = instance.num_outcomes, instance.num_states
    no_state_transfers = (_ZERO,) * s
    if isinstance(contract, StandardContract):
        transfers, state_transfers, terminated = contract.transfers, no_state_transfers, frozenset()
    elif isinstance(contract, LinearContract):
        if any(r < 0 for r in instance.rewards):
            raise ValueError("linear contracts require all rewards to be non-negative")
        transfers = tuple(contract.alpha * r for r in instance.rewards)
        state_transfers, terminated = no_state_transfers, frozenset()
    elif isinstance(contract, PayHalfwayContract):
        if len(contract.state_transfers) != s:
            raise ValueError(
                f"contract has {len(contract.state_transfers)} state transfers, instance has {s} states"
            )
        transfers, state_transfers, terminated = contract.transfers, contract.state_transfers, frozenset()
    elif isinstance(contract, TerminateHalfwayContract):
        if not all(0 <= t < s for t in contract.terminate_set):
            raise ValueError("terminate_set contains an out-of-range state index")
        transfers, state_transfers, terminated = contract.transfers, no_state_transfers, contract.terminate_set
    else:
        raise TypeError(f"not a contract: {contract!r}")
    if len(transfers) != m:
        raise ValueError(f"contract has {len(transfers)} transfers, instance has {m} outcomes")
    return transfers, state_transfers, terminated


def best_response(instance: Instance, contract: Contract) -> BestResponse:
    """Agent-optimal profile under the contract, ties favoring the principal.

    Per state the agent maximizes expected transfer minus cost; within that
    argmax the principal's conditional profit decides, then the lowest index.
    The initial action maximizes expected continuation value (including state
    transfers, excluding terminated states) minus its cost, with the same
    two-level tie-breaking.  Greedy per-state selection is globally correct
    because tying final actions have equal utility by definition, so the
    initial argmax set does not depend on which tying final is picked.
    """
    transfers, state_transfers, terminated = _contract_pieces(instance, contract)
    num_states = instance.num_states

    finals: dict[int, int] = {}
    state_utility = [_ZERO] * num_states
    state_profit = [_ZERO] * num_states  # principal's conditional profit at s
    for s, state in enumerate(instance.states):
        if s in terminated:
            continue
        best = None
        for j, act in enumerate(state.final_actions):
            utility = sum(
                (p * t for p, t in zip(act.outcome_dist, transfers)), _ZERO
            ) - act.cost
            profit = sum(
                (p * (r - t) for p, r, t in zip(act.outcome_dist, instance.rewards, transfers)),
                _ZERO,
            )
            if best is None or (utility, profit) > best:
                best = (utility, profit)
                finals[s] = j
        state_utility[s] = best[0]
        state_profit[s] = best[1]

    best_i = None
    for i, act in enumerate(instance.initial_actions):
        utility = -act.cost
        profit = _ZERO
        for s in range(num_states):
            if s in terminated:
                continue
            p = act.transition[s]
            if p:
                utility += p * (state_utility[s] + state_transfers[s])
                profit += p * (state_profit[s] - state_transfers[s])
        if best_i is None or (utility, profit) > (best_i[1], best_i[2]):
            best_i = (i, utility, profit)

    chosen, agent_utility, principal_profit = best_i
    payment = _ZERO
    init = instance.initial_actions[chosen]
    for s in range(num_states):
        if s in terminated:
            continue
        p = init.transition[s]
        if p:
            act = instance.states[s].final_actions[finals[s]]
            expected_transfer = sum(
                (q * t for q, t in zip(act.outcome_dist, transfers)), _ZERO
            )
            payment += p * (expected_transfer + state_transfers[s])

    return BestResponse(
        profile=ActionProfile(chosen, finals),
        agent_utility=agent_utility,
        expected_payment=payment,
        principal_profit=principal_profit,
        per_state_utility=tuple(state_utility),
    )


def evaluate_profile(
    instance: Instance, contract: Contract, profile: ActionProfile
) -> ProfileEvaluation:
    """Utility, payment and profit of a given (not necessarily optimal) profile.

    For terminate-halfway contracts the profile must assign finals to exactly
    the surviving states; for every other contract it must be total.
    """
    transfers, state_transfers, terminated = _contract_pieces(instance, contract)
    surviving = set(range(instance.num_states)) - terminated
    assigned = set(profile.finals)
    if assigned - surviving:
        raise ValueError(f"profile assigns finals to terminated states {sorted(assigned - surviving)}")
    if surviving - assigned:
        raise ValueError(f"profile is missing finals for states {sorted(surviving - assigned)}")

    init = instance.initial_actions[profile.initial]
    utility = -init.cost
    payment = _ZERO
    reward = _ZERO
    for s in sorted(surviving):
        p = init.transition[s]
        if not p:
            continue
        act = instance.states[s].final_actions[profile.finals[s]]
        expected_transfer = sum((q * t for q, t in zip(act.outcome_dist, transfers)), _ZERO)
        expected_reward = sum((q * r for q, r in zip(act.outcome_dist, instance.rewards)), _ZERO)
        utility += p * (expected_transfer + state_transfers[s] - act.cost)
        payment += p * (expected_transfer + state_transfers[s])
        reward += p * expected_reward
    return ProfileEvaluation(utility, payment, reward - payment)


def _cdf_thresholds(probabilities) -> list[int]:
    """64-bit integer thresholds for exact inverse-CDF sampling.

    A uniform draw u in [0, 2**64) selects the first category k with
    u < ceil(C_k * 2**64); comparisons against the exact rational CDF are
    thereby integer-exact, with per-category bias below 2**-64.
    """
    thresholds = []
    cum = _ZERO
    for p in probabilities:
        cum += p
        thresholds.append(-((-cum.numerator << 64) // cum.denominator))
    return thresholds


def simulate(
    instance: Instance, contract: Contract, episodes: int, seed: int
) -> SimulationResult:
    """Monte Carlo estimate of the best-response profit and payment.

    Episodes sample the intermediate state and then the outcome from the
    exact distributions of the agent's best-response profile.  The same seed
    always produces the same result.
    """
    if episodes < 1:
        raise ValueError("episodes must be a positive integer")
    transfers, state_transfers, terminated = _contract_pieces(instance, contract)
    response = best_response(instance, contract)
    init = instance.initial_actions[response.profile.initial]

    state_thresholds = _cdf_thresholds(init.transition)
    outcome_thresholds: list[list[int] | None] = []
    profit_of: list[list[float] | None] = []
    payment_of: list[list[float] | None] = []
    for s in range(instance.num_states):
        if s in terminated:
            outcome_thresholds.append(None)
            profit_of.append(None)
            payment_of.append(None)
            continue
        act = instance.states[s].final_actions[response.profile.finals[s]]
        outcome_thresholds.append(_cdf_thresholds(act.outcome_dist))
        profit_of.append(
            [float(r - t - state_transfers[s]) for r, t in zip(instance.rewards, transfers)]
        )
        payment_of.append([float(t + state_transfers[s]) for t in transfers])

    rng = random.Random(seed)
    profit_sum = 0.0
    profit_sumsq = 0.0
    payment_sum = 0.0
    for _ in range(episodes):
        state = bisect_right(state_thresholds, rng.getrandbits(64))
        if state in terminated:
            continue  # zero profit, zero payment
        outcome = bisect_right(outcome_thresholds[state], rng.getrandbits(64))
        profit = profit_of[state][outcome]
        profit_sum += profit
        profit_sumsq += profit * profit
        payment_sum += payment_of[state][outcome]

    n = episodes
    mean = profit_sum / n
    variance = max(0.0, (profit_sumsq - n * mean * mean) / (n - 1)) if n > 1 else 0.0
    return SimulationResult(
        empirical_profit=mean,
        empirical_payment=payment_sum / n,
        std_error=math.sqrt(variance / n),
    )
