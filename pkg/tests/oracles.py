"""Independent oracles: exhaustive enumeration and direct formula evaluation.

Everything here deliberately avoids the package's backward-induction,
decomposition and LP code paths, so agreement is a real cross-check and not
a tautology.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from twostage.model import (
    ActionProfile,
    Instance,
    LinearContract,
    PayHalfwayContract,
    StandardContract,
    TerminateHalfwayContract,
)

ZERO = Fraction(0)


def contract_pieces(instance, contract):
    """(outcome transfers, state transfers, terminated states) of any contract."""
    s = instance.num_states
    if isinstance(contract, StandardContract):
        return contract.transfers, (ZERO,) * s, frozenset()
    if isinstance(contract, LinearContract):
        return tuple(contract.alpha * r for r in instance.rewards), (ZERO,) * s, frozenset()
    if isinstance(contract, PayHalfwayContract):
        return contract.transfers, contract.state_transfers, frozenset()
    if isinstance(contract, TerminateHalfwayContract):
        return contract.transfers, (ZERO,) * s, contract.terminate_set
    raise TypeError(contract)


def iter_profiles(instance: Instance, surviving=None):
    """All action profiles over the surviving states, lexicographic order."""
    if surviving is None:
        surviving = list(range(instance.num_states))
    ranges = [range(len(instance.states[s].final_actions)) for s in surviving]
    for i in range(instance.num_initial_actions):
        for combo in itertools.product(*ranges):
            yield ActionProfile(i, dict(zip(surviving, combo)))


def profile_value(instance, contract, profile):
    """(agent utility, expected payment, principal profit) by direct summation."""
    transfers, state_transfers, terminated = contract_pieces(instance, contract)
    init = instance.initial_actions[profile.initial]
    utility = -init.cost
    payment = ZERO
    reward = ZERO
    for s, j in profile.finals.items():
        p = init.transition[s]
        act = instance.states[s].final_actions[j]
        expected_t = sum((q * t for q, t in zip(act.outcome_dist, transfers)), ZERO)
        expected_r = sum((q * r for q, r in zip(act.outcome_dist, instance.rewards)), ZERO)
        utility += p * (expected_t + state_transfers[s] - act.cost)
        payment += p * (expected_t + state_transfers[s])
        reward += p * expected_r
    assert terminated.isdisjoint(profile.finals)
    return utility, payment, reward - payment


def brute_force_best_response(instance, contract):
    """Agent-optimal profile by exhaustive search: max utility, then max
    principal profit, then lexicographically first."""
    _, _, terminated = contract_pieces(instance, contract)
    surviving = [s for s in range(instance.num_states) if s not in terminated]
    best = None
    best_profile = None
    for profile in iter_profiles(instance, surviving):
        utility, _, profit = profile_value(instance, contract, profile)
        if best is None or (utility, profit) > best:
            best = (utility, profit)
            best_profile = profile
    return best[0], best[1], best_profile


def brute_force_max_welfare(instance) -> Fraction:
    """Exhaustive maximum of expected reward minus expected cost."""
    best = None
    for profile in iter_profiles(instance):
        init = instance.initial_actions[profile.initial]
        value = -init.cost
        for s, j in profile.finals.items():
            act = instance.states[s].final_actions[j]
            expected_r = sum((q * r for q, r in zip(act.outcome_dist, instance.rewards)), ZERO)
            value += init.transition[s] * (expected_r - act.cost)
        if best is None or value > best:
            best = value
    return best


def is_incentive_compatible(instance, profile, transfers) -> bool:
    """Weak incentive compatibility of a standard contract for a total profile.

    Final rows at every state, then initial rows using the designated
    continuation values; mirrors the tie-in-the-principal's-favor semantics.
    """
    for s, state in enumerate(instance.states):
        designated = state.final_actions[profile.finals[s]]
        value = sum((q * t for q, t in zip(designated.outcome_dist, transfers)), ZERO)
        for other in state.final_actions:
            other_value = sum((q * t for q, t in zip(other.outcome_dist, transfers)), ZERO)
            if value - designated.cost < other_value - other.cost:
                return False
    values = []
    for s, state in enumerate(instance.states):
        designated = state.final_actions[profile.finals[s]]
        values.append(
            sum((q * t for q, t in zip(designated.outcome_dist, transfers)), ZERO)
            - designated.cost
        )
    init = instance.initial_actions[profile.initial]
    own = sum((p * u for p, u in zip(init.transition, values)), ZERO) - init.cost
    for other in instance.initial_actions:
        alt = sum((p * u for p, u in zip(other.transition, values)), ZERO) - other.cost
        if own < alt:
            return False
    return True


def lattice_min_payment_standard(instance, profile, step: Fraction, bound: Fraction):
    """Cheapest IC standard contract on the lattice {0, step, .., bound}^M."""
    ticks = []
    t = ZERO
    while t <= bound:
        ticks.append(t)
        t += step
    init = instance.initial_actions[profile.initial]
    best = None
    for transfers in itertools.product(ticks, repeat=instance.num_outcomes):
        if not is_incentive_compatible(instance, profile, transfers):
            continue
        payment = ZERO
        for s, j in profile.finals.items():
            act = instance.states[s].final_actions[j]
            payment += init.transition[s] * sum(
                (q * t for q, t in zip(act.outcome_dist, transfers)), ZERO
            )
        if best is None or payment < best:
            best = payment
    return best


def scipy_lp_min(lp):
    """Float reference solve via scipy.optimize.linprog (HiGHS)."""
    from scipy.optimize import linprog

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row in lp.constraints:
        coeffs = [float(c) for c in row.coeffs]
        if row.relation == "<=":
            a_ub.append(coeffs)
            b_ub.append(float(row.rhs))
        elif row.relation == ">=":
            a_ub.append([-c for c in coeffs])
            b_ub.append(-float(row.rhs))
        else:
            a_eq.append(coeffs)
            b_eq.append(float(row.rhs))
    result = linprog(
        [float(c) for c in lp.objective],
        A_ub=a_ub or None,
        b_ub=b_ub or None,
        A_eq=a_eq or None,
        b_eq=b_eq or None,
        bounds=(0, None),
        method="highs",
    )
    return result
