"""Minimal-payment incentive programs and optimal-contract search.

For a fixed action profile the cheapest contract incentivizing it is a linear
program: final-stage incentive rows keep the designated final action optimal
at every (surviving) state, and initial-stage rows compare the designated
initial action against each alternative using the designated continuation
values, which is valid exactly because the final rows hold everywhere.  Weak
inequalities suffice since the agent breaks ties in the principal's favor.

The optimal-contract searches enumerate profiles (and termination sets),
solve the program for each, and keep the best profit.  Enumeration collapses
duplicate final actions (identical cost and distribution) to their lowest
index, which preserves both the optimum and the lexicographic tie-break.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .agent import BestResponse, best_response
from .lp import Constraint, LinearProgram, LpOptimal, solve_lp
from .model import (
    ActionProfile,
    Contract,
    Instance,
    PayHalfwayContract,
    StandardContract,
    TerminateHalfwayContract,
    classify,
)
from .welfare import max_welfare

_ZERO = Fraction(0)

DEFAULT_PROFILES_CAP = 200_000
DEFAULT_SUBSETS_CAP = 2 ** 14


class EnumerationCapExceeded(RuntimeError):
    """The profile or termination-set enumeration would exceed its cap."""


@dataclass(frozen=True)
class SolveReport:
    """Result of an optimal-contract search.

    ``profiles_enumerated`` counts profiles after duplicate final actions are
    collapsed; ``termination_sets_enumerated`` is zero except for the
    terminate-halfway search.
    """

    best_contract: Contract
    best_response: BestResponse
    profit: Fraction
    welfare: Fraction
    profiles_enumerated: int
    termination_sets_enumerated: int
    infeasible_profiles: int


@dataclass(frozen=True)
class SingleStageAction:
    name: str
    cost: Fraction
    outcome_dist: tuple[Fraction, ...]


@dataclass(frozen=True)
class SingleStageInstance:
    """Classic one-shot contracting problem: actions map directly to outcomes."""

    rewards: tuple[Fraction, ...]
    actions: tuple[SingleStageAction, ...]


@dataclass(frozen=True)
class SingleStageSolution:
    transfers: tuple[Fraction, ...]
    incentivized_action: int
    payment: Fraction
    profit: Fraction


# --- minimal-payment programs -------------------------------------------------


def _final_ic_rows(instance, finals, surviving, num_vars):
    """Incentive rows keeping finals[s] optimal at each surviving state."""
    rows = []
    for s in surviving:
        state = instance.states[s]
        designated = state.final_actions[finals[s]]
        for j, other in enumerate(state.final_actions):
            if j == finals[s]:
                continue
            coeffs = [_ZERO] * num_vars
            for m in range(instance.num_outcomes):
                coeffs[m] = designated.outcome_dist[m] - other.outcome_dist[m]
            rows.append(Constraint(coeffs, ">=", designated.cost - other.cost))
    return rows


def _designated_value_coeffs(instance, finals, surviving, weights):
    """Coefficients of sum_s weights[s] * (transfer value of finals[s]) over t."""
    coeffs = [_ZERO] * instance.num_outcomes
    constant = _ZERO
    for s in surviving:
        w = weights[s]
        if not w:
            continue
        act = instance.states[s].final_actions[finals[s]]
        for m, p in enumerate(act.outcome_dist):
            coeffs[m] += w * p
        constant += w * act.cost
    return coeffs, constant


def _initial_ic_rows(instance, profile, surviving, num_vars, with_state_transfers):
    """Rows comparing the designated initial action against each alternative."""
    m = instance.num_outcomes
    rows = []
    designated = instance.initial_actions[profile.initial]
    for i, other in enumerate(instance.initial_actions):
        if i == profile.initial:
            continue
        weights = {
            s: designated.transition[s] - other.transition[s] for s in surviving
        }
        t_coeffs, cost_term = _designated_value_coeffs(
            instance, profile.finals, surviving, weights
        )
        coeffs = list(t_coeffs) + [_ZERO] * (num_vars - m)
        if with_state_transfers:
            for s in surviving:
                coeffs[m + s] = weights[s]
        rhs = designated.cost - other.cost + cost_term
        rows.append(Constraint(coeffs, ">=", rhs))
    return rows


def _payment_objective(instance, profile, surviving, num_vars, with_state_transfers):
    m = instance.num_outcomes
    weights = {s: instance.initial_actions[profile.initial].transition[s] for s in surviving}
    t_coeffs, _ = _designated_value_coeffs(instance, profile.finals, surviving, weights)
    objective = list(t_coeffs) + [_ZERO] * (num_vars - m)
    if with_state_transfers:
        for s in surviving:
            objective[m + s] = weights[s]
    return objective


def min_payment_standard(instance: Instance, profile: ActionProfile) -> StandardContract | None:
    """Cheapest standard contract incentivizing the total profile, or None."""
    surviving = range(instance.num_states)
    n = instance.num_outcomes
    lp = LinearProgram(
        _payment_objective(instance, profile, surviving, n, False),
        tuple(
            _final_ic_rows(instance, profile.finals, surviving, n)
            + _initial_ic_rows(instance, profile, surviving, n, False)
        ),
    )
    result = solve_lp(lp)
    if not isinstance(result, LpOptimal):
        return None
    return StandardContract(result.x)


def min_payment_pay(instance: Instance, profile: ActionProfile) -> PayHalfwayContract | None:
    """Cheapest pay-halfway contract incentivizing the total profile, or None."""
    surviving = range(instance.num_states)
    n = instance.num_outcomes + instance.num_states
    lp = LinearProgram(
        _payment_objective(instance, profile, surviving, n, True),
        tuple(
            _final_ic_rows(instance, profile.finals, surviving, n)
            + _initial_ic_rows(instance, profile, surviving, n, True)
        ),
    )
    result = solve_lp(lp)
    if not isinstance(result, LpOptimal):
        return None
    m = instance.num_outcomes
    return PayHalfwayContract(result.x[m:], result.x[:m])


def min_payment_terminate(
    instance: Instance, terminate_set: frozenset[int] | set[int], profile: ActionProfile
) -> TerminateHalfwayContract | None:
    """Cheapest terminate-halfway contract with the given blocked states, or None.

    The profile must assign finals to exactly the surviving states.
    """
    terminate_set = frozenset(terminate_set)
    surviving = [s for s in range(instance.num_states) if s not in terminate_set]
    if set(profile.finals) != set(surviving):
        raise ValueError("profile must cover exactly the surviving states")
    n = instance.num_outcomes
    lp = LinearProgram(
        _payment_objective(instance, profile, surviving, n, False),
        tuple(
            _final_ic_rows(instance, profile.finals, surviving, n)
            + _initial_ic_rows(instance, profile, surviving, n, False)
        ),
    )
    result = solve_lp(lp)
    if not isinstance(result, LpOptimal):
        return None
    return TerminateHalfwayContract(result.x, terminate_set)


# --- enumeration --------------------------------------------------------------


def _distinct_final_indices(state) -> list[int]:
    """Lowest index of each (cost, distribution) group, in index order."""
    seen = {}
    for j, act in enumerate(state.final_actions):
        key = (act.cost, act.outcome_dist)
        if key not in seen:
            seen[key] = j
    return sorted(seen.values())


def _profit_of(instance, profile, surviving, payment) -> Fraction:
    init = instance.initial_actions[profile.initial]
    reward = _ZERO
    for s in surviving:
        p = init.transition[s]
        if p:
            act = instance.states[s].final_actions[profile.finals[s]]
            reward += p * sum(
                (q * r for q, r in zip(act.outcome_dist, instance.rewards)), _ZERO
            )
    return reward - payment


def _enumerate_profiles(instance, surviving, reps):
    """Profiles over representative finals, lexicographic order."""
    for i in range(instance.num_initial_actions):
        if surviving:
            for combo in itertools.product(*(reps[s] for s in surviving)):
                yield ActionProfile(i, dict(zip(surviving, combo)))
        else:
            yield ActionProfile(i, {})


def _search(instance, surviving, reps, solve_profile):
    """Maximize profit over profiles; first profile wins ties (lex order)."""
    best = None  # (profit, profile, contract)
    enumerated = 0
    infeasible = 0
    for profile in _enumerate_profiles(instance, surviving, reps):
        enumerated += 1
        solved = solve_profile(profile)
        if solved is None:
            infeasible += 1
            continue
        contract, payment = solved
        profit = _profit_of(instance, profile, surviving, payment)
        if best is None or profit > best[0]:
            best = (profit, profile, contract)
    return best, enumerated, infeasible


def _report(instance, best, enumerated, subsets, infeasible) -> SolveReport:
    profit, _profile, contract = best
    response = best_response(instance, contract)
    assert response.principal_profit == profit, (
        "tie-broken best response must realize the enumerated optimum"
    )
    return SolveReport(
        best_contract=contract,
        best_response=response,
        profit=profit,
        welfare=max_welfare(instance).max_welfare,
        profiles_enumerated=enumerated,
        termination_sets_enumerated=subsets,
        infeasible_profiles=infeasible,
    )


def _check_profile_cap(count: int, cap: int) -> None:
    if count > cap:
        raise EnumerationCapExceeded(
            f"{count} profiles to enumerate exceeds the cap of {cap}"
        )


def optimal_standard(
    instance: Instance, *, profiles_cap: int = DEFAULT_PROFILES_CAP
) -> SolveReport:
    """Best standard contract via exhaustive profile enumeration."""
    surviving = list(range(instance.num_states))
    reps = {s: _distinct_final_indices(instance.states[s]) for s in surviving}
    total = instance.num_initial_actions
    for s in surviving:
        total *= len(reps[s])
    _check_profile_cap(total, profiles_cap)

    def solve_profile(profile):
        lp_contract = min_payment_standard(instance, profile)
        if lp_contract is None:
            return None
        payment = _expected_transfer(instance, profile, surviving, lp_contract.transfers)
        return lp_contract, payment

    best, enumerated, infeasible = _search(instance, surviving, reps, solve_profile)
    return _report(instance, best, enumerated, 0, infeasible)


def optimal_pay(
    instance: Instance, *, profiles_cap: int = DEFAULT_PROFILES_CAP
) -> SolveReport:
    """Best pay-halfway contract via exhaustive profile enumeration."""
    surviving = list(range(instance.num_states))
    reps = {s: _distinct_final_indices(instance.states[s]) for s in surviving}
    total = instance.num_initial_actions
    for s in surviving:
        total *= len(reps[s])
    _check_profile_cap(total, profiles_cap)

    def solve_profile(profile):
        contract = min_payment_pay(instance, profile)
        if contract is None:
            return None
        payment = _expected_transfer(
            instance, profile, surviving, contract.transfers, contract.state_transfers
        )
        return contract, payment

    best, enumerated, infeasible = _search(instance, surviving, reps, solve_profile)
    return _report(instance, best, enumerated, 0, infeasible)


def optimal_terminate(
    instance: Instance,
    *,
    profiles_cap: int = DEFAULT_PROFILES_CAP,
    subsets_cap: int = DEFAULT_SUBSETS_CAP,
) -> SolveReport:
    """Best terminate-halfway contract over all termination sets and profiles.

    Termination sets are visited smallest first (then lexicographically), so
    equal-profit ties resolve to the smallest blocked set; the empty set makes
    the result dominate the optimal standard contract by construction.
    """
    num_states = instance.num_states
    if 2 ** num_states > subsets_cap:
        raise EnumerationCapExceeded(
            f"2**{num_states} termination sets exceeds the cap of {subsets_cap}"
        )
    reps = {s: _distinct_final_indices(instance.states[s]) for s in range(num_states)}

    all_states = list(range(num_states))
    subsets = []
    for size in range(num_states + 1):
        subsets.extend(itertools.combinations(all_states, size))

    total = 0
    for subset in subsets:
        count = instance.num_initial_actions
        for s in all_states:
            if s not in subset:
                count *= len(reps[s])
        total += count
    _check_profile_cap(total, profiles_cap)

    best = None
    enumerated = 0
    infeasible = 0
    for subset in subsets:
        terminate_set = frozenset(subset)
        surviving = [s for s in all_states if s not in terminate_set]

        def solve_profile(profile, terminate_set=terminate_set):
            contract = min_payment_terminate(instance, terminate_set, profile)
            if contract is None:
                return None
            payment = _expected_transfer(
                instance, profile, sorted(profile.finals), contract.transfers
            )
            return contract, payment

        sub_best, sub_enumerated, sub_infeasible = _search(
            instance, surviving, reps, solve_profile
        )
        enumerated += sub_enumerated
        infeasible += sub_infeasible
        if sub_best is not None and (best is None or sub_best[0] > best[0]):
            best = sub_best
    return _report(instance, best, enumerated, len(subsets), infeasible)


def _expected_transfer(instance, profile, surviving, transfers, state_transfers=None):
    init = instance.initial_actions[profile.initial]
    payment = _ZERO
    for s in surviving:
        p = init.transition[s]
        if p:
            act = instance.states[s].final_actions[profile.finals[s]]
            payment += p * sum((q * t for q, t in zip(act.outcome_dist, transfers)), _ZERO)
            if state_transfers is not None:
                payment += p * state_transfers[s]
    return payment


# --- reductions ---------------------------------------------------------------


def pay_to_standard_tree(instance: Instance, pay: PayHalfwayContract) -> StandardContract:
    """Fold a pay-halfway contract into an equivalent standard one on a tree.

    On a tree process each outcome has at most one predecessor state, so the
    state transfer can ride on that state's outcomes: t'_m = t_m + s_pred(m).
    The best response under the result has the same profile, payment and
    profit (outcomes no state can reach keep their transfer unchanged).
    """
    if not classify(instance).is_tree:
        raise ValueError("instance is not a tree process")
    if len(pay.state_transfers) != instance.num_states:
        raise ValueError("contract dimensions do not match the instance")
    if len(pay.transfers) != instance.num_outcomes:
        raise ValueError("contract dimensions do not match the instance")
    pred: dict[int, int] = {}
    for s, state in enumerate(instance.states):
        for act in state.final_actions:
            for m, p in enumerate(act.outcome_dist):
                if p > 0:
                    pred[m] = s
    merged = tuple(
        t + (pay.state_transfers[pred[m]] if m in pred else _ZERO)
        for m, t in enumerate(pay.transfers)
    )
    return StandardContract(merged)


def reduce_deterministic(instance: Instance) -> SingleStageInstance:
    """Collapse a deterministic first stage into one-shot composite actions.

    Each (initial action, final action at its destination state) pair becomes
    a single action with summed cost and the final action's distribution.
    The optimal standard contract of the reduction earns exactly the optimal
    standard profit of the original process.
    """
    if not classify(instance).is_deterministic_first_stage:
        raise ValueError("instance is not a deterministic first-stage process")
    actions = []
    for init in instance.initial_actions:
        dest = next(s for s, p in enumerate(init.transition) if p == 1)
        for final in instance.states[dest].final_actions:
            actions.append(
                SingleStageAction(
                    name=f"{init.name}/{final.name}",
                    cost=init.cost + final.cost,
                    outcome_dist=final.outcome_dist,
                )
            )
    return SingleStageInstance(instance.rewards, tuple(actions))


def optimal_single_stage(ssi: SingleStageInstance) -> SingleStageSolution:
    """Best standard contract of a one-shot instance via per-action programs."""
    m = len(ssi.rewards)
    best = None
    for i, action in enumerate(ssi.actions):
        rows = []
        for k, other in enumerate(ssi.actions):
            if k == i:
                continue
            coeffs = [p - q for p, q in zip(action.outcome_dist, other.outcome_dist)]
            rows.append(Constraint(coeffs, ">=", action.cost - other.cost))
        lp = LinearProgram(tuple(action.outcome_dist), tuple(rows))
        result = solve_lp(lp)
        if not isinstance(result, LpOptimal):
            continue
        payment = result.objective_value
        reward = sum((p * r for p, r in zip(action.outcome_dist, ssi.rewards)), _ZERO)
        profit = reward - payment
        if best is None or profit > best.profit:
            best = SingleStageSolution(result.x, i, payment, profit)
    assert best is not None, "a zero-cost action is always incentivizable"
    return best
