"""Expected reward, expected cost and maximal welfare of action profiles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import ActionProfile, Instance, expected_state_reward


@dataclass(frozen=True)
class StateBest:
    """Best final action of one state by surplus (expected reward minus cost)."""

    final: int
    value: Fraction


@dataclass(frozen=True)
class WelfareReport:
    max_welfare: Fraction
    argmax_profile: ActionProfile
    per_state_best: tuple[StateBest, ...]


def profile_reward(instance: Instance, profile: ActionProfile) -> Fraction:
    """Expected reward of a total profile: sum over states of F[i,s] * R[s, j_s]."""
    initial = instance.initial_actions[profile.initial]
    total = Fraction(0)
    for s in range(instance.num_states):
        p = initial.transition[s]
        if p:
            total += p * expected_state_reward(instance, s, profile.finals[s])
    return total


def profile_cost(instance: Instance, profile: ActionProfile) -> Fraction:
    """Expected cost of a total profile: c_i plus sum of F[i,s] * c[s, j_s]."""
    initial = instance.initial_actions[profile.initial]
    total = initial.cost
    for s in range(instance.num_states):
        p = initial.transition[s]
        if p:
            total += p * instance.states[s].final_actions[profile.finals[s]].cost
    return total


def max_welfare(instance: Instance) -> WelfareReport:
    """Maximal welfare over all total profiles, by per-state decomposition.

    For each state take the final action with the best surplus, then pick the
    initial action maximizing expected surplus minus its own cost.  Ties break
    to the lowest action index, so the argmax profile is deterministic.  The
    value equals the exhaustive maximum over all profiles (checked against a
    brute-force oracle in the test suite).
    """
    per_state: list[StateBest] = []
    for s, state in enumerate(instance.states):
        best_j = 0
        best_value = None
        for j in range(len(state.final_actions)):
            value = expected_state_reward(instance, s, j) - state.final_actions[j].cost
            if best_value is None or value > best_value:
                best_j, best_value = j, value
        per_state.append(StateBest(best_j, best_value))

    best_i = 0
    best_welfare = None
    for i, act in enumerate(instance.initial_actions):
        welfare = sum(
            (p * sb.value for p, sb in zip(act.transition, per_state)), Fraction(0)
        ) - act.cost
        if best_welfare is None or welfare > best_welfare:
            best_i, best_welfare = i, welfare

    profile = ActionProfile(best_i, {s: sb.final for s, sb in enumerate(per_state)})
    return WelfareReport(best_welfare, profile, tuple(per_state))
