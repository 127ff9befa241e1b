"""Linear-contract analysis via exact upper envelopes of utility lines.

Under a linear contract the agent's utility from a final action is a line
alpha * R - c in the fraction alpha, so her behavior on [0, 1] is piecewise
constant: per-state envelopes give the final-action switch points, and within
each final-fixed interval an envelope over initial actions gives the rest.
Principal profit (1 - alpha) * R_a is decreasing on each piece, so the
optimum sits at a breakpoint (or at alpha = 0), where the principal-favoring
tie-break applies.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .agent import best_response
from .model import ActionProfile, Instance, LinearContract, expected_state_reward

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class Segment:
    """Open interval of alpha on which the agent's profile is constant."""

    alpha_low: Fraction
    alpha_high: Fraction
    profile: ActionProfile
    reward: Fraction
    cost: Fraction


@dataclass(frozen=True)
class Breakpoint:
    alpha: Fraction
    profile_left: ActionProfile
    profile_right: ActionProfile


@dataclass(frozen=True)
class LinearOptimum:
    alpha: Fraction
    profit: Fraction


@dataclass(frozen=True)
class BreakpointAnalysis:
    breakpoints: tuple[Breakpoint, ...]
    segments: tuple[Segment, ...]
    optimal: LinearOptimum


def _upper_envelope(lines, lo=_ZERO, hi=_ONE):
    """Upper envelope of lines (slope, intercept, key) over [lo, hi].

    Returns (knees, segments): interior switch points, and (left, right, key)
    pieces partitioning [lo, hi].  Exact rational pairwise-intersection sweep;
    identical lines collapse to the lowest key.
    """
    best_by_slope: dict[Fraction, tuple[Fraction, int]] = {}
    for slope, intercept, key in lines:
        cur = best_by_slope.get(slope)
        if cur is None or intercept > cur[0] or (intercept == cur[0] and key < cur[1]):
            best_by_slope[slope] = (intercept, key)
    items = sorted((slope, ic, key) for slope, (ic, key) in best_by_slope.items())

    hull: list[tuple[Fraction, Fraction, int]] = []
    knees: list[Fraction] = []  # knees[i] separates hull[i] and hull[i+1]
    for line in items:
        while True:
            if not hull:
                hull.append(line)
                break
            slope1, ic1, _ = hull[-1]
            slope2, ic2, _ = line
            x = (ic1 - ic2) / (slope2 - slope1)
            if knees and x <= knees[-1]:
                hull.pop()
                knees.pop()
                continue
            hull.append(line)
            knees.append(x)
            break

    interior: list[Fraction] = []
    segments: list[tuple[Fraction, Fraction, int]] = []
    left = lo
    for i, (_slope, _ic, key) in enumerate(hull):
        knee = knees[i] if i < len(knees) else None
        right = hi if knee is None or knee > hi else knee
        if right > left:
            segments.append((left, right, key))
            if knee is not None and lo < right < hi:
                interior.append(right)
            left = right
        if left >= hi:
            break
    return interior, segments


def _state_lines(instance: Instance, s: int):
    state = instance.states[s]
    return [
        (expected_state_reward(instance, s, j), -state.final_actions[j].cost, j)
        for j in range(len(state.final_actions))
    ]


def state_breakpoints(instance: Instance, state: int) -> list[Fraction]:
    """Alphas in (0, 1) where the agent's best final action at a state changes.

    Dominated actions contribute none; a state whose actions share one
    envelope line has no breakpoints.
    """
    knees, _ = _upper_envelope(_state_lines(instance, state))
    return knees


def analyze(instance: Instance) -> BreakpointAnalysis:
    """Full piecewise structure of the agent's response to linear contracts.

    Requires all rewards non-negative.  Candidate alphas are every breakpoint
    plus 0 and 1; each is scored with the backward-induction best response so
    breakpoint ties resolve exactly as the agent would.
    """
    if any(r < 0 for r in instance.rewards):
        raise ValueError("linear contracts require all rewards to be non-negative")

    num_states = instance.num_states
    state_envelopes = []
    final_knees: set[Fraction] = set()
    for s in range(num_states):
        knees, segs = _upper_envelope(_state_lines(instance, s))
        state_envelopes.append(segs)
        final_knees.update(knees)

    def final_choice(segs, alpha):
        for left, right, key in segs:
            if left <= alpha <= right:
                return key
        raise AssertionError("alpha outside [0, 1]")

    boundaries = [_ZERO, *sorted(final_knees), _ONE]
    segments: list[Segment] = []
    for lo, hi in zip(boundaries, boundaries[1:]):
        mid = (lo + hi) / 2
        finals = {s: final_choice(state_envelopes[s], mid) for s in range(num_states)}
        lines = []
        for i, act in enumerate(instance.initial_actions):
            slope = _ZERO
            cost = act.cost
            for s in range(num_states):
                p = act.transition[s]
                if p:
                    slope += p * expected_state_reward(instance, s, finals[s])
                    cost += p * instance.states[s].final_actions[finals[s]].cost
            lines.append((slope, -cost, i))
        _, initial_segs = _upper_envelope(lines, lo, hi)
        for seg_lo, seg_hi, i in initial_segs:
            slope, neg_cost, _ = lines[i]
            segments.append(
                Segment(seg_lo, seg_hi, ActionProfile(i, finals), slope, -neg_cost)
            )

    breakpoints = tuple(
        Breakpoint(right.alpha_low, left.profile, right.profile)
        for left, right in zip(segments, segments[1:])
    )
    bound = num_states * instance.num_initial_actions * instance.max_final_actions
    assert len(breakpoints) <= bound, "breakpoint count exceeds S*N1*N2"

    candidates = sorted({_ZERO, _ONE, *(bp.alpha for bp in breakpoints)})
    best: LinearOptimum | None = None
    for alpha in candidates:
        profit = best_response(instance, LinearContract(alpha)).principal_profit
        if best is None or profit > best.profit:
            best = LinearOptimum(alpha, profit)
    return BreakpointAnalysis(breakpoints, tuple(segments), best)


def optimal_linear(instance: Instance) -> LinearOptimum:
    """Best linear contract: the profit-maximizing candidate alpha."""
    return analyze(instance).optimal
