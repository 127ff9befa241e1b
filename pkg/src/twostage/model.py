"""Exact-arithmetic domain model for two-stage delegation processes.

A process has M outcomes, S intermediate states, N1 initial actions and up to
N2 final actions per state.  The agent picks an initial action (stochastic
transition to a state), observes the state, then picks a final action
(stochastic transition to an outcome).  All probabilities, costs and rewards
are exact rationals; nothing in this package ever rounds.

Everything here is immutable after construction and safe to share across
threads.  Instances are plain containers: ``validate`` reports invariant
violations as data instead of refusing to construct.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Rational = Fraction


class InstanceFormatError(ValueError):
    """An instance or contract document could not be parsed."""


def parse_rational(value: object) -> Fraction:
    """Parse ``"0.9"``, ``"9/10"``, ``"5"`` or an int into an exact Fraction.

    Floats are rejected: a JSON ``0.9`` is a binary approximation, not the
    rational 9/10, and silent conversion would corrupt exact regressions.
    """
    if isinstance(value, bool):
        raise InstanceFormatError(f"not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise InstanceFormatError(
            f"floating-point literal {value!r} is not exact; write it as a string"
        )
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceFormatError(f"not a rational number: {value!r}") from exc
    raise InstanceFormatError(f"not a rational number: {value!r}")


def format_rational(value: Fraction) -> str:
    """Canonical string form, ``"p/q"`` or ``"p"``; round-trips exactly."""
    return str(value)


def _rational_tuple(values: Iterable[object]) -> tuple[Fraction, ...]:
    return tuple(v if isinstance(v, Fraction) else Fraction(v) for v in values)


@dataclass(frozen=True)
class InitialAction:
    name: str
    cost: Fraction
    transition: tuple[Fraction, ...]  # probability of each state, length S

    def __post_init__(self):
        object.__setattr__(self, "cost", Fraction(self.cost))
        object.__setattr__(self, "transition", _rational_tuple(self.transition))


@dataclass(frozen=True)
class FinalAction:
    name: str
    cost: Fraction
    outcome_dist: tuple[Fraction, ...]  # probability of each outcome, length M

    def __post_init__(self):
        object.__setattr__(self, "cost", Fraction(self.cost))
        object.__setattr__(self, "outcome_dist", _rational_tuple(self.outcome_dist))


@dataclass(frozen=True)
class State:
    name: str
    final_actions: tuple[FinalAction, ...]

    def __post_init__(self):
        object.__setattr__(self, "final_actions", tuple(self.final_actions))


@dataclass(frozen=True)
class Instance:
    """A two-stage delegation process.

    ``rewards[m]`` is the principal's reward for outcome m.  Rewards may be
    any rational; probabilities and costs are constrained by ``validate``.
    """

    rewards: tuple[Fraction, ...]
    initial_actions: tuple[InitialAction, ...]
    states: tuple[State, ...]

    def __post_init__(self):
        object.__setattr__(self, "rewards", _rational_tuple(self.rewards))
        object.__setattr__(self, "initial_actions", tuple(self.initial_actions))
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def num_outcomes(self) -> int:
        return len(self.rewards)

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_initial_actions(self) -> int:
        return len(self.initial_actions)

    @property
    def max_final_actions(self) -> int:
        return max((len(s.final_actions) for s in self.states), default=0)


@dataclass(frozen=True)
class ActionProfile:
    """One initial action plus one final action per (surviving) state.

    ``finals`` maps state index -> final-action index.  It is total for
    standard, linear and pay-halfway contracts; for terminate-halfway
    contracts it is defined exactly on the states that are not terminated.
    """

    initial: int
    finals: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "finals", dict(self.finals))

    def sort_key(self) -> tuple:
        """Lexicographic key: initial index, then finals by state index."""
        return (self.initial, tuple(sorted(self.finals.items())))


# --- contracts ---------------------------------------------------------------


@dataclass(frozen=True)
class StandardContract:
    """Non-negative transfer per final outcome."""

    transfers: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "transfers", _rational_tuple(self.transfers))
        if any(t < 0 for t in self.transfers):
            raise ValueError("transfers must be non-negative")

    kind = "standard"


@dataclass(frozen=True)
class LinearContract:
    """Standard contract with transfer alpha * reward per outcome.

    Only meaningful on instances whose rewards are all non-negative;
    operations taking an instance enforce that.
    """

    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    kind = "linear"


@dataclass(frozen=True)
class PayHalfwayContract:
    """Outcome transfers plus a non-negative transfer per intermediate state."""

    state_transfers: tuple[Fraction, ...]
    transfers: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "state_transfers", _rational_tuple(self.state_transfers))
        object.__setattr__(self, "transfers", _rational_tuple(self.transfers))
        if any(t < 0 for t in self.state_transfers) or any(t < 0 for t in self.transfers):
            raise ValueError("transfers must be non-negative")

    kind = "pay_halfway"


@dataclass(frozen=True)
class TerminateHalfwayContract:
    """Outcome transfers plus a set of states at which the process ends.

    Reaching a terminated state gives both parties zero payoff.
    """

    transfers: tuple[Fraction, ...]
    terminate_set: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "transfers", _rational_tuple(self.transfers))
        object.__setattr__(self, "terminate_set", frozenset(int(s) for s in self.terminate_set))
        if any(t < 0 for t in self.transfers):
            raise ValueError("transfers must be non-negative")

    kind = "terminate_halfway"


Contract = Union[StandardContract, LinearContract, PayHalfwayContract, TerminateHalfwayContract]


# --- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    location: str
    rule: str

    def __str__(self) -> str:
        return f"{self.location}: {self.rule}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_distribution(row: Sequence[Fraction], location: str, out: list[Violation]) -> None:
    if any(p < 0 or p > 1 for p in row):
        out.append(Violation(location, "distribution entries must lie in [0, 1]"))
    if sum(row, Fraction(0)) != 1:
        out.append(Violation(location, "distribution does not sum to 1"))


def validate(instance: Instance) -> ValidationReport:
    """Check every model invariant; violations are data, not exceptions."""
    v: list[Violation] = []
    m = instance.num_outcomes
    s = instance.num_states

    if m < 1:
        v.append(Violation("rewards", "at least one outcome is required"))
    if s < 1:
        v.append(Violation("states", "at least one intermediate state is required"))
    if instance.num_initial_actions < 1:
        v.append(Violation("initial_actions", "at least one initial action is required"))

    for i, act in enumerate(instance.initial_actions):
        loc = f"initial_actions[{i}]"
        if act.cost < 0:
            v.append(Violation(loc + ".cost", "cost must be non-negative"))
        if len(act.transition) != s:
            v.append(Violation(loc + ".transition", f"expected {s} entries, got {len(act.transition)}"))
        else:
            _check_distribution(act.transition, loc + ".transition", v)
    if instance.initial_actions and not any(a.cost == 0 for a in instance.initial_actions):
        v.append(Violation("initial_actions", "missing null initial action (zero cost)"))

    for si, state in enumerate(instance.states):
        loc = f"states[{si}]"
        if not state.final_actions:
            v.append(Violation(loc, "state has no final actions"))
            continue
        for j, act in enumerate(state.final_actions):
            aloc = f"{loc}.final_actions[{j}]"
            if act.cost < 0:
                v.append(Violation(aloc + ".cost", "cost must be non-negative"))
            if len(act.outcome_dist) != m:
                v.append(Violation(aloc + ".outcome_dist", f"expected {m} entries, got {len(act.outcome_dist)}"))
            else:
                _check_distribution(act.outcome_dist, aloc + ".outcome_dist", v)
        if not any(a.cost == 0 for a in state.final_actions):
            v.append(Violation(loc, "missing null final action (zero cost)"))

    return ValidationReport(tuple(v))


# --- classification -----------------------------------------------------------


@dataclass(frozen=True)
class ProcessClass:
    """Structural flags of a process; non-exclusive, recomputable from the instance."""

    is_tree: bool
    is_stochastic_first_stage: bool
    is_deterministic_first_stage: bool

    @property
    def label(self) -> str:
        names = []
        if self.is_tree:
            names.append("tree")
        if self.is_stochastic_first_stage:
            names.append("stochastic_first_stage")
        if self.is_deterministic_first_stage:
            names.append("deterministic_first_stage")
        return ",".join(names) if names else "general"


def classify(instance: Instance) -> ProcessClass:
    """Classify by the reachability structure of states and outcomes.

    * tree: each outcome is reachable from at most one state;
    * stochastic first stage: exactly one initial action;
    * deterministic first stage: every transition row is a unit vector.
    """
    reachable_from = [set() for _ in range(instance.num_outcomes)]
    for si, state in enumerate(instance.states):
        for act in state.final_actions:
            for mi, p in enumerate(act.outcome_dist):
                if p > 0:
                    reachable_from[mi].add(si)
    is_tree = all(len(src) <= 1 for src in reachable_from)

    is_stochastic = instance.num_initial_actions == 1

    def unit_row(row: tuple[Fraction, ...]) -> bool:
        return sum(1 for p in row if p == 1) == 1 and all(p in (0, 1) for p in row)

    is_deterministic = all(unit_row(a.transition) for a in instance.initial_actions)
    return ProcessClass(is_tree, is_stochastic, is_deterministic)


def expected_state_reward(instance: Instance, state: int, final: int) -> Fraction:
    """Expected reward of taking the given final action at the given state."""
    act = instance.states[state].final_actions[final]
    return sum(
        (p * r for p, r in zip(act.outcome_dist, instance.rewards)), Fraction(0)
    )


# --- serialization ------------------------------------------------------------


def instance_to_dict(instance: Instance) -> dict:
    return {
        "rewards": [format_rational(r) for r in instance.rewards],
        "initial_actions": [
            {
                "name": a.name,
                "cost": format_rational(a.cost),
                "transition": [format_rational(p) for p in a.transition],
            }
            for a in instance.initial_actions
        ],
        "states": [
            {
                "name": s.name,
                "final_actions": [
                    {
                        "name": a.name,
                        "cost": format_rational(a.cost),
                        "outcome_dist": [format_rational(p) for p in a.outcome_dist],
                    }
                    for a in s.final_actions
                ],
            }
            for s in instance.states
        ],
    }


def instance_from_dict(doc: object) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceFormatError("instance document must be a JSON object")
    try:
        rewards = [parse_rational(r) for r in doc["rewards"]]
        initials = [
            InitialAction(
                name=str(a.get("name", f"i{idx}")),
                cost=parse_rational(a["cost"]),
                transition=[parse_rational(p) for p in a["transition"]],
            )
            for idx, a in enumerate(doc["initial_actions"])
        ]
        states = [
            State(
                name=str(s.get("name", f"s{idx}")),
                final_actions=tuple(
                    FinalAction(
                        name=str(a.get("name", f"j{jdx}")),
                        cost=parse_rational(a["cost"]),
                        outcome_dist=[parse_rational(p) for p in a["outcome_dist"]],
                    )
                    for jdx, a in enumerate(s["final_actions"])
                ),
            )
            for idx, s in enumerate(doc["states"])
        ]
    except (KeyError, TypeError, AttributeError) as exc:
        raise InstanceFormatError(f"malformed instance document: {exc!r}") from exc
    return Instance(tuple(rewards), tuple(initials), tuple(states))


def instance_to_json(instance: Instance, *, indent: int | None = 2) -> str:
    return json.dumps(instance_to_dict(instance), indent=indent, sort_keys=True)


def instance_from_json(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    return instance_from_dict(doc)


def contract_to_dict(contract: Contract) -> dict:
    if isinstance(contract, StandardContract):
        return {"kind": "standard", "t": [format_rational(t) for t in contract.transfers]}
    if isinstance(contract, LinearContract):
        return {"kind": "linear", "alpha": format_rational(contract.alpha)}
    if isinstance(contract, PayHalfwayContract):
        return {
            "kind": "pay_halfway",
            "s": [format_rational(t) for t in contract.state_transfers],
            "t": [format_rational(t) for t in contract.transfers],
        }
    if isinstance(contract, TerminateHalfwayContract):
        return {
            "kind": "terminate_halfway",
            "t": [format_rational(t) for t in contract.transfers],
            "terminate_set": sorted(contract.terminate_set),
        }
    raise TypeError(f"not a contract: {contract!r}")


def contract_from_dict(doc: object) -> Contract:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InstanceFormatError("contract document must be an object with a 'kind' field")
    kind = doc["kind"]
    try:
        if kind == "standard":
            return StandardContract(tuple(parse_rational(t) for t in doc["t"]))
        if kind == "linear":
            return LinearContract(parse_rational(doc["alpha"]))
        if kind == "pay_halfway":
            return PayHalfwayContract(
                tuple(parse_rational(t) for t in doc["s"]),
                tuple(parse_rational(t) for t in doc["t"]),
            )
        if kind == "terminate_halfway":
            terminate = doc["terminate_set"]
            if not all(isinstance(s, int) and not isinstance(s, bool) for s in terminate):
                raise InstanceFormatError("terminate_set must contain state indices")
            return TerminateHalfwayContract(
                tuple(parse_rational(t) for t in doc["t"]), frozenset(terminate)
            )
    except (KeyError, TypeError, AttributeError) as exc:
        raise InstanceFormatError(f"malformed contract document: {exc!r}") from exc
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc
    raise InstanceFormatError(f"unknown contract kind: {kind!r}")


def contract_to_json(contract: Contract, *, indent: int | None = 2) -> str:
    return json.dumps(contract_to_dict(contract), indent=indent, sort_keys=True)


def contract_from_json(text: str) -> Contract:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    return contract_from_dict(doc)
