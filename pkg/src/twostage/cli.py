"""Command-line front end.

Every command prints a single JSON document to stdout with sorted keys, so
output is byte-deterministic for fixed inputs and flags (the only exception
is the wall-clock ``duration_seconds`` field).  Exact rationals appear as
``{"exact": "p/q", "decimal": <12 significant digits>}`` pairs.

Exit codes are part of the contract:
  0  success
  1  validation failure (instance invariants, contract dimensions, family
     parameter constraints)
  2  enumeration cap exceeded
  3  I/O, JSON or command-line parse error
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from decimal import Decimal, localcontext
from fractions import Fraction

from . import contracts as solvers
from .agent import best_response, simulate
from .generators import FAMILIES, FamilyParams, generate
from .linear import analyze
from .model import (
    ActionProfile,
    Instance,
    InstanceFormatError,
    LinearContract,
    classify,
    contract_from_json,
    contract_to_dict,
    format_rational,
    instance_from_json,
    instance_to_dict,
    instance_to_json,
    parse_rational,
    validate,
)
from .welfare import max_welfare

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CAP = 2
EXIT_IO = 3


def _decimal_str(value: Fraction, digits: int = 12) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(value.numerator) / Decimal(value.denominator))


def _rat(value: Fraction) -> dict:
    return {"exact": format_rational(value), "decimal": _decimal_str(value)}


def _ratio(numerator: Fraction, denominator: Fraction):
    return _rat(numerator / denominator) if denominator != 0 else None


def _profile_doc(profile: ActionProfile) -> dict:
    return {
        "initial": profile.initial,
        "finals": {str(s): j for s, j in sorted(profile.finals.items())},
    }


def _contract_doc(contract) -> dict:
    doc = contract_to_dict(contract)
    for key in ("t", "s"):
        if key in doc:
            doc[key] = [_rat(Fraction(v)) for v in doc[key]]
    if "alpha" in doc:
        doc["alpha"] = _rat(Fraction(doc["alpha"]))
    return doc


def instance_digest(instance: Instance) -> str:
    canonical = json.dumps(instance_to_dict(instance), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _emit(doc: dict) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _load_instance(path: str) -> Instance:
    return instance_from_json(_read(path))


def _require_valid(instance: Instance) -> None:
    report = validate(instance)
    if not report.ok:
        for violation in report.violations:
            print(f"invalid instance: {violation}", file=sys.stderr)
        raise _CommandFailed(EXIT_VALIDATION)


class _CommandFailed(Exception):
    def __init__(self, code: int):
        self.code = code


# --- commands -----------------------------------------------------------------


def _cmd_validate(args) -> int:
    instance = _load_instance(args.instance)
    report = validate(instance)
    _emit(
        {
            "command": "validate",
            "ok": report.ok,
            "violations": [
                {"location": v.location, "rule": v.rule} for v in report.violations
            ],
        }
    )
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _cmd_classify(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance)
    process_class = classify(instance)
    _emit(
        {
            "command": "classify",
            "instance_digest": instance_digest(instance),
            "is_tree": process_class.is_tree,
            "is_stochastic_first_stage": process_class.is_stochastic_first_stage,
            "is_deterministic_first_stage": process_class.is_deterministic_first_stage,
            "label": process_class.label,
        }
    )
    return EXIT_OK


def _cmd_welfare(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance)
    report = max_welfare(instance)
    _emit(
        {
            "command": "welfare",
            "instance_digest": instance_digest(instance),
            "max_welfare": _rat(report.max_welfare),
            "argmax_profile": _profile_doc(report.argmax_profile),
            "per_state_best": [
                {"final": sb.final, "value": _rat(sb.value)} for sb in report.per_state_best
            ],
        }
    )
    return EXIT_OK


def _solver_result_doc(report: solvers.SolveReport) -> dict:
    return {
        "contract": _contract_doc(report.best_contract),
        "profile": _profile_doc(report.best_response.profile),
        "payment": _rat(report.best_response.expected_payment),
        "profit": _rat(report.profit),
        "profiles_enumerated": report.profiles_enumerated,
        "termination_sets_enumerated": report.termination_sets_enumerated,
        "infeasible_profiles": report.infeasible_profiles,
    }


def _linear_result_doc(instance: Instance) -> dict:
    analysis = analyze(instance)
    response = best_response(instance, LinearContract(analysis.optimal.alpha))
    return {
        "contract": {"kind": "linear", "alpha": _rat(analysis.optimal.alpha)},
        "profile": _profile_doc(response.profile),
        "payment": _rat(response.expected_payment),
        "profit": _rat(analysis.optimal.profit),
        "breakpoints": len(analysis.breakpoints),
    }


def _cmd_solve(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance)
    started = time.perf_counter()
    if args.contract == "standard":
        result = _solver_result_doc(solvers.optimal_standard(instance, profiles_cap=args.profiles_cap))
    elif args.contract == "pay":
        result = _solver_result_doc(solvers.optimal_pay(instance, profiles_cap=args.profiles_cap))
    elif args.contract == "terminate":
        result = _solver_result_doc(
            solvers.optimal_terminate(
                instance, profiles_cap=args.profiles_cap, subsets_cap=args.subsets_cap
            )
        )
    else:
        result = _linear_result_doc(instance)
    welfare = max_welfare(instance).max_welfare
    profit = Fraction(result["profit"]["exact"])
    _emit(
        {
            "command": "solve",
            "contract_kind": args.contract,
            "instance_digest": instance_digest(instance),
            "result": result,
            "welfare": _rat(welfare),
            "profit_over_welfare": _ratio(profit, welfare),
            "duration_seconds": time.perf_counter() - started,
        }
    )
    return EXIT_OK


def _cmd_best_response(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance)
    contract = contract_from_json(_read(args.contract_file))
    response = best_response(instance, contract)
    _emit(
        {
            "command": "best-response",
            "instance_digest": instance_digest(instance),
            "contract": _contract_doc(contract),
            "profile": _profile_doc(response.profile),
            "agent_utility": _rat(response.agent_utility),
            "expected_payment": _rat(response.expected_payment),
            "principal_profit": _rat(response.principal_profit),
            "per_state_utility": [_rat(u) for u in response.per_state_utility],
        }
    )
    return EXIT_OK


def _cmd_breakpoints(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance)
    analysis = analyze(instance)

    def profile_str(profile: ActionProfile) -> str:
        finals = ";".join(str(j) for _, j in sorted(profile.finals.items()))
        return f"{profile.initial}|{finals}"

    _emit(
        {
            "command": "breakpoints",
            "instance_digest": instance_digest(instance),
            "breakpoints": [
                {
                    "alpha": _rat(bp.alpha),
                    "profile_left": _profile_doc(bp.profile_left),
                    "profile_right": _profile_doc(bp.profile_right),
                }
                for bp in analysis.breakpoints
            ],
            "segments": [
                {
                    "alpha_low": _rat(seg.alpha_low),
                    "alpha_high": _rat(seg.alpha_high),
                    "profile": _profile_doc(seg.profile),
                    "reward": _rat(seg.reward),
                    "cost": _rat(seg.cost),
                }
                for seg in analysis.segments
            ],
            "optimal": {
                "alpha": _rat(analysis.optimal.alpha),
                "profit": _rat(analysis.optimal.profit),
            },
        }
    )
    if args.csv:
        candidates = sorted({Fraction(0), Fraction(1), *(bp.alpha for bp in analysis.breakpoints)})
        lines = ["alpha_exact,alpha_decimal,profit_exact,profit_decimal,profile"]
        for alpha in candidates:
            response = best_response(instance, LinearContract(alpha))
            lines.append(
                ",".join(
                    [
                        format_rational(alpha),
                        _decimal_str(alpha),
                        format_rational(response.principal_profit),
                        _decimal_str(response.principal_profit),
                        profile_str(response.profile),
                    ]
                )
            )
        with open(args.csv, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
    return EXIT_OK


def _parse_param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise InstanceFormatError(f"parameters take the form name=value, got {text!r}")
    name, raw = text.split("=", 1)
    try:
        return name, int(raw)
    except ValueError:
        return name, parse_rational(raw)


def _cmd_generate(args) -> int:
    params = dict(_parse_param(p) for p in args.param or [])
    instance = generate(FamilyParams(args.family, params))
    text = instance_to_json(instance)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _cmd_compare(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance)
    started = time.perf_counter()
    standard = solvers.optimal_standard(instance, profiles_cap=args.profiles_cap)
    pay = solvers.optimal_pay(instance, profiles_cap=args.profiles_cap)
    terminate = solvers.optimal_terminate(
        instance, profiles_cap=args.profiles_cap, subsets_cap=args.subsets_cap
    )
    linear = _linear_result_doc(instance)
    welfare = standard.welfare
    best_profit = max(
        standard.profit, pay.profit, terminate.profit, Fraction(linear["profit"]["exact"])
    )
    process_class = classify(instance)
    _emit(
        {
            "command": "compare",
            "instance_digest": instance_digest(instance),
            "process_class": process_class.label,
            "welfare": _rat(welfare),
            "results": {
                "standard": _solver_result_doc(standard),
                "linear": linear,
                "pay": _solver_result_doc(pay),
                "terminate": _solver_result_doc(terminate),
            },
            "ratios": {
                "profit_over_welfare": _ratio(best_profit, welfare),
                "pay_over_standard": _ratio(pay.profit, standard.profit),
                "terminate_over_standard": _ratio(terminate.profit, standard.profit),
            },
            "duration_seconds": time.perf_counter() - started,
        }
    )
    return EXIT_OK


def _cmd_simulate(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance)
    contract = contract_from_json(_read(args.contract_file))
    result = simulate(instance, contract, args.episodes, args.seed)
    _emit(
        {
            "command": "simulate",
            "instance_digest": instance_digest(instance),
            "contract": _contract_doc(contract),
            "episodes": args.episodes,
            "seed": args.seed,
            "empirical_profit": result.empirical_profit,
            "empirical_payment": result.empirical_payment,
            "std_error": result.std_error,
        }
    )
    return EXIT_OK


# --- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # command-line parse errors exit 3, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twostage", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        return p

    p = add("validate", _cmd_validate, help="check instance invariants")
    p.add_argument("instance")

    p = add("classify", _cmd_classify, help="report the process class flags")
    p.add_argument("instance")

    p = add("welfare", _cmd_welfare, help="maximal welfare and its profile")
    p.add_argument("instance")

    p = add("solve", _cmd_solve, help="optimal contract of one kind")
    p.add_argument("instance")
    p.add_argument("--contract", required=True, choices=("standard", "linear", "pay", "terminate"))
    p.add_argument("--profiles-cap", type=int, default=solvers.DEFAULT_PROFILES_CAP)
    p.add_argument("--subsets-cap", type=int, default=solvers.DEFAULT_SUBSETS_CAP)

    p = add("best-response", _cmd_best_response, help="agent behavior under a contract file")
    p.add_argument("instance")
    p.add_argument("--contract-file", required=True)

    p = add("breakpoints", _cmd_breakpoints, help="linear-contract breakpoint analysis")
    p.add_argument("instance")
    p.add_argument("--csv", help="also write per-candidate plot data to this path")

    p = add("generate", _cmd_generate, help="emit an instance from a named family")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--out", help="write to this path instead of stdout")

    p = add("compare", _cmd_compare, help="all four optima side by side")
    p.add_argument("instance")
    p.add_argument("--profiles-cap", type=int, default=solvers.DEFAULT_PROFILES_CAP)
    p.add_argument("--subsets-cap", type=int, default=solvers.DEFAULT_SUBSETS_CAP)

    p = add("simulate", _cmd_simulate, help="Monte Carlo cross-check of a contract file")
    p.add_argument("instance")
    p.add_argument("--contract-file", required=True)
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CommandFailed as exc:
        return exc.code
    except solvers.EnumerationCapExceeded as exc:
        print(f"twostage: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InstanceFormatError, OSError) as exc:
        print(f"twostage: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"twostage: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
