"""Command line entry point.

Exit status: 0 on success, 1 on an invariant violation, 2 on usage or
parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import adversaries, harness
from .adversaries import AdversaryConfig, AdversaryError
from .harness import InvariantViolation, TraceError
from .model import ModelError, ProblemParams
from .oracle import InstanceTooLarge, opt_cost
from .phases import partition
from .policies import PolicyKind


class UsageError(Exception):
    pass


def _params(args) -> ProblemParams:
    try:
        return ProblemParams(args.n, args.k, getattr(args, "m", None))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _policy(token: str) -> PolicyKind:
    try:
        return PolicyKind.parse(token)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _report_row(rep: harness.SimReport) -> dict:
    return {
        "policy": rep.policy,
        "n": rep.n,
        "k": rep.k,
        "runs": len(rep.seeds),
        "length": rep.length,
        "faults_mean": float(rep.faults),
        "faults_stderr": rep.faults_stderr,
        "complete_phases": rep.complete_phases,
        "opt_cost": rep.opt_cost,
        "ratio_vs_opt": rep.ratio_vs_opt,
        "ratio_vs_phase_bound": rep.ratio_vs_phase_bound,
    }


def _emit_report(args, rep: harness.SimReport) -> None:
    if args.format == "csv":
        _emit(args, harness.rows_to_csv([_report_row(rep)]))
    else:
        _emit(args, rep.to_json())


def cmd_run(args) -> None:
    sigma = harness.read_trace(args.trace)
    rep = harness.run(sigma, _params(args), _policy(args.policy), args.seed, with_opt=args.opt)
    _emit_report(args, rep)


def cmd_expect(args) -> None:
    sigma = harness.read_trace(args.trace)
    seeds = harness.derive_seeds(args.seed, args.seeds)
    rep = harness.expect(sigma, _params(args), _policy(args.policy), seeds, with_opt=args.opt)
    _emit_report(args, rep)


def cmd_compare(args) -> None:
    sigma = harness.read_trace(args.trace)
    tokens = args.policy or [k.value for k in PolicyKind]
    kinds = [_policy(t) for tok in tokens for t in tok.split(",") if t]
    rows = harness.compare(sigma, _params(args), kinds, harness.derive_seeds(args.seed, args.seeds))
    _emit(args, harness.rows_to_csv(rows) if args.format == "csv" else harness.rows_to_json(rows))


def cmd_opt(args) -> None:
    sigma = harness.read_trace(args.trace)
    try:
        res = opt_cost(sigma, _params(args), witness=args.witness)
    except InstanceTooLarge as exc:
        raise UsageError(str(exc)) from None
    _emit(args, json.dumps(res.to_dict(), indent=2, sort_keys=True))


def cmd_phases(args) -> None:
    sigma = harness.read_trace(args.trace)
    stats = partition(sigma, _params(args)).finalize()
    _emit(args, json.dumps(stats.to_dict(), indent=2, sort_keys=True))


def cmd_adversary(args) -> None:
    params = _params(args)
    kind = _policy(args.policy)
    cfg = AdversaryConfig(params, steps=args.steps, seed=args.seed, clones=args.clones)
    try:
        if args.mode == "cruel":
            res = adversaries.cruel_paging_adversary(kind, cfg)
            out = {
                "mode": "cruel",
                "policy": kind.value,
                "n": params.n,
                "k": params.k,
                "length": len(res.sigma),
                "alg_cost": res.alg_cost,
                "opt_cost": res.opt_cost,
                "opt_exact": res.opt_exact,
                "ratio": res.ratio,
            }
        else:
            res = adversaries.tp_distributional_adversary(kind, cfg)
            out = {
                "mode": "tp",
                "policy": kind.value,
                "n": params.n,
                "k": params.k,
                "length": len(res.sigma),
                "phases": res.phases,
                "clones": args.clones,
                "per_phase_cost": res.per_phase_cost,
                "per_phase_stderr": res.per_phase_stderr,
            }
    except AdversaryError as exc:
        raise UsageError(str(exc)) from None
    if args.emit_trace:
        harness.write_trace(args.emit_trace, res.sigma,
                            header=f"{args.mode} adversary vs {kind.value}, n={params.n} k={params.k}")
    _emit(args, json.dumps(out, indent=2, sort_keys=True))


def cmd_gen(args) -> None:
    params = _params(args)
    cfg = AdversaryConfig(params, steps=args.steps, seed=args.seed,
                          types=args.types, items_per_type=args.items_per_type, zipf_s=args.s)
    try:
        sigma = adversaries.gen_zipf(cfg) if args.dist == "zipf" else adversaries.gen_uniform(cfg)
    except AdversaryError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, harness.format_trace(sigma, header=f"{args.dist} workload, seed={args.seed}"))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, required=True, help="companion cache size")
    common.add_argument("--k", type=int, required=True, help="main cache slots per type")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write output here instead of stdout")

    traced = argparse.ArgumentParser(add_help=False)
    traced.add_argument("--trace", required=True, help="trace file: '<type> <item>' per line")

    p = argparse.ArgumentParser(prog="compcache", description="(n,k)-companion caching lab")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", parents=[common, traced], help="replay a trace once")
    s.add_argument("--policy", default="det-marking")
    s.add_argument("--opt", action="store_true", help="also compute the exact optimum")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("expect", parents=[common, traced], help="mean faults over seeds")
    s.add_argument("--policy", default="tp")
    s.add_argument("--seeds", type=int, default=100, help="number of runs derived from --seed")
    s.add_argument("--opt", action="store_true")
    s.set_defaults(func=cmd_expect)

    s = sub.add_parser("compare", parents=[common, traced], help="table over policies")
    s.add_argument("--policy", action="append", help="repeatable or comma separated")
    s.add_argument("--seeds", type=int, default=100)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("opt", parents=[common, traced], help="exact offline optimum")
    s.add_argument("--witness", action="store_true")
    s.set_defaults(func=cmd_opt)

    s = sub.add_parser("phases", parents=[common, traced], help="phase partition report")
    s.set_defaults(func=cmd_phases)

    s = sub.add_parser("adversary", parents=[common], help="lower-bound adversaries")
    s.add_argument("--mode", choices=("cruel", "tp"), required=True)
    s.add_argument("--policy", default="det-marking")
    s.add_argument("--steps", type=int, default=1000,
                   help="requests after warmup (cruel) or measured phases (tp)")
    s.add_argument("--clones", type=int, default=1000)
    s.add_argument("--emit-trace", help="write the generated sequence as a trace file")
    s.set_defaults(func=cmd_adversary)

    s = sub.add_parser("gen", parents=[common], help="synthetic workloads")
    s.add_argument("--dist", choices=("uniform", "zipf"), default="uniform")
    s.add_argument("--types", type=int)
    s.add_argument("--items-per-type", type=int)
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--s", type=float, default=1.0, help="Zipf exponent")
    s.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    except (UsageError, TraceError, ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
