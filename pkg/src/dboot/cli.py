"""Command line entry point: ``dboot <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys

from . import kernels
from .baselines import oracle_width
from .harness import ExperimentConfig, ExperimentReport, emit_report, run_bench, run_comparison, run_coverage_experiment
from .theory import tau_min


def _configs(args) -> list[ExperimentConfig]:
    configs = ExperimentConfig.load(args.config) if args.config else [ExperimentConfig()]
    overrides = {}
    if args.seed is not None:
        overrides["root_seed"] = args.seed
    if args.norm is not None:
        overrides["norm"] = args.norm
    return [c.replace(**overrides) for c in configs] if overrides else configs


def _experiment(runner):
    def run(args):
        report = ExperimentReport()
        for cfg in _configs(args):
            report = report.extend(runner(cfg, args.threads))
        text = emit_report(report, args.format, args.out)
        if args.out is None:
            sys.stdout.write(text)
    return run


def _bench(args):
    report = ExperimentReport()
    for cfg in _configs(args):
        report = report.extend(run_bench(cfg))
    text = emit_report(report, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)


def _oracle(args):
    out = []
    for cfg in _configs(args):
        w = oracle_width(cfg.design(), cfg.N, cfg.oracle_reps, cfg.alpha, cfg.seed.child("oracle", cfg.d),
                         cfg.norm_functional, cfg.solver)
        out.append({"d": cfg.d, "N": cfg.N, "model": cfg.model, "norm": cfg.norm, "oracle_width": w})
    text = json.dumps(out if len(out) > 1 else out[0], indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _tau(args):
    plan = tau_min(args.family, args.method, args.gamma_n, args.gamma_k)
    sys.stdout.write(json.dumps(plan.as_dict(), indent=2) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dboot", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s (kernels: {kernels.BACKEND})")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig fields")
    common.add_argument("--seed", type=int, help="root seed (unsigned 64-bit)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--norm", help="sup | coord:<l> | l2")

    sub.add_parser("coverage", parents=[common], help="coverage/width study").set_defaults(
        func=_experiment(run_coverage_experiment))
    sub.add_parser("compare", parents=[common], help="k-grad, n+k-1-grad, BLB, SDB widths").set_defaults(
        func=_experiment(run_comparison))
    sub.add_parser("bench", parents=[common], help="mean wall time per method and k").set_defaults(func=_bench)
    sub.add_parser("oracle-width", parents=[common], help="oracle width for the configured design").set_defaults(
        func=_oracle)

    t = sub.add_parser("tau-min", help="sufficient number of CSL rounds")
    t.add_argument("--family", choices=("linear", "glm"), required=True)
    t.add_argument("--method", choices=("kgrad", "nk1grad"), required=True)
    t.add_argument("--gamma-n", type=float, required=True)
    t.add_argument("--gamma-k", type=float, required=True)
    t.set_defaults(func=_tau)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    try:
        args.func(args)
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"dboot: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
