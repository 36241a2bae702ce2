"""Command line entry point: ``lowrank-bounds {run,verify,list-checkers,demo}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import harness
from .checkers import CHECKERS


def _print_summary(summary, stream=None):
    stream = stream or sys.stdout
    print(
        f"total={summary.total} passed={summary.passed} failed={len(summary.failed)} "
        f"skipped={len(summary.skipped)} max_violation={summary.max_violation:.3e}",
        file=stream,
    )
    for f in summary.failed[:20]:
        print(f"  FAILED {f['bound_id']} seed={f['seed']} {json.dumps(f['context'])}", file=stream)


def cmd_run(args):
    config = harness.SuiteConfig.load(args.config) if args.config else harness.SuiteConfig.default()
    summary = harness.run_suite(config, args.out, workers=args.workers)
    _print_summary(summary)
    if args.out:
        print(f"reports written to {args.out}")
    return 1 if summary.failed else 0


def cmd_verify(args):
    summary = harness.verify_report(args.report)
    _print_summary(summary)
    return 1 if summary.failed else 0


def cmd_list(args):
    for bound_id, fn in CHECKERS.items():
        doc = (fn.__doc__ or "").strip().splitlines()[0]
        print(f"{bound_id:10s} {harness.PERTURBATION_KIND[bound_id]:16s} {doc}")
    return 0


def cmd_demo(args):
    report, inputs = harness.demo(args.bound, seed=args.seed, m=args.m, n=args.n, k=args.k, p=args.p)
    np.set_printoptions(precision=6, suppress=True, linewidth=120)
    print(f"bound {args.bound}, m={args.m}, n={args.n}, k={args.k}, seed={args.seed}")
    for i, item in enumerate(inputs):
        if isinstance(item, np.ndarray):
            print(f"input[{i}] ({item.shape[0]}x{item.shape[1]}):\n{item}")
        elif hasattr(item, "basis"):
            print(f"input[{i}] projector of rank {item.rank}")
        else:
            print(f"input[{i}] = {item}")
    for key in ("lhs", "rhs_lower", "rhs_upper", "tolerance"):
        print(f"{key:10s} {getattr(report, key)!r}")
    print(f"{'slack':10s} {report.min_slack!r}")
    print("context:")
    print(json.dumps(report.context, indent=2, sort_keys=True))
    print(report)
    return 0 if report.holds else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="lowrank-bounds", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a verification suite")
    run.add_argument("--config", help="JSON suite config (default: built-in default suite)")
    run.add_argument("--out", help="output directory for report.csv, report.jsonl, skipped.csv, summary.json")
    run.add_argument("--workers", type=int, default=None, help=f"worker processes (env {harness.WORKERS_ENV} wins)")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="re-derive verdicts of a stored report")
    verify.add_argument("--report", required=True, help="report.csv or report.jsonl")
    verify.set_defaults(func=cmd_verify)

    lst = sub.add_parser("list-checkers", help="list bound ids")
    lst.set_defaults(func=cmd_list)

    demo = sub.add_parser("demo", help="print one worked instance")
    demo.add_argument("--bound", required=True, choices=sorted(CHECKERS))
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--m", type=int, default=8)
    demo.add_argument("--n", type=int, default=6)
    demo.add_argument("--k", type=int, default=2)
    demo.add_argument("--p", default=None, help="Schatten index (1, 2, 4, ..., inf)")
    demo.set_defaults(func=cmd_demo)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (harness.ConfigError, harness.SchemaError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
