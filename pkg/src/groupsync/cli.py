"""Command line entry point: ``groupsync {simulate,sweep,bounds,verify}``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from . import bounds, checks
from .errors import DomainError, GroupSyncError
from .estimators import ESTIMATOR_NAMES
from .graphs import parse_graph_spec
from .groups import parse_group_spec
from .harness import load_config, run_problem_trial, run_sweep, sample_trial
from .model import SyncProblem, dumps_trial_record, trial_record

EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG = 0, 1, 2


def _cmd_simulate(args) -> int:
    problem = SyncProblem(parse_graph_spec(args.graph), parse_group_spec(args.group), args.p)
    result = run_problem_trial(problem, args.estimator, args.seed, detect_offset=args.detect_offset)
    print(result.to_json())
    if args.record:
        x, y = sample_trial(problem, args.seed)
        Path(args.record).write_text(dumps_trial_record(trial_record(args.seed, problem, x, y)) + "\n")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    result = run_sweep(cfg, workers=args.workers)
    sys.stdout.write(result.to_csv())
    return EXIT_OK


def _optional(fn, *a):
    try:
        return fn(*a)
    except DomainError:
        return None


def _cmd_bounds(args) -> int:
    k, p, n = args.group_order, args.p, args.n
    f = bounds.two_hop_correct_prob(p, k)
    h = bounds.two_hop_wrong_prob(p, k)
    failure = _optional(bounds.recovery_failure_bound, n, p, k)
    offset = None
    if args.d is not None and args.set_size is not None:
        offset = _optional(bounds.offset_exists_lower_bound, p, args.d, k, args.set_size)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["group_order", "p", "n", "f", "h", "p_c", "failure_bound", "offset_bound"])
    row = [k, p, n, f, h, bounds.critical_flip_prob(k), failure, offset]
    w.writerow(["" if v is None else (f"{v:.12g}" if isinstance(v, float) else v) for v in row])
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _cmd_verify(args) -> int:
    ok = True
    for res in checks.run_all():
        status = "PASS" if res.passed else "FAIL"
        print(f"{status}  {res.name}" + (f"  ({res.detail})" if res.detail else ""))
        ok &= res.passed
    return EXIT_OK if ok else EXIT_PROPERTY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groupsync", description="Finite-group synchronization experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one seeded trial and print it as JSON")
    s.add_argument("--graph", required=True, help="complete:N | lattice:SIDE,DIM | path:N | cycle:N | star:N | file:PATH")
    s.add_argument("--group", required=True, help="cyclic:K | sym:K | prod:SPEC,SPEC")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--estimator", choices=ESTIMATOR_NAMES, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--detect-offset", action="store_true", help="also scan a greedy independent set for an offset vertex")
    s.add_argument("--record", help="write the sampled labels and observations to this JSON file")
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("sweep", help="run a configured sweep and print the CSV summary")
    s.add_argument("--config", required=True)
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=_cmd_sweep)

    s = sub.add_parser("bounds", help="print closed-form probabilities and bounds as CSV")
    s.add_argument("--group-order", type=int, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int)
    s.add_argument("--set-size", type=int)
    s.set_defaults(func=_cmd_bounds)

    s = sub.add_parser("verify", help="run the property suite")
    s.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (GroupSyncError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
