"""Command line entry point: ``histq stress|replay|check-predicate``.

Exit codes: 0 all checks pass, 1 violations found, 2 usage or config
error, 3 watchdog timeout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .compat import explain_compatible, failure_evidence
from .harness import (StressConfig, TraceFormatError, read_trace, replay_check,
                      stress_run, watchdog_from_env, write_report, write_trace)
from .history import ConfigError, HistoryError, OrderPolicy, nodes_from_records
from .queues import MUTANTS

EXIT_PASS, EXIT_VIOLATIONS, EXIT_USAGE, EXIT_WATCHDOG = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _exit_for(report) -> int:
    if report.watchdog_fired:
        return EXIT_WATCHDOG
    return EXIT_PASS if report.passed else EXIT_VIOLATIONS


def _summary(report) -> str:
    verdict = "PASS" if report.passed else "FAIL"
    kinds = ", ".join(f"{k}={v}" for k, v in sorted(report.violation_counts.items()))
    return (f"{verdict}: {report.events} events, {report.snapshots_checked} checks"
            + (f"; violations: {kinds}" if kinds else ""))


def cmd_stress(args) -> int:
    cfg = StressConfig(
        producers=args.producers, consumers=args.consumers, ops_per_thread=args.ops,
        queue_kind=args.queue, capacity=args.capacity, seed=args.seed,
        snapshot_interval_ops=args.snapshot_every, mutant_id=args.mutant,
        watchdog_secs=watchdog_from_env())
    if cfg.queue_kind == "fifo" and cfg.capacity is None:
        cfg.capacity = 8
    cfg.validate()
    report, trace = stress_run(cfg)
    if args.trace_out:
        write_trace(args.trace_out, trace)
    if args.report_out:
        write_report(args.report_out, report)
    print(_summary(report))
    return _exit_for(report)


def cmd_replay(args) -> int:
    cap = args.capacity
    try:
        trace = read_trace(args.trace)
    except OSError as exc:
        raise ConfigError(f"cannot read trace: {exc}") from None
    report = replay_check(trace, queue_kind=args.queue, capacity=cap)
    if args.report_out:
        write_report(args.report_out, report)
    print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    return _exit_for(report)


def evaluate_predicate_document(doc: dict) -> dict:
    """Evaluate ``{policy, queue, history}`` and explain the verdict."""
    if not isinstance(doc, dict):
        raise ConfigError("predicate input must be a JSON object")
    try:
        policy = OrderPolicy.parse(doc.get("policy", "fifo"))
        queue = [int(u) for u in doc.get("queue", [])]
        records = doc.get("history", [])
        if not isinstance(records, list):
            raise ConfigError("history must be a list")
        nodes = nodes_from_records(records)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad predicate input: {exc}") from None
    if len(set(queue)) != len(queue):
        raise ConfigError("queue uids must be distinct")
    ok, info = explain_compatible(queue, nodes, policy)
    if ok:
        detail = {"witness": info["witness"]}
    else:
        detail = {"counterexample": failure_evidence(queue, nodes, info)}
    return {"compatible": ok, "witness_or_counterexample": detail}


def cmd_check_predicate(args) -> int:
    try:
        with open(args.input) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read input: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    out = evaluate_predicate_document(doc)
    print(json.dumps(out, sort_keys=True))
    return EXIT_PASS if out["compatible"] else EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="histq", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stress", help="run a multi-threaded stress campaign")
    s.add_argument("--queue", choices=["fifo", "priority", "bag"], default="fifo")
    s.add_argument("--capacity", type=int, default=None,
                   help="fifo only; defaults to 8")
    s.add_argument("--producers", type=int, default=4)
    s.add_argument("--consumers", type=int, default=4)
    s.add_argument("--ops", type=int, default=1000, help="operations per thread")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--snapshot-every", type=int, default=50,
                   help="sample a snapshot every N completed ops; 0 disables")
    s.add_argument("--mutant", choices=sorted(MUTANTS), default=None)
    s.add_argument("--trace-out")
    s.add_argument("--report-out")
    s.set_defaults(func=cmd_stress)

    r = sub.add_parser("replay", help="re-check a recorded JSON-lines trace")
    r.add_argument("--trace", required=True)
    r.add_argument("--queue", choices=["fifo", "priority", "bag"], required=True)
    r.add_argument("--capacity", type=int, default=None,
                   help="fifo capacity; omit to skip capacity checks")
    r.add_argument("--report-out")
    r.set_defaults(func=cmd_replay)

    c = sub.add_parser("check-predicate", help="evaluate compatible(queue, history)")
    c.add_argument("--input", required=True)
    c.set_defaults(func=cmd_check_predicate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TraceFormatError, HistoryError) as exc:
        print(f"histq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
