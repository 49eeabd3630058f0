"""Command-line entry point: ``disagree-audit {audit,simulate,validate}``.

Exit codes: 0 success, 1 input error, 2 invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .domain import DomainError
from .indefinite import OMR_MODES
from .ingestion import (Schema, export_interchange, interchange_domain, join_responses,
                        load_interchange, load_profiles, load_responses, pooled_sp_counts)
from .report import (AuditConfig, ReportFormatError, audit, read_report, simulation_report,
                     validate_report, write_json, write_table)
from .simulator import containment_trial, load_scenario

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2

log = logging.getLogger("disagree_audit")


def _pooled_from_records(feedbacks, labels, groups):
    counts = [[0] * labels.size for _ in range(groups.count)]
    seen = set()
    for f in feedbacks:
        for r in f.records:
            key = r.record_id if r.record_id is not None else object()
            if key in seen:
                continue
            seen.add(key)
            counts[r.group][r.system_label] += 1
    return counts


def cmd_audit(args) -> int:
    config = AuditConfig(args.sp_mode, args.smoothing_alpha, args.undefined_cells,
                         args.omr_bounds, args.seed)
    if args.interchange:
        feedbacks = load_interchange(args.interchange)
        names = args.group_names.split(",") if args.group_names else None
        labels, groups = interchange_domain(feedbacks, args.num_labels, names)
        pooled = _pooled_from_records(feedbacks, labels, groups)
        config = replace(config, ingestion={"source": "interchange"})
    else:
        if not (args.profiles and args.responses and args.schema):
            raise DomainError("audit needs --profiles, --responses and --schema "
                              "(or --interchange)")
        schema = Schema.load(args.schema)
        if args.binarize_threshold is not None:
            schema = replace(schema, binarize_threshold=args.binarize_threshold)
        profiles = load_profiles(args.profiles, schema)
        feedbacks = join_responses(profiles, load_responses(args.responses, schema))
        labels, groups = schema.labels, schema.groups
        pooled = pooled_sp_counts(profiles, labels, groups)
        config = replace(config, ingestion=schema.fingerprint())
        log.info("system-label mapping: %s", schema.fingerprint())
    if args.export_interchange:
        export_interchange(feedbacks, args.export_interchange)
    report = audit(feedbacks, labels, groups, config, pooled)
    write_json(report, args.out)
    if args.table:
        write_table(report, args.table)
    for name, agg in report["aggregate"].items():
        if agg["mean_error"] is not None:
            print(f"{name:4s} mean error {agg['mean_error']:.4f} over "
                  f"{agg['critics_with_error']} critics")
    problems = validate_report(report)
    for p in problems:
        print(f"VIOLATION {p}", file=sys.stderr)
    return EXIT_VIOLATION if problems else EXIT_OK


def cmd_simulate(args) -> int:
    spec = load_scenario(args.scenario)
    summary = containment_trial(spec, args.trials, args.seed, args.cross_sample,
                                args.omr_bounds)
    report = simulation_report(spec, summary, args.cross_sample, args.omr_bounds)
    write_json(report, args.out)
    for name in summary.cell_violations:
        print(f"{name:4s} cells {summary.cells_checked[name]:6d}  out of bounds "
              f"{summary.cell_violations[name]:5d}  midpoint failures "
              f"{summary.midpoint_violations[name]:4d}")
    if args.cross_sample:
        return EXIT_OK
    bad = summary.violations or any(summary.midpoint_violations.values())
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_validate(args) -> int:
    problems = validate_report(read_report(args.report))
    for p in problems:
        print(f"FAIL {p}")
    print("PASS" if not problems else f"{len(problems)} violation(s)")
    return EXIT_VIOLATION if problems else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="disagree-audit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("audit", help="audit a classifier from critic feedback")
    a.add_argument("--profiles")
    a.add_argument("--responses")
    a.add_argument("--schema", help="JSON column/partition mapping")
    a.add_argument("--interchange", help="canonical per-record CSV instead of profiles+responses")
    a.add_argument("--num-labels", type=int)
    a.add_argument("--group-names", help="comma-separated, for --interchange")
    a.add_argument("--out", required=True, help="JSON report path")
    a.add_argument("--table", help="flat CSV for plotting")
    a.add_argument("--export-interchange")
    a.add_argument("--sp-mode", choices=("per-critic", "pooled"), default="per-critic")
    a.add_argument("--binarize-threshold", type=float)
    a.add_argument("--smoothing-alpha", type=float, default=0.0)
    a.add_argument("--undefined-cells", choices=("drop", "zero"), default="drop")
    a.add_argument("--omr-bounds", choices=OMR_MODES, default="paper")
    a.add_argument("--seed", type=int, help="recorded only; the audit path is deterministic")
    a.set_defaults(func=cmd_audit)

    s = sub.add_parser("simulate", help="containment and error trials on a synthetic scenario")
    s.add_argument("scenario")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, help="base seed (default: the scenario's)")
    s.add_argument("--cross-sample", action="store_true")
    s.add_argument("--omr-bounds", choices=OMR_MODES, default="paper")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("validate", help="re-check an audit report's invariants")
    v.add_argument("report")
    v.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (DomainError, ReportFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
