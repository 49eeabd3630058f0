"""Per-critic audit reports, aggregates, flat plotting tables and re-validation."""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .definite import definite_notion
from .domain import DEFINITE, INDEFINITE, CriticFeedback, DomainError, GroupPartition, \
    LabelSpace, Notion
from .indefinite import OMR_MODES, bounded_notion
from .ingestion import summarize_dataset
from .oracle import build_joint, estimation_error, true_notion
from .rates import build_rate_table
from .simulator import RNG_ALGORITHM, ScenarioSpec, TrialSummary

REPORT_FORMAT = "disagree-audit/report/1"
SIMULATION_FORMAT = "disagree-audit/simulation/1"
TABLE_COLUMNS = ("critic_id", "notion", "true", "lower", "upper", "estimate", "error")
TOL = 1e-12

NOTES = (
    "Every notion is the max over labels and ordered group pairs (m != m'), which "
    "equals the largest absolute gap.",
    "Definite notions (SP, AE, CAL) report lower = upper = estimate = computed value.",
    "omr_bounds=paper uses omega/(phi+omega) as the OMR lower bound; that quantity "
    "bounds OMR from above, so true OMR can fall below it.",
)


class ReportFormatError(ValueError):
    pass


@dataclass(frozen=True)
class AuditConfig:
    sp_mode: str = "per-critic"
    smoothing_alpha: float = 0.0
    undefined_cells: str = "drop"
    omr_bounds: str = "paper"
    seed: Optional[int] = None
    ingestion: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sp_mode not in ("per-critic", "pooled"):
            raise DomainError(f"sp_mode must be per-critic or pooled, got {self.sp_mode!r}")
        if self.undefined_cells not in ("drop", "zero"):
            raise DomainError(f"undefined_cells must be drop or zero, got {self.undefined_cells!r}")
        if self.omr_bounds not in OMR_MODES:
            raise DomainError(f"omr_bounds must be one of {OMR_MODES}")
        if self.smoothing_alpha < 0:
            raise DomainError("smoothing alpha must be non-negative")

    def fingerprint(self) -> dict:
        return asdict(self)


@dataclass
class NotionEntry:
    notion: str
    true: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    estimate: Optional[float] = None
    error: Optional[float] = None
    excluded_cells: int = 0
    argmax: Optional[list] = None
    note: Optional[str] = None


@dataclass
class CriticReport:
    critic_id: str
    records: int
    undefined_rate_cells: int
    notions: list[NotionEntry]

    def entry(self, notion: Notion | str) -> NotionEntry:
        name = Notion(notion).value
        return next(e for e in self.notions if e.notion == name)

    def to_dict(self) -> dict:
        return {"critic_id": self.critic_id, "records": self.records,
                "undefined_rate_cells": self.undefined_rate_cells,
                "notions": [asdict(e) for e in self.notions]}


def critic_report(feedback: CriticFeedback, labels: LabelSpace, groups: GroupPartition,
                  config: AuditConfig = AuditConfig(),
                  pooled_sp: Optional[Sequence[Sequence[int]]] = None) -> CriticReport:
    records = feedback.records
    table = build_rate_table(records, labels, groups, config.smoothing_alpha)
    if config.sp_mode == "pooled":
        if pooled_sp is None:
            raise DomainError("pooled SP mode needs pooled SP tallies")
        table = table.with_sp_counts(pooled_sp)
    joint = None
    if all(r.intrinsic_label is not None for r in records):
        joint = build_joint(records, labels, groups)

    entries = []
    for kind in DEFINITE + INDEFINITE:
        entry = NotionEntry(kind.value)
        try:
            if kind in DEFINITE:
                value = definite_notion(table, kind)
                entry.lower = entry.upper = entry.estimate = value.value
                entry.excluded_cells = value.excluded_cells
                entry.argmax = [value.argmax_label, list(value.argmax_pair)]
            else:
                value = bounded_notion(table, kind, omr_bounds=config.omr_bounds)
                entry.lower, entry.upper = value.gf_lower, value.gf_upper
                entry.estimate = value.gf_estimate
                entry.excluded_cells = value.excluded_cells
                entry.argmax = [value.upper_argmax[0], list(value.upper_argmax[1])]
        except DomainError as exc:
            entry.note = f"estimate undefined: {exc}"
            entries.append(entry)
            continue
        if joint is not None:
            try:
                truth = true_notion(joint, kind, config.undefined_cells)
            except DomainError as exc:
                entry.note = f"true value undefined: {exc}"
            else:
                entry.true = truth.value
                entry.error = estimation_error(truth, value)
        entries.append(entry)
    return CriticReport(feedback.critic_id, len(records), table.undefined_cells(), entries)


def _aggregate(critics: Sequence[CriticReport]) -> dict:
    out = {}
    for kind in DEFINITE + INDEFINITE:
        errors = [e.error for c in critics for e in c.notions
                  if e.notion == kind.value and e.error is not None]
        estimates = [e.estimate for c in critics for e in c.notions
                     if e.notion == kind.value and e.estimate is not None]
        out[kind.value] = {
            "critics_with_error": len(errors),
            "mean_error": math.fsum(errors) / len(errors) if errors else None,
            "min_error": min(errors, default=None),
            "max_error": max(errors, default=None),
            "critics_with_estimate": len(estimates),
            "mean_estimate": math.fsum(estimates) / len(estimates) if estimates else None,
            "median_estimate": statistics.median(estimates) if estimates else None,
        }
    return out


def audit(feedbacks: Sequence[CriticFeedback], labels: LabelSpace, groups: GroupPartition,
          config: AuditConfig = AuditConfig(),
          pooled_sp: Optional[Sequence[Sequence[int]]] = None) -> dict:
    critics = [critic_report(f, labels, groups, config, pooled_sp)
               for f in sorted(feedbacks, key=lambda f: f.critic_id)]
    return {
        "format": REPORT_FORMAT,
        "version": __version__,
        "config": config.fingerprint(),
        "domain": {"labels": list(labels.names), "groups": list(groups.names),
                   "non_sensitive_group": groups.non_sensitive_index},
        "dataset": summarize_dataset(feedbacks).to_dict(),
        "notes": list(NOTES),
        "critics": [c.to_dict() for c in critics],
        "aggregate": _aggregate(critics),
    }


def flat_rows(report: dict) -> list[dict]:
    rows = []
    for critic in report["critics"]:
        for e in critic["notions"]:
            rows.append({"critic_id": critic["critic_id"], "notion": e["notion"],
                         **{k: e[k] for k in TABLE_COLUMNS[2:]}})
    return rows


def write_json(data: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def write_table(report: dict, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, TABLE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in flat_rows(report):
            writer.writerow({k: "" if v is None else repr(v) if isinstance(v, float) else v
                             for k, v in row.items()})


def read_report(path: str | Path) -> dict:
    try:
        report = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportFormatError(f"{path}: cannot read report ({exc})") from exc
    if not isinstance(report, dict) or report.get("format") != REPORT_FORMAT:
        raise ReportFormatError(f"{path}: not a {REPORT_FORMAT} document")
    return report


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= TOL


def validate_report(report: dict) -> list[str]:
    """Re-check every per-critic and aggregate invariant; returns the violations."""
    problems = []
    try:
        indefinite = {k.value for k in INDEFINITE}
        for critic in report["critics"]:
            cid = critic["critic_id"]
            for e in critic["notions"]:
                name, lo, up, est = e["notion"], e["lower"], e["upper"], e["estimate"]
                where = f"critic {cid} {name}"
                if est is not None:
                    if not lo <= est <= up:
                        problems.append(f"{where}: estimate {est} outside [{lo}, {up}]")
                    if name in indefinite and est != (lo + up) / 2:
                        problems.append(f"{where}: estimate {est} is not the midpoint")
                err = e["error"]
                if err is not None:
                    if err < 0:
                        problems.append(f"{where}: negative error {err}")
                    elif e["true"] is None or est is None or not _close(err, abs(e["true"] - est)):
                        problems.append(f"{where}: error {err} != |true - estimate|")
        for name, agg in report["aggregate"].items():
            errors = [e["error"] for c in report["critics"] for e in c["notions"]
                      if e["notion"] == name and e["error"] is not None]
            if agg["critics_with_error"] != len(errors):
                problems.append(f"aggregate {name}: critic count mismatch")
            elif errors and not _close(agg["mean_error"], math.fsum(errors) / len(errors)):
                problems.append(f"aggregate {name}: mean error {agg['mean_error']} does not "
                                f"match per-critic errors")
    except (KeyError, TypeError) as exc:
        raise ReportFormatError(f"malformed report: {exc!r}") from exc
    return problems


def _stats(values: Sequence[float]) -> dict:
    if not values:
        return {"n": 0, "mean": None, "min": None, "max": None}
    return {"n": len(values), "mean": math.fsum(values) / len(values),
            "min": min(values), "max": max(values)}


def simulation_report(spec: ScenarioSpec, summary: TrialSummary, cross_sample: bool,
                      omr_bounds: str) -> dict:
    notions = {}
    for kind in (Notion.AE, Notion.CAL) + INDEFINITE:
        trials = [r.notions[kind.value] for r in summary.results]
        notions[kind.value] = {
            "error": _stats([t.error for t in trials if t.error is not None]),
            "estimate": _stats([t.estimate for t in trials if t.estimate is not None]),
            "true": _stats([t.true for t in trials if t.true is not None]),
        }
    return {
        "format": SIMULATION_FORMAT,
        "version": __version__,
        "rng": RNG_ALGORITHM,
        "scenario": spec.to_dict(),
        "trials": summary.trials,
        "base_seed": summary.base_seed,
        "seeds": [r.seed for r in summary.results],
        "cross_sample": cross_sample,
        "omr_bounds": omr_bounds,
        "cells_checked": summary.cells_checked,
        "cell_violations": summary.cell_violations,
        "midpoint_violations": summary.midpoint_violations,
        "complement_max_dev": summary.complement_max_dev,
        "identity_max_dev": summary.identity_max_dev,
        "notions": notions,
    }
