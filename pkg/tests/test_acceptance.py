"""Exit criteria for the primary component, one test per criterion.

Each test logs one PASS/FAIL line (shown in the pytest terminal summary).
Criterion 4 needs the 400-critic COMPAS crowd-judgment data: point
``DISAGREE_AUDIT_COMPAS`` at a directory holding ``profiles.csv``,
``responses.csv`` and ``schema.json``; without it the criterion is skipped.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from disagree_audit.definite import accuracy_equality, calibration, statistical_parity
from disagree_audit.domain import (AuditRecord, CriticFeedback, DomainError, GroupPartition,
                                   LabelSpace, Notion)
from disagree_audit.ingestion import Schema, join_responses, load_profiles, load_responses
from disagree_audit.oracle import build_joint, true_notion
from disagree_audit.rates import build_rate_table, rate_at
from disagree_audit.report import AuditConfig, audit, validate_report
from disagree_audit.simulator import random_scenario, run_trial

from conftest import random_dataset, records_from_pairs

IDENTITY_TOL = 1e-12
FIXTURES = Path(__file__).parent / "fixtures"


def log_line(log, n, ok, detail):
    log(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")


@pytest.fixture(scope="module")
def campaign():
    """1000 same-sample trials on random 2-group specs, K in 2..10."""
    rng = np.random.default_rng(20240901)
    start = time.perf_counter()
    results = []
    for i in range(1000):
        spec = random_scenario(rng, int(rng.integers(2, 11)), 2, int(rng.integers(20, 201)),
                               seed=i)
        results.append(run_trial(spec, seed=10_000 + i))
    return results, time.perf_counter() - start


def test_criterion_1_definite_identities(acceptance_log):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst, compared = 0.0, 0
    for _ in range(500):
        K, M = int(rng.integers(2, 7)), int(rng.integers(2, 5))
        labels, groups, records = random_dataset(rng, K, M, (20, 201))
        table = build_rate_table(records, labels, groups)
        joint = build_joint(records, labels, groups)
        for kind, fn in ((Notion.AE, accuracy_equality), (Notion.CAL, calibration)):
            try:
                estimate = fn(table).value
            except DomainError:
                continue
            worst = max(worst, abs(estimate - true_notion(joint, kind).value))
            compared += 1
    elapsed = time.perf_counter() - start
    ok = worst <= IDENTITY_TOL and compared >= 500
    log_line(acceptance_log, 1, ok, f"AE/CAL table vs oracle on 500 datasets, {compared} "
             f"comparisons, max |diff| = {worst:.2e} (tol {IDENTITY_TOL}), {elapsed:.1f}s")
    assert ok


def test_criterion_2_containment(campaign, acceptance_log):
    results, elapsed = campaign
    checked = {k: sum(r.cells_checked[k] for r in results) for k in ("EO", "PE", "OMR")}
    bad = {k: sum(r.cell_violations[k] for r in results) for k in ("EO", "PE", "OMR")}
    complement = max(r.complement_max_dev for r in results)
    ok = sum(bad.values()) == 0 and complement <= IDENTITY_TOL and elapsed < 60
    per_notion = ", ".join(f"{k} {bad[k]}/{checked[k]}" for k in bad)
    log_line(acceptance_log, 2, ok, f"{len(results)} trials, cells outside [lower, 1]: "
             f"{per_notion}; EO+OMR max |dev| {complement:.1e}; {elapsed:.1f}s")
    assert complement <= IDENTITY_TOL
    assert elapsed < 60
    assert bad == {"EO": 0, "PE": 0, "OMR": 0}, (
        "OMR cells fall below omega/(phi+omega); that quantity is 1 - (EO lower bound), "
        "an upper bound on OMR = 1 - EO")


def test_criterion_3_midpoint(campaign, acceptance_log):
    results, _ = campaign
    exact_failures, error_failures, counted = 0, {}, 0
    for r in results:
        for name, t in r.notions.items():
            if name not in ("EO", "PE", "OMR") or t.estimate is None:
                continue
            counted += 1
            if not (t.lower <= t.estimate <= t.upper and t.estimate == (t.lower + t.upper) / 2):
                exact_failures += 1
            if t.true is not None and t.error > (t.upper - t.lower) / 2 + IDENTITY_TOL:
                error_failures[name] = error_failures.get(name, 0) + 1
    ok = exact_failures == 0 and not error_failures
    log_line(acceptance_log, 3, ok, f"{counted} bounded estimates, midpoint/ordering failures "
             f"{exact_failures}, |est - true| > half-width: {error_failures or 0}")
    assert exact_failures == 0
    assert not error_failures, f"true GF outside its bounds: {error_failures}"


def test_criterion_3_corrected_omr_reference(acceptance_log):
    """Not a criterion: the same checks with the valid OMR bracket, for reference."""
    rng = np.random.default_rng(20240901)
    bad = mid = 0
    for i in range(1000):
        spec = random_scenario(rng, int(rng.integers(2, 11)), 2, int(rng.integers(20, 201)),
                               seed=i)
        r = run_trial(spec, 10_000 + i, omr_bounds="corrected")
        bad += r.violations
        mid += sum(r.midpoint_violations.values())
    acceptance_log(f"[info] omr_bounds=corrected on the same 1000 trials: "
                   f"{bad} containment failures, {mid} midpoint failures")
    assert bad == mid == 0


def _compas_dir():
    path = os.environ.get("DISAGREE_AUDIT_COMPAS")
    return Path(path) if path else None


def test_criterion_4_compas_reproduction(acceptance_log):
    root = _compas_dir()
    if root is None or not (root / "profiles.csv").exists():
        acceptance_log("[SKIP] criterion 4: COMPAS crowd-judgment data not available "
                       "(set DISAGREE_AUDIT_COMPAS)")
        pytest.skip("COMPAS crowd-judgment dataset not available")
    start = time.perf_counter()
    schema = Schema.load(root / "schema.json")
    profiles = load_profiles(root / "profiles.csv", schema)
    feedbacks = join_responses(profiles, load_responses(root / "responses.csv", schema))
    report = audit(feedbacks, schema.labels, schema.groups, AuditConfig())
    agg = report["aggregate"]
    targets = {"EO": 0.12, "PE": 0.17, "OMR": 0.15}
    means = {k: agg[k]["mean_error"] for k in targets}
    median_omr = agg["OMR"]["median_estimate"]
    elapsed = time.perf_counter() - start
    ok = (len(report["critics"]) == 400
          and all(m is not None and abs(m - targets[k]) <= 0.05 for k, m in means.items())
          and median_omr is not None and 0.1 <= median_omr <= 0.3 and elapsed < 60)
    log_line(acceptance_log, 4, ok, f"{len(report['critics'])} critics, mean errors {means}, "
             f"median OMR estimate {median_omr}, {elapsed:.1f}s")
    assert ok


def test_criterion_5_degenerate_inputs(acceptance_log):
    labels, groups = LabelSpace(3), GroupPartition(("A", "B", "C"))
    cases = {
        "empty-group": records_from_pairs([(0, 0, 0), (0, 1, 2), (1, 1, 1), (1, 2, 2)]),
        "single-label": records_from_pairs([(0, 2, 2), (0, 2, 1), (1, 2, 2), (2, 2, 0)]),
        "all-agree": records_from_pairs([(m, k, k) for m in range(3) for k in (0, 1, 2, 2)]),
        "all-disagree": records_from_pairs([(m, k, (k + 1) % 3) for m in range(3)
                                            for k in (0, 1, 1, 2)]),
        "one-group-only": records_from_pairs([(2, 0, 0), (2, 1, 0)]),
        "no-intrinsic": [AuditRecord(0, 0, 1), AuditRecord(1, 1, 0)],
    }
    feedbacks = [CriticFeedback(name, recs) for name, recs in cases.items()]
    report = audit(feedbacks, labels, groups)
    by_id = {c["critic_id"]: c for c in report["critics"]}
    checks = {}

    empty = build_rate_table(cases["empty-group"], labels, groups)
    checks["empty group rates undefined"] = (rate_at(empty, "DR_group", 2) is None
                                             and rate_at(empty, "SP", 2, 0) is None)
    checks["empty group notions defined"] = all(
        e["estimate"] is not None for e in by_id["empty-group"]["notions"])
    checks["single-label cells reported"] = by_id["single-label"]["undefined_rate_cells"] == 6
    agree = {e["notion"]: e for e in by_id["all-agree"]["notions"]}
    checks["all-agree definite zero"] = all(agree[k]["estimate"] == 0 for k in ("SP", "AE", "CAL"))
    disagree = {e["notion"]: e for e in by_id["all-disagree"]["notions"]}
    checks["all-disagree AE/CAL zero"] = disagree["AE"]["estimate"] == disagree["CAL"]["estimate"] == 0
    checks["one group -> undefined notes"] = all(
        e["estimate"] is None and e["note"] for e in by_id["one-group-only"]["notions"])
    checks["no intrinsic -> no truth"] = all(
        e["true"] is None for e in by_id["no-intrinsic"]["notions"])
    checks["report validates"] = validate_report(report) == []

    schema = Schema.load(FIXTURES / "mini_compas" / "schema.json")
    profiles = load_profiles(FIXTURES / "mini_compas" / "profiles.csv", schema)
    mini = join_responses(profiles, load_responses(FIXTURES / "mini_compas" / "responses.csv",
                                                   schema))
    by_subset = {}
    for f in mini:
        key = frozenset(r.record_id for r in f.records)
        sp = statistical_parity(build_rate_table(f.records, schema.labels, schema.groups))
        by_subset.setdefault(key, set()).add((sp.value.hex(), sp.argmax_label, sp.argmax_pair))
    checks["SP bit-identical per subset"] = all(len(v) == 1 for v in by_subset.values())

    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    log_line(acceptance_log, 5, ok, f"{len(checks)} degenerate-input checks"
             + (f", failed: {failed}" if failed else ""))
    assert ok, failed
