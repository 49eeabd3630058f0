"""Synthetic populations drawn from known per-group joints P(y, z | m).

Sampling uses numpy's ``default_rng`` (PCG64).  Streams are reproducible for
a given seed and numpy version; trial ``i`` of a campaign uses seed
``base_seed + i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from .definite import accuracy_equality, calibration
from .domain import (INDEFINITE, AuditRecord, DomainError, GroupPartition, LabelSpace,
                     Notion)
from .indefinite import bounded_notion, cell_bounds
from .oracle import JointTable, build_joint, true_notion
from .rates import RateTable, build_rate_table

RNG_ALGORITHM = "numpy.random.default_rng/PCG64"
SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class ScenarioSpec:
    K: int
    M: int
    joints: tuple  # joints[m] is a K x K nested tuple, rows = system label
    N: int
    seed: int = 0
    group_names: tuple[str, ...] = ()

    def __post_init__(self):
        joints = np.asarray(self.joints, dtype=float)
        if joints.shape != (self.M, self.K, self.K):
            raise DomainError(f"joint shape {joints.shape} != ({self.M}, {self.K}, {self.K})")
        if (joints < 0).any():
            raise DomainError("joint entries must be non-negative")
        sums = joints.sum(axis=(1, 2))
        bad = np.flatnonzero(np.abs(sums - 1) > SIMPLEX_TOL)
        if bad.size:
            raise DomainError(f"joint of group {bad[0]} sums to {sums[bad[0]]}, not 1")
        if self.N < 1:
            raise DomainError("N must be positive")
        object.__setattr__(self, "joints",
                           tuple(tuple(tuple(row) for row in g) for g in joints.tolist()))
        if not self.group_names:
            object.__setattr__(self, "group_names", tuple(f"g{m}" for m in range(self.M)))

    @property
    def labels(self) -> LabelSpace:
        return LabelSpace(self.K)

    @property
    def groups(self) -> GroupPartition:
        return GroupPartition(self.group_names)

    def to_dict(self) -> dict:
        return {"K": self.K, "M": self.M, "N": self.N, "seed": self.seed,
                "groups": list(self.group_names),
                "joint": [[p for row in g for p in row] for g in self.joints]}

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        for key in ("K", "M", "N", "joint"):
            if key not in data:
                raise DomainError(f"scenario is missing key {key!r}")
        K, M = int(data["K"]), int(data["M"])
        flat = data["joint"]
        if len(flat) != M or any(len(g) != K * K for g in flat):
            raise DomainError(f"'joint' must hold {M} row-major lists of {K * K} entries")
        joints = [[g[r * K:(r + 1) * K] for r in range(K)] for g in flat]
        return cls(K, M, joints, int(data["N"]), int(data.get("seed", 0)),
                   tuple(data.get("groups", ())))


def load_scenario(path: str | Path) -> ScenarioSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: not valid JSON ({exc})") from exc
    try:
        return ScenarioSpec.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{path}: {exc}") from exc


def dump_scenario(spec: ScenarioSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n")


def sample_population(spec: ScenarioSpec, seed: Optional[int] = None) -> list[AuditRecord]:
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    K = spec.K
    records = []
    for m, joint in enumerate(spec.joints):
        p = np.asarray(joint, dtype=float).ravel()
        draws = rng.choice(K * K, size=spec.N, p=p / p.sum())
        for i, cell in enumerate(draws.tolist()):
            y, z = divmod(cell, K)
            records.append(AuditRecord(m, y, int(y != z), z, f"{m}-{i}"))
    return records


def _mass(p: float) -> Fraction:
    return Fraction(repr(p))


def population_rates(spec: ScenarioSpec) -> tuple[RateTable, JointTable]:
    """Analytic rate table and joint table with probability masses as tallies."""
    K = spec.K
    masses = [[[_mass(p) for p in row] for row in g] for g in spec.joints]
    counts = [[sum(g[k]) for k in range(K)] for g in masses]
    disagree = [[sum(g[k][z] for z in range(K) if z != k) for k in range(K)] for g in masses]
    return (RateTable(spec.labels, spec.groups, counts, disagree),
            JointTable(spec.labels, spec.groups, masses))


def random_scenario(rng: np.random.Generator, K: int, M: int, N: int, seed: int = 0,
                    concentration: float = 0.5) -> ScenarioSpec:
    joints = rng.dirichlet([concentration] * (K * K), size=M)
    return ScenarioSpec(K, M, joints.reshape(M, K, K), N, seed)


@dataclass
class NotionTrial:
    true: Optional[float]
    lower: Optional[float]
    upper: Optional[float]
    estimate: Optional[float]

    @property
    def error(self) -> Optional[float]:
        if self.true is None or self.estimate is None:
            return None
        return abs(self.true - self.estimate)


@dataclass
class TrialResult:
    seed: int
    cells_checked: dict = field(default_factory=dict)
    cell_violations: dict = field(default_factory=dict)
    midpoint_violations: dict = field(default_factory=dict)
    complement_max_dev: float = 0.0
    identity_max_dev: float = 0.0
    notions: dict = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return sum(self.cell_violations.values())


def _cell_violations(table: RateTable, joint: JointTable, omr_bounds: str):
    """Cells checked and cells outside their bounds, keyed by notion name."""
    checked, violations = {}, {}
    for kind, oracle in ((Notion.EO, joint.eo_cell), (Notion.PE, joint.pe_cell),
                         (Notion.OMR, joint.omr_cell)):
        bounds = cell_bounds(table, kind, omr_bounds=omr_bounds)
        n = bad = 0
        for m in range(table.groups.count):
            for k in range(table.labels.size):
                truth = oracle(m, k)
                if truth is None:
                    continue
                n += 1
                lo, up = bounds.lower[m][k], bounds.upper[m][k]
                if lo is None or not lo <= truth <= up:
                    bad += 1
        checked[kind.value], violations[kind.value] = n, bad
    return checked, violations


def _complement_dev(table: RateTable, joint: JointTable) -> float:
    dev = 0.0
    eo, omr = cell_bounds(table, Notion.EO).lower, cell_bounds(table, Notion.OMR).lower
    for m in range(table.groups.count):
        for k in range(table.labels.size):
            if eo[m][k] is not None:
                dev = max(dev, abs(float(eo[m][k]) + float(omr[m][k]) - 1))
            t_eo, t_omr = joint.eo_cell(m, k), joint.omr_cell(m, k)
            if t_eo is not None:
                dev = max(dev, abs(float(t_eo) + float(t_omr) - 1))
    return dev


def run_trial(spec: ScenarioSpec, seed: int, cross_sample: bool = False,
              omr_bounds: str = "paper", tol: float = 1e-12) -> TrialResult:
    """Sample once, estimate from disagreements, and score against the oracle.

    With ``cross_sample`` the oracle reads an independent second sample, so
    containment is no longer guaranteed.
    """
    records = sample_population(spec, seed)
    labels, groups = spec.labels, spec.groups
    table = build_rate_table(records, labels, groups, check=False)
    truth_records = sample_population(spec, seed + 1_000_003) if cross_sample else records
    joint = build_joint(truth_records, labels, groups)
    result = TrialResult(seed)
    result.cells_checked, result.cell_violations = _cell_violations(table, joint, omr_bounds)
    result.complement_max_dev = _complement_dev(table, joint)
    for kind, fn in ((Notion.AE, accuracy_equality), (Notion.CAL, calibration)):
        try:
            value = fn(table).value
        except DomainError:
            result.notions[kind.value] = NotionTrial(None, None, None, None)
            continue
        try:
            true = true_notion(joint, kind).value
        except DomainError:
            true = None
        result.notions[kind.value] = NotionTrial(true, value, value, value)
        if true is not None and not cross_sample:
            result.identity_max_dev = max(result.identity_max_dev, abs(value - true))
    for kind in INDEFINITE:
        result.midpoint_violations[kind.value] = 0
        try:
            bn = bounded_notion(table, kind, omr_bounds=omr_bounds)
        except DomainError:
            result.notions[kind.value] = NotionTrial(None, None, None, None)
            continue
        try:
            true = true_notion(joint, kind).value
        except DomainError:
            true = None
        trial = NotionTrial(true, bn.gf_lower, bn.gf_upper, bn.gf_estimate)
        ok = bn.gf_lower <= bn.gf_estimate <= bn.gf_upper
        if true is not None:
            ok = ok and trial.error <= bn.half_width + tol
        result.midpoint_violations[kind.value] = int(not ok)
        result.notions[kind.value] = trial
    return result


def _sum_by_notion(dicts) -> dict:
    out = {kind.value: 0 for kind in INDEFINITE}
    for d in dicts:
        for key, value in d.items():
            out[key] += value
    return out


@dataclass
class TrialSummary:
    trials: int
    base_seed: int
    cells_checked: dict
    cell_violations: dict
    midpoint_violations: dict
    complement_max_dev: float
    identity_max_dev: float
    results: list[TrialResult]

    @property
    def violations(self) -> int:
        return sum(self.cell_violations.values())


def containment_trial(spec: ScenarioSpec, trials: int, base_seed: Optional[int] = None,
                      cross_sample: bool = False, omr_bounds: str = "paper") -> TrialSummary:
    """Run ``trials`` seeded populations; ``.violations`` counts out-of-bound cells."""
    base = spec.seed if base_seed is None else base_seed
    results = [run_trial(spec, base + i, cross_sample, omr_bounds) for i in range(trials)]
    return TrialSummary(
        trials, base,
        _sum_by_notion(r.cells_checked for r in results),
        _sum_by_notion(r.cell_violations for r in results),
        _sum_by_notion(r.midpoint_violations for r in results),
        max((r.complement_max_dev for r in results), default=0.0),
        max((r.identity_max_dev for r in results), default=0.0),
        results)
