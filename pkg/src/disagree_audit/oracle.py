"""Ground-truth fairness notions from full (system label, intrinsic label) pairs.

Nothing here reads the disagreement bit: every quantity is recomputed from
the joint tallies so it can serve as an independent check on the
disagreement-based path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .definite import NotionValue, max_pairwise_gap
from .domain import AuditRecord, DomainError, GroupPartition, LabelSpace, Notion
from .indefinite import BoundedNotion
from .rates import Tally

Cell = Optional[Fraction]


def _ratio(num: Tally, den: Tally) -> Cell:
    return None if den == 0 else Fraction(num) / den


@dataclass(frozen=True)
class JointTable:
    labels: LabelSpace
    groups: GroupPartition
    counts: tuple  # counts[m][y][z]

    def __post_init__(self):
        object.__setattr__(self, "counts",
                           tuple(tuple(tuple(row) for row in g) for g in self.counts))
        K = self.labels.size
        if len(self.counts) != self.groups.count or any(
                len(g) != K or any(len(row) != K for row in g) for g in self.counts):
            raise DomainError(f"joint tallies must be {self.groups.count}x{K}x{K}")

    def group_total(self, m: int) -> Tally:
        return sum(sum(row) for row in self.counts[m])

    def system_marginal(self, m: int, y: int) -> Tally:
        return sum(self.counts[m][y])

    def intrinsic_marginal(self, m: int, z: int) -> Tally:
        return sum(row[z] for row in self.counts[m])

    def nonempty_groups(self) -> list[int]:
        return [m for m in range(self.groups.count) if self.group_total(m) != 0]

    # -- per-cell rates -----------------------------------------------------

    def sp_cell(self, m: int, k: int) -> Cell:
        return _ratio(self.system_marginal(m, k), self.group_total(m))

    def ae_group(self, m: int) -> Cell:
        """P(y = z | m)."""
        return _ratio(sum(self.counts[m][k][k] for k in range(self.labels.size)),
                      self.group_total(m))

    def cal_cell(self, m: int, k: int) -> Cell:
        """P(z = k | y = k, m)."""
        return _ratio(self.counts[m][k][k], self.system_marginal(m, k))

    def eo_cell(self, m: int, k: int) -> Cell:
        """P(y = k | z = k, m)."""
        return _ratio(self.counts[m][k][k], self.intrinsic_marginal(m, k))

    def pe_cell(self, m: int, k: int) -> Cell:
        """P(y = k | z != k, m)."""
        K = self.labels.size
        num = sum(self.counts[m][k][z] for z in range(K) if z != k)
        den = sum(self.counts[m][y][z] for y in range(K) for z in range(K) if z != k)
        return _ratio(num, den)

    def omr_cell(self, m: int, k: int) -> Cell:
        """P(y != k | z = k, m)."""
        num = sum(self.counts[m][y][k] for y in range(self.labels.size) if y != k)
        return _ratio(num, self.intrinsic_marginal(m, k))

    def cells(self, kind: Notion) -> list[list[Cell]]:
        kind = Notion(kind)
        if kind is Notion.AE:
            return [[self.ae_group(m)] for m in range(self.groups.count)]
        rate = {Notion.SP: self.sp_cell, Notion.CAL: self.cal_cell, Notion.EO: self.eo_cell,
                Notion.PE: self.pe_cell, Notion.OMR: self.omr_cell}[kind]
        return [[rate(m, k) for k in range(self.labels.size)]
                for m in range(self.groups.count)]


def build_joint(records: Sequence[AuditRecord], labels: LabelSpace,
                groups: GroupPartition) -> JointTable:
    K = labels.size
    counts = [[[0] * K for _ in range(K)] for _ in range(groups.count)]
    for i, r in enumerate(records):
        if r.intrinsic_label is None:
            raise DomainError(f"record {i} has no intrinsic label")
        counts[r.group][r.system_label][r.intrinsic_label] += 1
    return JointTable(labels, groups, counts)


def true_notion(joint: JointTable, kind: Notion, undefined: str = "drop") -> NotionValue:
    """Max gap of the notion's per-cell rates over labels and ordered group pairs.

    ``undefined="drop"`` skips cells with an empty conditioning event;
    ``"zero"`` counts them as rate 0 (empty groups are always skipped).
    """
    kind = Notion(kind)
    if undefined not in ("drop", "zero"):
        raise DomainError(f"undefined-cell mode must be drop or zero, got {undefined!r}")
    if len(joint.nonempty_groups()) < 2:
        raise DomainError(f"{kind.value} needs at least two non-empty groups")
    cells = joint.cells(kind)
    excluded = 0
    for m in joint.nonempty_groups():
        for k, value in enumerate(cells[m]):
            if value is None:
                excluded += 1
                if undefined == "zero":
                    cells[m][k] = Fraction(0)
    found = max_pairwise_gap(cells)
    if found is None:
        raise DomainError(f"{kind.value}: no label is defined in two or more groups")
    gap, k, pair = found
    label = None if kind is Notion.AE else k
    return NotionValue(kind, float(gap), label, pair,
                       0 if undefined == "zero" else excluded, Fraction(gap))


def estimation_error(true: NotionValue, estimate: Union[BoundedNotion, NotionValue]) -> float:
    if Notion(true.kind) is not Notion(estimate.kind):
        raise DomainError(f"cannot compare {true.kind.value} with {estimate.kind.value}")
    value = estimate.gf_estimate if isinstance(estimate, BoundedNotion) else estimate.value
    return abs(true.value - value)
