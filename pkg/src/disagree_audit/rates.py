"""Empirical statistical-parity and disagreement rate tables.

Tables keep raw tallies and divide only when a rate is read, so that the
accuracy-equality and calibration identities hold exactly.  A tally may be
an ``int`` (record counts) or a ``Fraction`` (probability mass, used by the
simulator's analytic tables).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .domain import AuditRecord, DomainError, GroupPartition, LabelSpace, validate_records

Tally = Union[int, Fraction]
Grid = tuple[tuple[Tally, ...], ...]


class RateKind(str, Enum):
    SP = "SP"
    DR_CELL = "DR_cell"
    DR_GROUP = "DR_group"


def _grid(rows: Sequence[Sequence[Tally]]) -> Grid:
    return tuple(tuple(row) for row in rows)


@dataclass(frozen=True)
class RateTable:
    labels: LabelSpace
    groups: GroupPartition
    counts: Grid
    disagree: Grid
    sp_counts: Optional[Grid] = None
    alpha: Fraction = Fraction(0)
    sp_source: str = "per-critic"

    def __post_init__(self):
        object.__setattr__(self, "counts", _grid(self.counts))
        object.__setattr__(self, "disagree", _grid(self.disagree))
        if self.sp_counts is None:
            object.__setattr__(self, "sp_counts", self.counts)
        else:
            object.__setattr__(self, "sp_counts", _grid(self.sp_counts))
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        shape = (self.groups.count, self.labels.size)
        for name in ("counts", "disagree", "sp_counts"):
            grid = getattr(self, name)
            if len(grid) != shape[0] or any(len(row) != shape[1] for row in grid):
                raise DomainError(f"{name} must be {shape[0]}x{shape[1]}")
        if self.alpha < 0:
            raise DomainError("smoothing alpha must be non-negative")
        for m in range(shape[0]):
            for k in range(shape[1]):
                if not 0 <= self.disagree[m][k] <= self.counts[m][k]:
                    raise DomainError(f"cell ({m},{k}): need 0 <= d <= n")
                if self.sp_counts[m][k] < 0:
                    raise DomainError(f"cell ({m},{k}): negative SP tally")

    # -- tallies ---------------------------------------------------------

    def group_total(self, m: int) -> Tally:
        return sum(self.counts[m])

    def is_empty(self, m: int) -> bool:
        return self.group_total(m) == 0

    def nonempty_groups(self) -> list[int]:
        return [m for m in range(self.groups.count) if not self.is_empty(m)]

    # -- exact rates (None marks an undefined rate) -----------------------

    def sp(self, m: int, k: int) -> Optional[Fraction]:
        row = self.sp_counts[m]
        total = sum(row) + self.labels.size * self.alpha
        if total == 0 or self.is_empty(m):
            return None
        return Fraction(row[k] + self.alpha) / total

    def dr(self, m: int, k: int) -> Optional[Fraction]:
        n = self.counts[m][k] + 2 * self.alpha
        if n == 0:
            return None
        return Fraction(self.disagree[m][k] + self.alpha) / n

    def dr_group(self, m: int) -> Optional[Fraction]:
        """Fraction of the group's records flagged as disagreements."""
        n = self.group_total(m)
        if n == 0:
            return None
        return Fraction(sum(self.disagree[m])) / n

    def defined(self, m: int, k: int) -> bool:
        return self.dr(m, k) is not None

    def undefined_cells(self) -> int:
        return sum(1 for m in range(self.groups.count) for k in range(self.labels.size)
                   if not self.is_empty(m) and not self.defined(m, k))

    def with_sp_counts(self, sp_counts: Sequence[Sequence[Tally]],
                       source: str = "pooled") -> "RateTable":
        """Same disagreement tallies, statistical parity taken from elsewhere."""
        return RateTable(self.labels, self.groups, self.counts, self.disagree,
                         sp_counts, self.alpha, source)

    def __add__(self, other: "RateTable") -> "RateTable":
        if (self.labels, self.groups) != (other.labels, other.groups):
            raise DomainError("cannot merge tables over different domains")
        if self.sp_source != "per-critic" or other.sp_source != "per-critic":
            raise DomainError("only per-critic tables can be merged")
        add = lambda a, b: [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]
        return RateTable(self.labels, self.groups, add(self.counts, other.counts),
                         add(self.disagree, other.disagree), alpha=self.alpha)


def tally(records: Iterable[AuditRecord], labels: LabelSpace,
          groups: GroupPartition) -> tuple[list[list[int]], list[list[int]]]:
    counts = [[0] * labels.size for _ in range(groups.count)]
    disagree = [[0] * labels.size for _ in range(groups.count)]
    for r in records:
        counts[r.group][r.system_label] += 1
        disagree[r.group][r.system_label] += r.disagreement
    return counts, disagree


def build_rate_table(records: Sequence[AuditRecord], labels: LabelSpace,
                     groups: GroupPartition, alpha: float | Fraction = 0,
                     check: bool = True) -> RateTable:
    if not records:
        raise DomainError("cannot build a rate table from zero records")
    if check:
        report = validate_records(records, labels, groups)
        if not report.clean:
            problems = report.range_violations + report.consistency_violations
            raise DomainError(f"{len(problems)} invalid records, first: {problems[0]}")
    counts, disagree = tally(records, labels, groups)
    alpha = Fraction(str(alpha)) if isinstance(alpha, float) else Fraction(alpha)
    return RateTable(labels, groups, counts, disagree, alpha=alpha)


def rate_at(table: RateTable, kind: RateKind | str, m: int,
            k: Optional[int] = None) -> Optional[float]:
    """Read one rate as a float; ``None`` when it is undefined."""
    kind = RateKind(kind)
    if not table.groups.contains(m):
        raise DomainError(f"group {m} out of range")
    if kind is RateKind.DR_GROUP:
        value = table.dr_group(m)
    else:
        if k is None:
            raise DomainError(f"{kind.value} needs a label index")
        table.labels.check(k)
        value = table.sp(m, k) if kind is RateKind.SP else table.dr(m, k)
    return None if value is None else float(value)
