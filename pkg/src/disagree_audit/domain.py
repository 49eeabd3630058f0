"""Label space, group partition and audit records shared by every stage."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence


class DomainError(ValueError):
    """Raised when an input lies outside an operation's domain."""


class Notion(str, Enum):
    SP = "SP"
    AE = "AE"
    CAL = "CAL"
    EO = "EO"
    PE = "PE"
    OMR = "OMR"

    @property
    def definite(self) -> bool:
        return self in (Notion.SP, Notion.AE, Notion.CAL)


DEFINITE = (Notion.SP, Notion.AE, Notion.CAL)
INDEFINITE = (Notion.EO, Notion.PE, Notion.OMR)


@dataclass(frozen=True)
class LabelSpace:
    size: int
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.size < 2:
            raise DomainError(f"label space needs at least 2 labels, got {self.size}")
        if not self.names:
            object.__setattr__(self, "names", tuple(str(k) for k in range(self.size)))
        elif len(self.names) != self.size:
            raise DomainError("label names must match label count")

    def contains(self, label: int) -> bool:
        return 0 <= label < self.size

    def check(self, label: int, what: str = "label") -> None:
        if not self.contains(label):
            raise DomainError(f"{what} {label} outside 0..{self.size - 1}")


@dataclass(frozen=True)
class GroupPartition:
    names: tuple[str, ...]
    non_sensitive_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) < 2:
            raise DomainError(f"need at least 2 groups, got {len(self.names)}")
        if len(set(self.names)) != len(self.names):
            raise DomainError(f"group names must be unique: {self.names}")
        if not 0 <= self.non_sensitive_index < len(self.names):
            raise DomainError("non_sensitive_index out of range")

    @property
    def count(self) -> int:
        return len(self.names)

    def contains(self, group: int) -> bool:
        return 0 <= group < self.count

    @classmethod
    def numbered(cls, count: int) -> "GroupPartition":
        return cls(tuple(f"g{m}" for m in range(count)))

    @classmethod
    def product(cls, attributes: Sequence[Sequence[str]], sep: str = "/") -> "GroupPartition":
        """Flatten several categorical attributes into one group index.

        The first attribute varies slowest, so the group whose categories
        are all first-listed gets index 0 (the non-sensitive group).
        """
        names = tuple(sep.join(combo) for combo in itertools.product(*attributes))
        return cls(names)

    @staticmethod
    def encode(indices: Sequence[int], sizes: Sequence[int]) -> int:
        group = 0
        for i, n in zip(indices, sizes):
            if not 0 <= i < n:
                raise DomainError(f"category index {i} outside 0..{n - 1}")
            group = group * n + i
        return group


@dataclass(frozen=True)
class AuditRecord:
    group: int
    system_label: int
    disagreement: int
    intrinsic_label: Optional[int] = None
    record_id: Optional[str] = None


@dataclass(frozen=True)
class CriticFeedback:
    critic_id: str
    records: tuple[AuditRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise DomainError(f"critic {self.critic_id!r} has no records")


def derive_disagreement(system_label: int, intrinsic_label: int,
                        labels: Optional[LabelSpace] = None) -> int:
    """1 when the critic's label differs from the system's, else 0."""
    if labels is not None:
        labels.check(system_label, "system label")
        labels.check(intrinsic_label, "intrinsic label")
    elif system_label < 0 or intrinsic_label < 0:
        raise DomainError("labels must be non-negative")
    return int(system_label != intrinsic_label)


@dataclass
class ValidationReport:
    range_violations: list[str] = field(default_factory=list)
    consistency_violations: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.range_violations and not self.consistency_violations


def validate_records(records: Iterable[AuditRecord], labels: LabelSpace,
                     groups: GroupPartition) -> ValidationReport:
    report = ValidationReport()
    for i, r in enumerate(records):
        where = f"record {i}" + (f" ({r.record_id})" if r.record_id else "")
        if not groups.contains(r.group):
            report.range_violations.append(f"{where}: group {r.group} >= {groups.count}")
        if not labels.contains(r.system_label):
            report.range_violations.append(f"{where}: system label {r.system_label} out of range")
        if r.disagreement not in (0, 1):
            report.range_violations.append(f"{where}: disagreement {r.disagreement} not a bit")
        if r.intrinsic_label is not None:
            if not labels.contains(r.intrinsic_label):
                report.range_violations.append(
                    f"{where}: intrinsic label {r.intrinsic_label} out of range")
            elif int(r.intrinsic_label != r.system_label) != r.disagreement:
                report.consistency_violations.append(
                    f"{where}: s={r.disagreement} but y={r.system_label}, z={r.intrinsic_label}")
    return report
