"""Load system outcomes and critic responses from delimited text.

Column roles and attribute-to-group dictionaries come from a JSON schema
file; see ``Schema`` for its keys.  Several partition attributes are
flattened into one group index, first attribute varying slowest.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .domain import (AuditRecord, CriticFeedback, DomainError, GroupPartition, LabelSpace,
                     derive_disagreement)

log = logging.getLogger(__name__)

INTERCHANGE_COLUMNS = ("critic_id", "record_id", "group_index", "y", "z", "s")


class IngestError(DomainError):
    pass


@dataclass(frozen=True)
class Attribute:
    column: str
    categories: tuple[str, ...]
    values: dict  # raw token -> category name
    default: Optional[str] = None

    def category_index(self, token: str) -> Optional[int]:
        category = self.values.get(token.strip(), self.default)
        if category is None:
            return None
        return self.categories.index(category)


@dataclass(frozen=True)
class Schema:
    """Column roles for the profile and response files.

    JSON layout::

        {"delimiter": ",",
         "labels": ["no", "yes"],
         "profiles": {"record_id": "id", "system_label": "decile_score",
                      "system_label_mode": "binarize", "binarize_threshold": 5,
                      "ground_truth": "two_year_recid", "strict": true,
                      "attributes": [{"column": "race", "categories": ["Caucasian", "Other"],
                                      "values": {"Caucasian": "Caucasian"},
                                      "default": "Other"}]},
         "responses": {"critic_id": "worker", "record_id": "id", "response": "answer",
                       "values": {"no": 0, "yes": 1}}}

    ``system_label_mode`` is ``binarize`` (score >= threshold -> label 1),
    ``index`` (the column holds label indices) or ``map`` (``label_values``
    maps tokens to indices).
    """

    record_id: str
    system_label: str
    attributes: tuple[Attribute, ...]
    critic_id: str
    response_record_id: str
    response: str
    response_values: dict
    labels: LabelSpace = LabelSpace(2)
    system_label_mode: str = "binarize"
    binarize_threshold: float = 5
    label_values: dict = field(default_factory=dict)
    ground_truth: Optional[str] = None
    strict: bool = True
    delimiter: str = ","

    def __post_init__(self):
        if self.system_label_mode not in ("binarize", "index", "map"):
            raise IngestError(f"unknown system_label_mode {self.system_label_mode!r}")
        if self.system_label_mode == "binarize" and self.labels.size != 2:
            raise IngestError("binarized system labels need exactly 2 labels")
        if not self.attributes:
            raise IngestError("schema declares no partition attributes")
        for attr in self.attributes:
            unknown = set(attr.values.values()) - set(attr.categories)
            if attr.default is not None:
                unknown |= {attr.default} - set(attr.categories)
            if unknown:
                raise IngestError(f"attribute {attr.column!r} maps to unknown categories "
                                  f"{sorted(unknown)}")

    @property
    def groups(self) -> GroupPartition:
        return GroupPartition.product([a.categories for a in self.attributes])

    def fingerprint(self) -> dict:
        out = {"system_label_mode": self.system_label_mode,
               "groups": list(self.groups.names), "labels": list(self.labels.names)}
        if self.system_label_mode == "binarize":
            out["binarize_threshold"] = self.binarize_threshold
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Schema":
        try:
            prof, resp = data["profiles"], data["responses"]
            labels = data.get("labels")
            attributes = tuple(
                Attribute(a["column"], tuple(a["categories"]), dict(a.get("values", {})),
                          a.get("default"))
                for a in prof["attributes"])
            return cls(
                record_id=prof["record_id"], system_label=prof["system_label"],
                attributes=attributes, critic_id=resp["critic_id"],
                response_record_id=resp.get("record_id", prof["record_id"]),
                response=resp["response"],
                response_values={str(k).strip().lower(): int(v)
                                 for k, v in resp.get("values", {}).items()},
                labels=LabelSpace(len(labels), tuple(labels)) if labels else LabelSpace(2),
                system_label_mode=prof.get("system_label_mode", "binarize"),
                binarize_threshold=float(prof.get("binarize_threshold", 5)),
                label_values={str(k): int(v) for k, v in prof.get("label_values", {}).items()},
                ground_truth=prof.get("ground_truth"), strict=bool(prof.get("strict", True)),
                delimiter=data.get("delimiter", ","))
        except KeyError as exc:
            raise IngestError(f"schema is missing key {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "Schema":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise IngestError(f"{path}: not valid JSON ({exc})") from exc


@dataclass(frozen=True)
class ProfileRow:
    record_id: str
    attributes: dict
    group: int
    system_label: int
    ground_truth: Optional[str] = None


@dataclass(frozen=True)
class ResponseRow:
    critic_id: str
    record_id: str
    response: int


def _read_rows(path: str | Path, delimiter: str, required: Iterable[str]):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise IngestError(f"{path}: missing column(s) {missing}")
        # header is line 1
        for line, row in enumerate(reader, start=2):
            yield line, row


def _system_label(schema: Schema, token: str) -> int:
    token = token.strip()
    if schema.system_label_mode == "binarize":
        return int(float(token) >= schema.binarize_threshold)
    if schema.system_label_mode == "map":
        return schema.label_values[token]
    label = int(token)
    schema.labels.check(label, "system label")
    return label


def load_profiles(path: str | Path, schema: Schema) -> list[ProfileRow]:
    required = [schema.record_id, schema.system_label] + [a.column for a in schema.attributes]
    if schema.ground_truth:
        required.append(schema.ground_truth)
    sizes = [len(a.categories) for a in schema.attributes]
    rows, seen = [], set()
    for line, row in _read_rows(path, schema.delimiter, required):
        record_id = row[schema.record_id].strip()
        if record_id in seen:
            raise IngestError(f"{path}:{line}: duplicate record_id {record_id!r}")
        seen.add(record_id)
        indices = []
        for attr in schema.attributes:
            token = row[attr.column]
            idx = attr.category_index(token)
            if idx is None:
                if schema.strict:
                    raise IngestError(f"{path}:{line}: unmapped {attr.column} value {token!r}")
                log.warning("%s:%d: skipping row with unmapped %s value %r",
                            path, line, attr.column, token)
                break
            indices.append(idx)
        else:
            try:
                label = _system_label(schema, row[schema.system_label])
            except (ValueError, KeyError) as exc:
                raise IngestError(f"{path}:{line}: bad system label "
                                  f"{row[schema.system_label]!r} ({exc})") from exc
            rows.append(ProfileRow(
                record_id, {a.column: row[a.column] for a in schema.attributes},
                GroupPartition.encode(indices, sizes), label,
                row[schema.ground_truth] if schema.ground_truth else None))
    return rows


def load_responses(path: str | Path, schema: Schema) -> list[ResponseRow]:
    required = [schema.critic_id, schema.response_record_id, schema.response]
    rows, seen = [], set()
    for line, row in _read_rows(path, schema.delimiter, required):
        key = (row[schema.critic_id].strip(), row[schema.response_record_id].strip())
        if key in seen:
            raise IngestError(f"{path}:{line}: critic {key[0]!r} answered {key[1]!r} twice")
        seen.add(key)
        token = row[schema.response].strip().lower()
        if schema.response_values:
            if token not in schema.response_values:
                raise IngestError(f"{path}:{line}: unmapped response {row[schema.response]!r}")
            response = schema.response_values[token]
        else:
            try:
                response = int(token)
            except ValueError as exc:
                raise IngestError(f"{path}:{line}: bad response {token!r}") from exc
        if not schema.labels.contains(response):
            raise IngestError(f"{path}:{line}: response label {response} out of range")
        rows.append(ResponseRow(key[0], key[1], response))
    return rows


def join_responses(profiles: Sequence[ProfileRow],
                   responses: Sequence[ResponseRow]) -> list[CriticFeedback]:
    """One feedback bundle per critic, sorted by critic id, records in response order."""
    by_id = {p.record_id: p for p in profiles}
    dangling = sorted({r.record_id for r in responses if r.record_id not in by_id})
    if dangling:
        shown = ", ".join(dangling[:10]) + (" ..." if len(dangling) > 10 else "")
        raise IngestError(f"{len(dangling)} response record_id(s) not in profiles: {shown}")
    per_critic: dict[str, list[AuditRecord]] = defaultdict(list)
    for r in responses:
        p = by_id[r.record_id]
        s = derive_disagreement(p.system_label, r.response)
        per_critic[r.critic_id].append(
            AuditRecord(p.group, p.system_label, s, r.response, r.record_id))
    return [CriticFeedback(c, per_critic[c]) for c in sorted(per_critic)]


def pooled_sp_counts(profiles: Sequence[ProfileRow], labels: LabelSpace,
                     groups: GroupPartition) -> list[list[int]]:
    counts = [[0] * labels.size for _ in range(groups.count)]
    for p in profiles:
        counts[p.group][p.system_label] += 1
    return counts


@dataclass
class DatasetSummary:
    critics: int = 0
    records: int = 0
    records_per_critic: dict = field(default_factory=dict)  # record count -> critics
    group_occupancy: dict = field(default_factory=dict)  # group -> records
    label_marginals: dict = field(default_factory=dict)  # group -> {label: records}

    def to_dict(self) -> dict:
        return {"critics": self.critics, "records": self.records,
                "records_per_critic": self.records_per_critic,
                "group_occupancy": self.group_occupancy,
                "label_marginals": self.label_marginals}


def summarize_dataset(feedbacks: Sequence[CriticFeedback]) -> DatasetSummary:
    summary = DatasetSummary(critics=len(feedbacks))
    per_critic = Counter(len(f.records) for f in feedbacks)
    occupancy: Counter = Counter()
    marginals: dict = defaultdict(Counter)
    for f in feedbacks:
        for r in f.records:
            occupancy[r.group] += 1
            marginals[r.group][r.system_label] += 1
    summary.records = sum(occupancy.values())
    summary.records_per_critic = dict(sorted(per_critic.items()))
    summary.group_occupancy = dict(sorted(occupancy.items()))
    summary.label_marginals = {m: dict(sorted(c.items())) for m, c in sorted(marginals.items())}
    return summary


def export_interchange(feedbacks: Sequence[CriticFeedback], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(INTERCHANGE_COLUMNS)
        for f in feedbacks:
            for r in f.records:
                z = "" if r.intrinsic_label is None else r.intrinsic_label
                writer.writerow([f.critic_id, r.record_id or "", r.group, r.system_label,
                                 z, r.disagreement])


def load_interchange(path: str | Path) -> list[CriticFeedback]:
    per_critic: dict[str, list[AuditRecord]] = defaultdict(list)
    for line, row in _read_rows(path, ",", INTERCHANGE_COLUMNS):
        try:
            z = None if row["z"] == "" else int(row["z"])
            record = AuditRecord(int(row["group_index"]), int(row["y"]), int(row["s"]), z,
                                 row["record_id"] or None)
        except ValueError as exc:
            raise IngestError(f"{path}:{line}: {exc}") from exc
        per_critic[row["critic_id"]].append(record)
    return [CriticFeedback(c, recs) for c, recs in per_critic.items()]


def interchange_domain(feedbacks: Sequence[CriticFeedback], num_labels: Optional[int] = None,
                       group_names: Optional[Sequence[str]] = None):
    """Smallest label space and partition covering an interchange dataset."""
    records = [r for f in feedbacks for r in f.records]
    top_label = max((max(r.system_label, r.intrinsic_label or 0) for r in records), default=1)
    labels = LabelSpace(num_labels or max(2, top_label + 1))
    if group_names:
        groups = GroupPartition(tuple(group_names))
    else:
        groups = GroupPartition.numbered(max(2, max((r.group for r in records), default=1) + 1))
    return labels, groups
