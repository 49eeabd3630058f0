"""Notions that disagreement and statistical-parity rates determine exactly."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .domain import DomainError, Notion
from .rates import RateTable

Cell = Optional[Fraction]


@dataclass(frozen=True)
class NotionValue:
    kind: Notion
    value: float
    argmax_label: Optional[int]
    argmax_pair: tuple[int, int]
    excluded_cells: int = 0
    exact: Optional[Fraction] = field(default=None, compare=False, repr=False)


def max_pairwise_gap(cells: Sequence[Sequence[Cell]]):
    """Largest ``cells[m][k] - cells[m2][k]`` over labels and ordered pairs m != m2.

    ``None`` cells are skipped; a label takes part only when at least two
    groups define it.  Returns ``(gap, k, (m, m2))`` or ``None`` when no
    label qualifies.
    """
    best = None
    n_labels = len(cells[0]) if cells else 0
    for k in range(n_labels):
        column = [(m, row[k]) for m, row in enumerate(cells) if row[k] is not None]
        if len(column) < 2:
            continue
        hi_m, hi = max(column, key=lambda c: c[1])
        lo_m, lo = min((c for c in column if c[0] != hi_m), key=lambda c: c[1])
        if best is None or hi - lo > best[0]:
            best = (hi - lo, k, (hi_m, lo_m))
    return best


def _notion(kind: Notion, cells, excluded: int, label_free: bool = False) -> NotionValue:
    found = max_pairwise_gap(cells)
    if found is None:
        raise DomainError(f"{kind.value}: no label is defined in two or more groups")
    gap, k, pair = found
    return NotionValue(kind, float(gap), None if label_free else k, pair,
                       excluded, Fraction(gap))


def _require_two_groups(table: RateTable, what: str) -> None:
    if len(table.nonempty_groups()) < 2:
        raise DomainError(f"{what} needs at least two non-empty groups")


def statistical_parity(table: RateTable) -> NotionValue:
    _require_two_groups(table, "statistical parity")
    cells = [[table.sp(m, k) for k in range(table.labels.size)]
             for m in range(table.groups.count)]
    return _notion(Notion.SP, cells, 0)


def accuracy_by_group(table: RateTable) -> list[Cell]:
    """Per-group agreement rate ``1 - sum_k DR[m,k] * SP[m,k]``.

    Cells with an undefined disagreement rate are left out of the sum.
    """
    out: list[Cell] = []
    for m in range(table.groups.count):
        if table.is_empty(m):
            out.append(None)
            continue
        total = Fraction(0)
        for k in range(table.labels.size):
            dr, sp = table.dr(m, k), table.sp(m, k)
            if dr is not None:
                total += dr * sp
        out.append(1 - total)
    return out


def accuracy_equality(table: RateTable) -> NotionValue:
    _require_two_groups(table, "accuracy equality")
    excluded = sum(1 for m in table.nonempty_groups() for k in range(table.labels.size)
                   if table.dr(m, k) is None and table.sp(m, k))
    cells = [[ae] for ae in accuracy_by_group(table)]
    return _notion(Notion.AE, cells, excluded, label_free=True)


def calibration(table: RateTable) -> NotionValue:
    # gaps of 1 - DR, so argmax_pair points at the better-calibrated group first
    cells = [[None if table.dr(m, k) is None else 1 - table.dr(m, k)
              for k in range(table.labels.size)]
             for m in range(table.groups.count)]
    return _notion(Notion.CAL, cells, table.undefined_cells())


def definite_notion(table: RateTable, kind: Notion) -> NotionValue:
    return {Notion.SP: statistical_parity, Notion.AE: accuracy_equality,
            Notion.CAL: calibration}[Notion(kind)](table)
