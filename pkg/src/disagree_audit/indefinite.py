"""Bounds and midpoint estimates for equal opportunity, predictive equality
and overall misclassification rate.

Each per-cell rate R[m,k] is bracketed by a lower bound built from the
disagreement and statistical-parity rates and an upper bound (1 unless the
caller supplies something sharper).  The group-level gap is then bracketed
by the worst-case pairings of those cell bounds, and estimated by their
midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .domain import DomainError, Notion
from .rates import RateTable

Cell = Optional[Fraction]


def _aux_exact(table: RateTable, m: int, k: int):
    sp = table.sp(m, k)
    if sp is None:
        return None
    dr = table.dr(m, k)
    if dr is None:
        # no records with y=k: phi and mu are joint masses and vanish with SP
        if sp != 0:
            return None
        return Fraction(0), Fraction(0), 1 - sp
    return (1 - dr) * sp, dr * sp, 1 - sp


def aux_terms(table: RateTable, m: int, k: int) -> Optional[tuple[float, float, float]]:
    """``(phi, mu, omega)`` for one cell, or ``None`` when undefined.

    phi = (1 - DR) * SP, mu = DR * SP, omega = 1 - SP (the mass of every
    other label).
    """
    terms = _aux_exact(table, m, k)
    return None if terms is None else tuple(float(t) for t in terms)


def _eo_exact(table: RateTable, m: int, k: int) -> Cell:
    terms = _aux_exact(table, m, k)
    if terms is None:
        return None
    phi, _, omega = terms
    if phi + omega == 0:
        return Fraction(0)
    return phi / (phi + omega)


def _pe_exact(table: RateTable, m: int, k: int) -> Cell:
    terms = _aux_exact(table, m, k)
    if terms is None:
        return None
    _, mu, omega = terms
    if mu + omega == 0:
        return None
    return mu / (mu + omega)


def _omr_exact(table: RateTable, m: int, k: int) -> Cell:
    eo = _eo_exact(table, m, k)
    return None if eo is None else 1 - eo


_LOWER: dict[Notion, Callable[[RateTable, int, int], Cell]] = {
    Notion.EO: _eo_exact,
    Notion.PE: _pe_exact,
    Notion.OMR: _omr_exact,
}


def _as_float(value: Cell) -> Optional[float]:
    return None if value is None else float(value)


def eo_lower_bound(table: RateTable, m: int, k: int) -> Optional[float]:
    return _as_float(_eo_exact(table, m, k))


def pe_lower_bound(table: RateTable, m: int, k: int) -> Optional[float]:
    return _as_float(_pe_exact(table, m, k))


def omr_lower_bound(table: RateTable, m: int, k: int) -> Optional[float]:
    return _as_float(_omr_exact(table, m, k))


@dataclass(frozen=True)
class CellBounds:
    lower: tuple[tuple[Cell, ...], ...]
    upper: tuple[tuple[Cell, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(tuple(r) for r in self.lower))
        object.__setattr__(self, "upper", tuple(tuple(r) for r in self.upper))
        for m, (lo_row, up_row) in enumerate(zip(self.lower, self.upper)):
            for k, (lo, up) in enumerate(zip(lo_row, up_row)):
                if (lo is None) != (up is None):
                    raise DomainError(f"cell ({m},{k}) has only one bound")
                if lo is not None and lo > up:
                    raise DomainError(f"cell ({m},{k}): lower {lo} > upper {up}")

    def defined(self, m: int, k: int) -> bool:
        return self.lower[m][k] is not None

    def excluded(self, skip_groups: Sequence[int] = ()) -> int:
        return sum(1 for m, row in enumerate(self.lower) if m not in skip_groups
                   for lo in row if lo is None)


OMR_MODES = ("paper", "corrected")


def cell_bounds(table: RateTable, kind: Notion,
                upper: Optional[Sequence[Sequence[Cell]]] = None,
                omr_bounds: str = "paper") -> CellBounds:
    """Per-cell bounds for one indefinite notion.

    ``omr_bounds="paper"`` uses ``omega / (phi + omega)`` as the OMR lower
    bound with upper bound 1.  Since OMR = 1 - EO and EO is bounded below,
    that quantity actually bounds OMR from above; ``"corrected"`` uses the
    bracket ``[0, omega / (phi + omega)]`` instead.
    """
    kind = Notion(kind)
    if omr_bounds not in OMR_MODES:
        raise DomainError(f"omr_bounds must be one of {OMR_MODES}, got {omr_bounds!r}")
    lower_of = _LOWER[kind]
    lower = [[lower_of(table, m, k) for k in range(table.labels.size)]
             for m in range(table.groups.count)]
    if kind is Notion.OMR and omr_bounds == "corrected":
        if upper is not None:
            raise DomainError("corrected OMR bounds take no caller-supplied upper bounds")
        upper = lower
        lower = [[None if up is None else Fraction(0) for up in row] for row in upper]
    elif upper is None:
        upper = [[None if lo is None else Fraction(1) for lo in row] for row in lower]
    else:
        upper = [[None if lo is None else Fraction(up) for lo, up in zip(lrow, urow)]
                 for lrow, urow in zip(lower, upper)]
    return CellBounds(lower, upper)


def _extreme_pairing(first, second):
    best = None
    for k in range(len(first[0])):
        present = [m for m in range(len(first)) if first[m][k] is not None]
        if len(present) < 2:
            continue
        for m in present:
            for m2 in present:
                if m != m2:
                    gap = first[m][k] - second[m2][k]
                    if best is None or gap > best[0]:
                        best = (gap, k, (m, m2))
    return best


def gf_bounds(cells: CellBounds):
    """``(gf_lower, gf_upper, lower_argmax, upper_argmax)`` over defined cells.

    Each argmax is ``(label, (m, m2))``.
    """
    lo = _extreme_pairing(cells.lower, cells.upper)
    if lo is None:
        raise DomainError("no label has bounds defined in two or more groups")
    up = _extreme_pairing(cells.upper, cells.lower)
    return lo[0], up[0], lo[1:], up[1:]


def gf_estimate(gf_lower, gf_upper):
    if gf_lower > gf_upper:
        raise DomainError(f"inverted bounds: {gf_lower} > {gf_upper}")
    return (gf_lower + gf_upper) / 2


@dataclass(frozen=True)
class BoundedNotion:
    kind: Notion
    gf_lower: float
    gf_upper: float
    gf_estimate: float
    lower_argmax: tuple
    upper_argmax: tuple
    excluded_cells: int = 0
    exact: Optional[tuple[Fraction, Fraction, Fraction]] = field(
        default=None, compare=False, repr=False)

    @property
    def half_width(self) -> float:
        return (self.gf_upper - self.gf_lower) / 2


def bounded_notion(table: RateTable, kind: Notion,
                   upper: Optional[Sequence[Sequence[Cell]]] = None,
                   omr_bounds: str = "paper") -> BoundedNotion:
    kind = Notion(kind)
    if kind not in _LOWER:
        raise DomainError(f"{kind.value} is not an indefinite notion")
    if len(table.nonempty_groups()) < 2:
        raise DomainError(f"{kind.value} needs at least two non-empty groups")
    cells = cell_bounds(table, kind, upper, omr_bounds)
    lo, up, lo_arg, up_arg = gf_bounds(cells)
    empty = [m for m in range(table.groups.count) if table.is_empty(m)]
    # the stored estimate is the midpoint of the stored floats, bit for bit
    return BoundedNotion(kind, float(lo), float(up), gf_estimate(float(lo), float(up)),
                         lo_arg, up_arg, cells.excluded(empty),
                         (lo, up, gf_estimate(lo, up)))
