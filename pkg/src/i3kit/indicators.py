"""I3, PR6 and derived per-unit indicators over a scored reference set.

A *unit* is any collection of scored records, optionally weighted (as
produced by fractional address counting).  Sums are exact: quantiles and
weights are `Fraction`s, converted to float only for the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from .errors import EmptyReference, ZeroVariance
from .quantiles import ScoredRecord

RI3R_MIN_N = 5


class WeightedRecord(NamedTuple):
    record: ScoredRecord
    weight: Fraction = Fraction(1)


class Pr6Mode(str, Enum):
    CLASS_SUM = "classsum"          # sum of class values 1..6
    UNIT_SHARE = "unitshare"        # each paper counts class/n_unit
    SUPERSET_SHARE = "supershare"   # each paper counts class/N_reference


def as_weighted(unit: Iterable) -> list[WeightedRecord]:
    out = []
    for item in unit:
        if isinstance(item, WeightedRecord):
            out.append(item)
        elif isinstance(item, tuple):
            out.append(WeightedRecord(item[0], Fraction(item[1])))
        else:
            out.append(WeightedRecord(item, Fraction(1)))
    return out


def n_papers(unit) -> Fraction:
    return sum((w.weight for w in as_weighted(unit)), Fraction(0))


def i3(unit) -> Fraction:
    """Integrated impact: sum of the (weighted) quantiles of the unit's papers."""
    return sum((w.weight * Fraction(w.record.quantile) for w in as_weighted(unit)), Fraction(0))


def expected_i3_from_totals(i3_total, n_unit, n_total):
    if n_total <= 0:
        raise EmptyReference("reference set has no papers")
    return i3_total * n_unit / n_total


def expected_i3(unit, reference: Sequence[ScoredRecord]) -> Fraction:
    """Reference I3 scaled by the unit's share of publications."""
    if not reference:
        raise EmptyReference("reference set has no papers")
    return expected_i3_from_totals(i3(reference), n_papers(unit), Fraction(len(reference)))


def pr6_contributions(unit, mode=Pr6Mode.CLASS_SUM, reference_n: Optional[int] = None) -> list[Fraction]:
    """Per-paper PR6 credit under the chosen normalisation."""
    items = as_weighted(unit)
    mode = Pr6Mode(mode)
    if mode is Pr6Mode.CLASS_SUM:
        denom = Fraction(1)
    elif mode is Pr6Mode.UNIT_SHARE:
        denom = n_papers(items)
    else:
        if not reference_n:
            raise EmptyReference("superset share needs the reference size")
        denom = Fraction(reference_n)
    return [w.weight * w.record.pr6_class / denom for w in items]


def pr6(unit, mode=Pr6Mode.CLASS_SUM, reference: Optional[Sequence[ScoredRecord]] = None) -> Fraction:
    ref_n = len(reference) if reference is not None else None
    return sum(pr6_contributions(unit, mode, ref_n), Fraction(0))


@dataclass(frozen=True)
class ReferenceStats:
    n: int
    i3: Fraction
    pr6: Fraction
    mean_quantile: Fraction
    sd_quantile: float

    @classmethod
    def of(cls, reference: Sequence[ScoredRecord]) -> "ReferenceStats":
        if not reference:
            raise EmptyReference("reference set has no papers")
        n = len(reference)
        total = i3(reference)
        mean = total / n
        var = sum(((Fraction(r.quantile) - mean) ** 2 for r in reference), Fraction(0)) / n
        return cls(n, total, pr6(reference), mean, math.sqrt(var))


def ri3r(unit, reference: Sequence[ScoredRecord] | ReferenceStats, min_n: int = RI3R_MIN_N) -> Optional[float]:
    """One-sample z of the unit's mean quantile against the reference mean.

    Uses the population standard deviation of the reference quantiles.
    Returns None for units smaller than `min_n` papers.
    """
    stats = reference if isinstance(reference, ReferenceStats) else ReferenceStats.of(reference)
    n = n_papers(unit)
    if n < min_n or n == 0:
        return None
    if stats.sd_quantile == 0:
        raise ZeroVariance("all reference quantiles are equal")
    mean = i3(unit) / n
    return float(mean - stats.mean_quantile) * math.sqrt(n) / stats.sd_quantile


@dataclass(frozen=True)
class IndicatorResult:
    unit_id: str
    n_papers: float
    sum_citations: float
    mean_citations: float
    i3: float
    i3_share: float
    expected_i3: float
    pr6: float
    pr6_share: float
    expected_pr6: float
    mean_quantile: float
    ri3r_z: Optional[float]
    # exact values kept for flagging and tie-breaking
    i3_exact: Fraction = Fraction(0)
    n_exact: Fraction = Fraction(0)
    pr6_exact: Fraction = Fraction(0)


def unit_result(unit_id: str, unit, stats: ReferenceStats, min_n: int = RI3R_MIN_N) -> IndicatorResult:
    items = as_weighted(unit)
    n = n_papers(items)
    cites = sum((w.weight * w.record.times_cited for w in items), Fraction(0))
    unit_i3 = i3(items)
    unit_pr6 = pr6(items)
    return IndicatorResult(
        unit_id=unit_id,
        n_papers=float(n),
        sum_citations=float(cites),
        mean_citations=float(cites / n) if n else 0.0,
        i3=float(unit_i3),
        i3_share=float(unit_i3 / stats.i3) if stats.i3 else 0.0,
        expected_i3=float(expected_i3_from_totals(stats.i3, n, stats.n)),
        pr6=float(unit_pr6),
        pr6_share=float(unit_pr6 / stats.pr6),
        expected_pr6=float(expected_i3_from_totals(stats.pr6, n, stats.n)),
        mean_quantile=float(unit_i3 / n) if n else 0.0,
        ri3r_z=ri3r(items, stats, min_n) if stats.sd_quantile else None,
        i3_exact=unit_i3,
        n_exact=n,
        pr6_exact=unit_pr6,
    )


def indicator_report(units: Mapping[str, Iterable], reference: Sequence[ScoredRecord],
                     min_n: int = RI3R_MIN_N) -> list[IndicatorResult]:
    """One result per unit, sorted by I3 share (descending) then unit id."""
    stats = ReferenceStats.of(reference)
    results = [unit_result(uid, members, stats, min_n) for uid, members in units.items()]
    results.sort(key=lambda r: (-r.i3_exact, r.unit_id))
    return results


def overlap_multiplicity(units: Mapping[str, Iterable], reference: Sequence[ScoredRecord]) -> float:
    """Total weighted papers over units divided by the reference size (1 for a partition)."""
    if not reference:
        raise EmptyReference("reference set has no papers")
    return float(sum((n_papers(u) for u in units.values()), Fraction(0)) / len(reference))
