"""Citation quantiles within (publication year x document type) strata.

Quantiles are exact `Fraction` values on the 0-100 scale.  They are only
rounded (to four decimals) when written out.
"""

from __future__ import annotations

import csv
from bisect import bisect_left, bisect_right
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyFile, MalformedRow, MissingHeaderTag, OutOfRange, RecordNotInStratum
from .records import CitationRecord, RecordSet, normalize_doc_type

MUTZ_OFFSET = Fraction(9, 10)
SMALL_STRATUM = 5

# lower bounds of PR6 classes 2..6 (bottom-50%, top-50%, top-25%, top-10%, top-5%, top-1%)
PR6_BOUNDS = (50, 75, 90, 95, 99)

SCORED_FIELDS = (
    "record_id",
    "pub_year",
    "doc_type",
    "quantile",
    "pr6_class",
    "times_cited",
    "citation_score",
)


class Rule(str, Enum):
    STRICT_LESS = "strict"
    LESS_OR_EQUAL = "leq"
    TIE_AVERAGED = "tieavg"


class ScoreField(str, Enum):
    TIMES_CITED = "times_cited"
    CITATION_SCORE = "citation_score"


@dataclass(frozen=True)
class CountingRule:
    variant: Rule = Rule.STRICT_LESS
    mutz_offset: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", Rule(self.variant))
        if self.mutz_offset and self.variant is not Rule.STRICT_LESS:
            raise ValueError("the +0.9 offset is only defined for the strict-less rule")

    def describe(self) -> str:
        return self.variant.value + ("+mutz" if self.mutz_offset else "")


@dataclass(frozen=True)
class Stratum:
    key: tuple[int, str]
    records: tuple[CitationRecord, ...]

    @property
    def members(self) -> tuple[str, ...]:
        return tuple(rec.record_id for rec in self.records)

    @property
    def size(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class ScoredRecord:
    record_id: str
    pub_year: int
    doc_type: str
    quantile: Fraction
    pr6_class: int
    times_cited: int
    citation_score: float

    @property
    def stratum_key(self) -> tuple[int, str]:
        return (self.pub_year, self.doc_type)


def score_of(rec, score_field=ScoreField.TIMES_CITED):
    if ScoreField(score_field) is ScoreField.TIMES_CITED:
        return rec.times_cited
    return rec.citation_score


def stratify(rs: RecordSet | Iterable[CitationRecord]) -> list[Stratum]:
    groups = defaultdict(list)
    for rec in rs:
        groups[(rec.pub_year, str(rec.doc_type))].append(rec)
    if not groups:
        raise ValueError("cannot stratify an empty record set")
    return [Stratum(key, tuple(groups[key])) for key in sorted(groups)]


def small_strata(strata: Sequence[Stratum], min_size: int = SMALL_STRATUM) -> list[Stratum]:
    return [s for s in strata if s.size < min_size]


def _quantile(below: int, at_or_below: int, n: int, rule: CountingRule) -> Fraction:
    if rule.variant is Rule.STRICT_LESS:
        q = Fraction(100 * below, n)
        if rule.mutz_offset:
            q = min(q + MUTZ_OFFSET, Fraction(100))
        return q
    if rule.variant is Rule.LESS_OR_EQUAL:
        return Fraction(100 * at_or_below, n)
    # ties occupy ranks below+1 .. at_or_below; their mean minus 0.5, scaled
    return Fraction(100 * (below + at_or_below), 2 * n)


def quantile_of(record, stratum: Stratum, rule: CountingRule = CountingRule(),
                score_field=ScoreField.TIMES_CITED) -> Fraction:
    """Quantile of one record by direct counting over its stratum."""
    if record.record_id not in stratum.members:
        raise RecordNotInStratum(f"{record.record_id} not in stratum {stratum.key}")
    own = score_of(record, score_field)
    scores = [score_of(s, score_field) for s in stratum.records]
    below = sum(1 for s in scores if s < own)
    at_or_below = sum(1 for s in scores if s <= own)
    return _quantile(below, at_or_below, stratum.size, rule)


def pr6_class(quantile) -> int:
    """Six-class rank: 1 for the bottom half up to 6 for the top 1%."""
    # floats are checked as floats: float(100.9) is a hair above 1009/10
    limit = 100.9 if isinstance(quantile, float) else Fraction(1009, 10)
    if not 0 <= quantile <= limit:
        raise OutOfRange(quantile)
    q = min(quantile, 100)
    return 1 + sum(q >= bound for bound in PR6_BOUNDS)


def pr6_classes(quantiles) -> np.ndarray:
    """Vectorised `pr6_class` for float arrays."""
    q = np.asarray(quantiles, dtype=float)
    if q.size and (q.min() < 0 or q.max() > 100.9):
        raise OutOfRange(float(q.min() if q.min() < 0 else q.max()))
    return np.searchsorted(np.asarray(PR6_BOUNDS, dtype=float), np.minimum(q, 100.0), side="right") + 1


def score_stratum(stratum: Stratum, rule: CountingRule = CountingRule(),
                  score_field=ScoreField.TIMES_CITED) -> list[ScoredRecord]:
    ordered = sorted(score_of(r, score_field) for r in stratum.records)
    n = stratum.size
    out = []
    for rec in stratum.records:
        s = score_of(rec, score_field)
        q = _quantile(bisect_left(ordered, s), bisect_right(ordered, s), n, rule)
        out.append(ScoredRecord(rec.record_id, rec.pub_year, str(rec.doc_type), q,
                                pr6_class(q), rec.times_cited, rec.citation_score))
    return out


def score_set(rs: RecordSet | Iterable[CitationRecord], rule: CountingRule = CountingRule(),
              score_field=ScoreField.TIMES_CITED) -> list[ScoredRecord]:
    """Score every record; output ordered by stratum key, then record id."""
    scored = []
    for stratum in stratify(rs):
        scored.extend(sorted(score_stratum(stratum, rule, score_field), key=lambda s: s.record_id))
    return scored


# --- scored-record CSV -------------------------------------------------------

def format_quantile(q: Fraction) -> str:
    scaled = round(Fraction(q) * 10000)
    return f"{scaled // 10000}.{scaled % 10000:04d}"


def write_scored(scored: Sequence[ScoredRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORED_FIELDS)
        for s in scored:
            writer.writerow([s.record_id, s.pub_year, str(s.doc_type), format_quantile(s.quantile),
                             s.pr6_class, s.times_cited, repr(float(s.citation_score))])


def read_scored(path) -> list[ScoredRecord]:
    path = Path(path)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyFile(f"{path}: no header line")
        for name in SCORED_FIELDS:
            if name not in reader.fieldnames:
                raise MissingHeaderTag(name)
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                q = Fraction(row["quantile"])
                out.append(ScoredRecord(row["record_id"], int(row["pub_year"]),
                                        normalize_doc_type(row["doc_type"]), q, int(row["pr6_class"]),
                                        int(row["times_cited"]), float(row["citation_score"])))
            except (ValueError, ZeroDivisionError) as exc:
                raise MalformedRow(lineno, str(exc)) from None
    return out
