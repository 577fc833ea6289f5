"""Mapping records to evaluation units (journal, country, city, institute, author)."""

from __future__ import annotations

import csv
import re
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .errors import MissingHeaderTag, UnparseableAddress
from .indicators import WeightedRecord
from .quantiles import ScoredRecord
from .records import CitationRecord

# "USA", "MA USA", "MA 02139 USA", "CA 94720-1460 USA"
_USA = re.compile(r"(?:[A-Z]{2}\s+)?(?:\d{5}(?:-\d{4})?\s+)?USA")
_STATE_ZIP = re.compile(r"[A-Z]{2}(?:\s+\d{5}(?:-\d{4})?)?|\d{5}(?:-\d{4})?")


class UnitKind(str, Enum):
    JOURNAL = "journal"
    COUNTRY = "country"
    CITY = "city"
    INSTITUTE = "institute"
    AUTHOR = "author"


class Counting(str, Enum):
    INTEGER = "integer"
    FRACTIONAL = "fractional"


@dataclass(frozen=True)
class ParsedAddress:
    institute: str
    city: str
    country: str
    raw: str
    degraded: bool = False  # city could not be determined

    @property
    def city_key(self) -> str:
        return f"{self.city}, {self.country}"

    @property
    def institute_key(self) -> str:
        return f"{self.institute}, {self.city}, {self.country}"


@dataclass(frozen=True)
class UnitAssignment:
    record_id: str
    unit_kind: UnitKind
    unit_key: str
    weight: Fraction


@dataclass(frozen=True)
class Skip:
    record_id: str
    unit_kind: UnitKind
    reason: str


def _strip_postal(segment: str) -> str:
    kept, prev = [], ""
    for tok in segment.split():
        # Dutch codes are "1012 WX": the letter pair rides on the digits before it
        dutch_tail = len(prev) == 4 and prev.isdigit() and len(tok) == 2 and tok.isalpha() and tok.isupper()
        if not any(ch.isdigit() for ch in tok) and not dutch_tail:
            kept.append(tok)
        prev = tok
    return " ".join(kept)


def parse_address(raw: str) -> ParsedAddress:
    """Split a raw address into institute, city and country.

    The institute is the first comma-separated segment, the country the
    last.  US addresses end in "[ST] [ZIP] USA"; elsewhere the city is the
    second-to-last segment with postal-code tokens removed.
    """
    segments = [s.strip() for s in raw.split(",")]
    segments = [s for s in segments if s]
    if len(segments) < 2:
        raise UnparseableAddress(raw)
    country = segments[-1].rstrip(". ").strip()
    institute = segments[0]
    if _USA.fullmatch(country):
        country = "USA"
        # some exports put the state and ZIP in segments of their own
        i = len(segments) - 2
        while i > 1 and _STATE_ZIP.fullmatch(segments[i]):
            i -= 1
        city = segments[i]
    else:
        city = _strip_postal(segments[-2])
    if not country:
        raise UnparseableAddress(raw)
    if len(segments) == 2 or not city:
        return ParsedAddress(institute, "", country, raw, degraded=True)
    return ParsedAddress(institute, city, country, raw)


def read_aliases(path) -> dict[str, str]:
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"from_key", "to_key"} <= set(reader.fieldnames):
            raise MissingHeaderTag("from_key,to_key")
        return {row["from_key"].strip(): row["to_key"].strip() for row in reader}


def _address_keys(rec: CitationRecord, kind: UnitKind, aliases: Mapping[str, str]) -> tuple[list[str], Optional[str]]:
    keys, problems = [], []
    for raw in rec.addresses:
        try:
            addr = parse_address(raw)
        except UnparseableAddress:
            problems.append("unparseable address")
            continue
        country = aliases.get(addr.country, addr.country)
        if kind is UnitKind.COUNTRY:
            key = country
        elif addr.degraded:
            problems.append("address without city")
            continue
        elif kind is UnitKind.CITY:
            key = f"{addr.city}, {country}"
        else:
            key = f"{addr.institute}, {addr.city}, {country}"
        keys.append(aliases.get(key, key))
    if keys:
        return keys, None
    if not rec.addresses:
        return [], "no address"
    return [], problems[0]


def assign_units(records: Iterable[CitationRecord], kind, counting=Counting.INTEGER,
                 aliases: Optional[Mapping[str, str]] = None) -> tuple[list[UnitAssignment], list[Skip]]:
    """Credit each record to its units; records without usable keys are skipped.

    Integer counting gives every distinct unit on a record weight 1.
    Fractional counting splits one point evenly across the record's
    addresses (or authors) and sums the pieces landing on the same unit.
    """
    kind, counting = UnitKind(kind), Counting(counting)
    aliases = aliases or {}
    assignments, skipped = [], []
    for rec in records:
        if kind is UnitKind.JOURNAL:
            keys, reason = [aliases.get(rec.journal, rec.journal)], None
        elif kind is UnitKind.AUTHOR:
            keys = [aliases.get(a.upper(), a.upper()) for a in rec.authors]
            reason = None if keys else "no author"
        else:
            keys, reason = _address_keys(rec, kind, aliases)
        if reason:
            skipped.append(Skip(rec.record_id, kind, reason))
            continue
        weights = defaultdict(Fraction)
        for key in keys:
            if counting is Counting.INTEGER:
                weights[key] = Fraction(1)
            else:
                weights[key] += Fraction(1, len(keys))
        for key in sorted(weights):
            assignments.append(UnitAssignment(rec.record_id, kind, key, weights[key]))
    return assignments, skipped


def unit_subsets(assignments: Iterable[UnitAssignment],
                 scored: Sequence[ScoredRecord]) -> dict[str, list[WeightedRecord]]:
    """Group scored records by unit key, carrying assignment weights."""
    by_id = {s.record_id: s for s in scored}
    groups = defaultdict(list)
    kinds = set()
    for a in assignments:
        kinds.add(a.unit_kind)
        groups[a.unit_key].append(WeightedRecord(by_id[a.record_id], a.weight))
    if len(kinds) > 1:
        raise ValueError("assignments mix several unit kinds")
    return {key: groups[key] for key in sorted(groups)}


def write_skips(skipped: Sequence[Skip], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["record_id", "unit_kind", "reason"])
        for s in skipped:
            writer.writerow([s.record_id, s.unit_kind.value, s.reason])
