"""Loading bibliographic exports into citation records.

The only supported input flavour is the tab-delimited export with a header
row of two-letter field tags (one record per line).  Records can be written
to and read back from a canonical CSV form, and citation scores can be
replaced by fractional (1/NRef) weights from a citing-link file.
"""

from __future__ import annotations

import csv
import hashlib
import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    DuplicateRecordId,
    EmptyFile,
    MalformedRow,
    MissingHeaderTag,
    UnknownRecordId,
    ZeroNRefs,
)

REQUIRED_TAGS = ("SO", "PY", "DT", "TC", "NR", "C1", "AU")
CANONICAL_FIELDS = (
    "record_id",
    "journal",
    "pub_year",
    "doc_type",
    "times_cited",
    "citation_score",
    "n_refs",
    "addresses",
    "authors",
)
MIN_YEAR, MAX_YEAR = 1900, 2100


class DocType(str, Enum):
    ARTICLE = "Article"
    REVIEW = "Review"
    PROCEEDINGS_PAPER = "Proceedings Paper"
    LETTER = "Letter"

    def __str__(self):
        return self.value


CITABLE = frozenset(d.value for d in DocType)

_DOC_TYPES = {d.value.lower(): d.value for d in DocType}
_DOC_TYPES["proceedingspaper"] = DocType.PROCEEDINGS_PAPER.value


def normalize_doc_type(raw: str) -> str:
    """Map a DT value to its canonical `DocType` label, or return it stripped.

    Unknown types (editorials, corrections, ...) keep their own label so
    they still form strata of their own when not filtered out.
    """
    text = raw.strip()
    return _DOC_TYPES.get(text.lower(), text)


@dataclass(frozen=True)
class CitationRecord:
    record_id: str
    journal: str
    pub_year: int
    doc_type: str
    times_cited: int
    citation_score: float
    addresses: tuple[str, ...] = ()
    authors: tuple[str, ...] = ()
    n_refs: int = 0

    def __post_init__(self):
        if self.times_cited < 0:
            raise ValueError(f"{self.record_id}: times_cited must be >= 0")
        if self.n_refs < 0:
            raise ValueError(f"{self.record_id}: n_refs must be >= 0")
        if not MIN_YEAR <= self.pub_year <= MAX_YEAR:
            raise ValueError(f"{self.record_id}: pub_year {self.pub_year} out of range")
        if not self.citation_score >= 0:
            raise ValueError(f"{self.record_id}: citation_score must be >= 0")


@dataclass(frozen=True)
class RecordSet:
    records: tuple[CitationRecord, ...]
    provenance: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        seen = set()
        for rec in self.records:
            if rec.record_id in seen:
                raise DuplicateRecordId(rec.record_id)
            seen.add(rec.record_id)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def doc_type_counts(self) -> Counter:
        return Counter(rec.doc_type for rec in self.records)

    def by_id(self) -> dict[str, CitationRecord]:
        return {rec.record_id: rec for rec in self.records}

    def merged(self, other: "RecordSet") -> "RecordSet":
        return RecordSet(self.records + other.records, self.provenance + other.provenance)


@dataclass(frozen=True)
class CitationLink:
    cited_record_id: str
    citing_n_refs: int


# --- parsing -----------------------------------------------------------------

_AUTHOR_GROUP = re.compile(r"\[[^\]]*\]\s*")


def split_addresses(c1: str) -> tuple[str, ...]:
    """Split a C1 field into raw address strings.

    Bracketed author groups ("[Smith, J; Doe, K] ...") are removed first
    because they contain the same "; " separator.
    """
    text = _AUTHOR_GROUP.sub("", c1)
    return tuple(a.strip() for a in text.split("; ") if a.strip())


def split_authors(au: str) -> tuple[str, ...]:
    return tuple(a.strip() for a in au.split(";") if a.strip())


def synthesize_id(journal: str, year: str, title_or_row: str) -> str:
    digest = hashlib.sha1(f"{journal}\x1f{year}\x1f{title_or_row}".encode("utf-8"))
    return "H" + digest.hexdigest()[:16]


def _parse_int(value: str, tag: str, lineno: int) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise MalformedRow(lineno, f"{tag} is not an integer: {value!r}") from None


def _read_lines(path: Path) -> list[str]:
    # utf-8-sig swallows a leading BOM; only LF / CRLF end a record
    text = Path(path).read_text(encoding="utf-8-sig")
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in text.split("\n")]
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def parse_export(path, format: str = "tab") -> RecordSet:
    """Parse a tab-delimited export with a header row of field tags."""
    if format not in ("tab", "TabDelimitedWithHeader"):
        raise ValueError(f"unsupported export format {format!r}")
    path = Path(path)
    lines = _read_lines(path)
    if not lines or not lines[0].strip():
        raise EmptyFile(f"{path}: no header line")

    header = [tag.strip() for tag in lines[0].split("\t")]
    for tag in REQUIRED_TAGS:
        if tag not in header:
            raise MissingHeaderTag(tag)
    col = {tag: i for i, tag in enumerate(header) if tag}

    records = []
    seen_ids = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) > len(header):
            if any(c.strip() for c in cells[len(header):]):
                raise MalformedRow(lineno, f"{len(cells)} fields for {len(header)} header tags")
            cells = cells[: len(header)]
        cells += [""] * (len(header) - len(cells))

        def get(tag):
            i = col.get(tag)
            return cells[i].strip() if i is not None else ""

        tc = get("TC")
        if not tc:
            raise MalformedRow(lineno, "missing TC (times cited)")
        times_cited = _parse_int(tc, "TC", lineno)
        if times_cited < 0:
            raise MalformedRow(lineno, "negative TC")
        py = get("PY")
        if not py:
            raise MalformedRow(lineno, "missing PY (publication year)")
        year = _parse_int(py, "PY", lineno)
        if not MIN_YEAR <= year <= MAX_YEAR:
            raise MalformedRow(lineno, f"PY {year} outside [{MIN_YEAR}, {MAX_YEAR}]")
        nr = get("NR")
        n_refs = _parse_int(nr, "NR", lineno) if nr else 0
        if n_refs < 0:
            raise MalformedRow(lineno, "negative NR")

        journal = get("SO")
        record_id = get("UT")
        if not record_id:
            record_id = synthesize_id(journal, py, get("TI") or f"row{lineno}")
            if record_id in seen_ids:
                record_id = synthesize_id(journal, py, f"{get('TI')}#row{lineno}")
        if record_id in seen_ids:
            raise MalformedRow(lineno, f"duplicate record id {record_id!r}")
        seen_ids.add(record_id)

        records.append(
            CitationRecord(
                record_id=record_id,
                journal=journal,
                pub_year=year,
                doc_type=normalize_doc_type(get("DT")),
                times_cited=times_cited,
                citation_score=float(times_cited),
                addresses=split_addresses(get("C1")),
                authors=split_authors(get("AU")),
                n_refs=n_refs,
            )
        )
    return RecordSet(records, (f"export:{path.name}",))


def filter_citable(rs: RecordSet, allowed: Iterable[str] = CITABLE) -> RecordSet:
    allowed = frozenset(normalize_doc_type(getattr(a, "value", a)) for a in allowed)
    if not allowed:
        raise ValueError("allowed document types must not be empty")
    kept = [rec for rec in rs.records if rec.doc_type in allowed]
    label = ",".join(sorted(str(a) for a in allowed))
    return RecordSet(kept, rs.provenance + (f"filter:doc_type in {{{label}}}",))


def filter_journals(rs: RecordSet, journals: Iterable[str]) -> RecordSet:
    """Restrict a set to an explicit list of journal titles (case-insensitive)."""
    wanted = {j.strip().lower() for j in journals if j.strip()}
    kept = [rec for rec in rs.records if rec.journal.lower() in wanted]
    return RecordSet(kept, rs.provenance + (f"filter:journal list ({len(wanted)} titles)",))


def apply_fractional_weights(rs: RecordSet, links: Sequence[CitationLink]) -> RecordSet:
    """Replace each record's citation score by the sum of 1/NRef over its citing papers."""
    ids = {rec.record_id for rec in rs.records}
    terms = defaultdict(list)
    for link in links:
        if link.cited_record_id not in ids:
            raise UnknownRecordId(link.cited_record_id)
        if link.citing_n_refs <= 0:
            raise ZeroNRefs(link)
        terms[link.cited_record_id].append(1.0 / link.citing_n_refs)
    # fsum is correctly rounded, so the result does not depend on link order
    weighted = [
        replace(rec, citation_score=math.fsum(terms.get(rec.record_id, ())))
        for rec in rs.records
    ]
    return RecordSet(weighted, rs.provenance + (f"fractional:{len(links)} links",))


def read_links(path) -> list[CitationLink]:
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"cited_id", "citing_nrefs"} <= set(reader.fieldnames):
            raise MissingHeaderTag("cited_id,citing_nrefs")
        links = []
        for lineno, row in enumerate(reader, start=2):
            try:
                n = int(row["citing_nrefs"])
            except (TypeError, ValueError):
                raise MalformedRow(lineno, f"citing_nrefs not an integer: {row['citing_nrefs']!r}") from None
            links.append(CitationLink(row["cited_id"].strip(), n))
    return links


# --- canonical CSV -----------------------------------------------------------

def write_records(rs: RecordSet, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CANONICAL_FIELDS)
        for rec in rs.records:
            writer.writerow([
                rec.record_id,
                rec.journal,
                rec.pub_year,
                str(rec.doc_type),
                rec.times_cited,
                repr(float(rec.citation_score)),
                rec.n_refs,
                "|".join(rec.addresses),
                "|".join(rec.authors),
            ])


def read_records(path) -> RecordSet:
    path = Path(path)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyFile(f"{path}: no header line")
        for name in CANONICAL_FIELDS:
            if name not in reader.fieldnames:
                raise MissingHeaderTag(name)
        records = []
        for lineno, row in enumerate(reader, start=2):
            try:
                records.append(
                    CitationRecord(
                        record_id=row["record_id"],
                        journal=row["journal"],
                        pub_year=int(row["pub_year"]),
                        doc_type=normalize_doc_type(row["doc_type"]),
                        times_cited=int(row["times_cited"]),
                        citation_score=float(row["citation_score"]),
                        n_refs=int(row["n_refs"]),
                        addresses=tuple(a for a in row["addresses"].split("|") if a),
                        authors=tuple(a for a in row["authors"].split("|") if a),
                    )
                )
            except ValueError as exc:
                raise MalformedRow(lineno, str(exc)) from None
    return RecordSet(records, (f"records:{path.name}",))
