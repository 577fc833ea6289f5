from fractions import Fraction
from importlib import resources
from pathlib import Path

import pytest

from i3kit.quantiles import ScoredRecord, pr6_class
from i3kit.records import CitationRecord

DATA = Path(str(resources.files("i3kit") / "data"))
HEADER = "PT\tAU\tTI\tSO\tDT\tC1\tNR\tTC\tPY\tUT"


def rec(rid, tc=0, year=2008, doc_type="Article", journal="J", addresses=(), authors=(), n_refs=0, score=None):
    return CitationRecord(rid, journal, year, doc_type, tc, float(tc if score is None else score),
                          tuple(addresses), tuple(authors), n_refs)


def scored(rid, q, tc=0, year=2008, doc_type="Article"):
    q = Fraction(q)
    return ScoredRecord(rid, year, doc_type, q, pr6_class(q), tc, float(tc))


def write_export(path, rows, header=HEADER):
    path.write_text(header + "\n" + "".join("\t".join(r) + "\n" for r in rows), encoding="utf-8")
    return path


@pytest.fixture
def data_dir():
    return DATA
