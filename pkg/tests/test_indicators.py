import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import scored
from i3kit.errors import EmptyReference, ZeroVariance
from i3kit.indicators import (
    Pr6Mode,
    ReferenceStats,
    WeightedRecord,
    expected_i3,
    expected_i3_from_totals,
    i3,
    indicator_report,
    n_papers,
    overlap_multiplicity,
    pr6,
    pr6_contributions,
    ri3r,
)
from i3kit.quantiles import score_set
from conftest import rec


def test_i3_empty_and_constant():
    assert i3([]) == 0
    assert i3([scored(f"r{i}", 37) for i in range(6)]) == 6 * 37


def test_i3_whole_distinct_stratum():
    n = 41
    ref = score_set([rec(f"r{i}", tc=i) for i in range(n)])
    assert i3(ref) == 50 * (n - 1)


def test_expected_i3_from_published_totals():
    assert abs(float(expected_i3_from_totals(1_469_253, 1_507, 31_644)) - 69_971) <= 1


def test_expected_i3_identity_and_half():
    ref = [scored(f"r{i}", q) for i, q in enumerate([10, 20, 30, 40])]
    assert expected_i3(ref, ref) == i3(ref)
    uniform = [scored(f"u{i}", 50) for i in range(10)]
    assert expected_i3(uniform[:5], uniform) == i3(uniform) / 2


def test_expected_i3_empty_reference():
    with pytest.raises(EmptyReference):
        expected_i3([], [])


def superset(n_total=248):
    # one record per count, so only the top paper reaches the top-1% class
    return score_set([rec(f"r{i:03d}", tc=i) for i in range(n_total)])


def test_pr6_contributions_worked_example():
    ref = superset()
    top = max(ref, key=lambda s: s.quantile)
    assert top.pr6_class == 6
    others = [s for s in ref if s.pr6_class == 1]
    unit23 = [top] + others[:22]
    unit65 = [top] + others[:64]
    assert round(float(pr6_contributions(unit23, Pr6Mode.UNIT_SHARE)[0]), 3) == 0.261
    assert round(float(pr6_contributions(unit65, Pr6Mode.UNIT_SHARE)[0]), 3) == 0.092
    assert round(float(pr6_contributions(unit65, Pr6Mode.SUPERSET_SHARE, len(ref))[0]), 3) == 0.024
    assert pr6_contributions([top], Pr6Mode.CLASS_SUM) == [6]


def test_superset_share_needs_reference():
    with pytest.raises(EmptyReference):
        pr6([scored("a", 99)], Pr6Mode.SUPERSET_SHARE)


def test_ri3r_examples():
    ref = [scored(f"r{k}", 10 * k) for k in range(10)]
    stats = ReferenceStats.of(ref)
    assert stats.mean_quantile == 45
    assert stats.sd_quantile == pytest.approx(28.7228, abs=1e-4)
    unit = [scored(f"u{i}", q) for i, q in enumerate([70, 80, 90, 60, 50])]
    assert ri3r(unit, ref) == pytest.approx(1.946, abs=5e-4)
    assert ri3r(unit[:4], ref) is None
    centred = [scored(f"c{i}", q) for i, q in enumerate([40, 50, 45, 30, 60])]
    assert ri3r(centred, stats) == 0


def test_ri3r_zero_variance():
    ref = [scored(f"r{k}", 20) for k in range(6)]
    with pytest.raises(ZeroVariance):
        ri3r(ref, ref)


def test_ri3r_uses_weighted_size():
    ref = [scored(f"r{k}", 10 * k) for k in range(10)]
    halves = [WeightedRecord(scored(f"u{i}", 90), Fraction(1, 2)) for i in range(9)]
    assert n_papers(halves) == Fraction(9, 2)
    assert ri3r(halves, ref) is None
    assert ri3r(halves + [WeightedRecord(scored("x", 90), Fraction(1, 2))], ref) > 0


def test_report_three_units():
    a = [scored("a1", 90), scored("a2", 80)]
    b = [scored("b1", 50)]
    c = [scored("c1", 10), scored("c2", 5), scored("c3", 0)]
    ref = a + b + c
    report = indicator_report({"C": c, "A": a, "B": b}, ref)
    assert [r.unit_id for r in report] == ["A", "B", "C"]
    assert [r.i3 for r in report] == [170, 50, 15]
    assert [r.i3_exact / i3(ref) for r in report] == [Fraction(170, 235), Fraction(50, 235), Fraction(15, 235)]
    assert math.fsum(r.i3_share for r in report) == pytest.approx(1, abs=1e-12)
    assert report[0].mean_quantile == 85
    assert report[1].ri3r_z is None


def test_report_ties_break_by_name():
    ref = [scored("x", 40), scored("y", 40)]
    assert [r.unit_id for r in indicator_report({"zeta": [ref[0]], "alpha": [ref[1]]}, ref)] == ["alpha", "zeta"]


def test_report_citations_use_times_cited():
    ref = [scored("x", 40, tc=3), scored("y", 60, tc=9)]
    r = indicator_report({"u": ref}, ref)[0]
    assert (r.sum_citations, r.mean_citations) == (12, 6)


def test_overlap_multiplicity():
    ref = [scored(f"r{i}", i) for i in range(4)]
    assert overlap_multiplicity({"a": ref[:2], "b": ref[2:]}, ref) == 1
    assert overlap_multiplicity({"a": ref, "b": ref[:2]}, ref) == 1.5


ref_st = st.lists(st.integers(0, 1000), min_size=2, max_size=60).map(
    lambda qs: [scored(f"r{i:03d}", Fraction(q, 10)) for i, q in enumerate(qs)])


@settings(max_examples=60)
@given(ref_st, st.data())
def test_partition_additivity(ref, data):
    labels = data.draw(st.lists(st.integers(0, 4), min_size=len(ref), max_size=len(ref)))
    units = {}
    for s, lab in zip(ref, labels):
        units.setdefault(f"u{lab}", []).append(s)
    assert sum(i3(u) for u in units.values()) == i3(ref)
    for mode in Pr6Mode:
        if mode is not Pr6Mode.UNIT_SHARE:
            assert sum(pr6(u, mode, ref) for u in units.values()) == pr6(ref, mode, ref)
    report = indicator_report(units, ref)
    if i3(ref):
        assert math.fsum(r.i3_share for r in report) == pytest.approx(1, abs=1e-9)
    assert math.fsum(r.pr6_share for r in report) == pytest.approx(1, abs=1e-9)


@given(ref_st, st.integers(1, 1000))
def test_adding_a_cited_paper_raises_i3_and_share(ref, q):
    unit = ref[: len(ref) // 2]
    extra = scored("new", Fraction(q, 10))
    bigger_ref = ref + [extra]
    assert i3(unit + [extra]) > i3(unit)
    before = i3(unit) / i3(bigger_ref)
    after = i3(unit + [extra]) / i3(bigger_ref)
    assert after > before


@given(ref_st)
def test_ri3r_sign(ref):
    stats = ReferenceStats.of(ref)
    unit = ref[:5] if len(ref) >= 5 else ref
    if stats.sd_quantile == 0 or len(unit) < 5:
        return
    z = ri3r(unit, stats)
    diff = i3(unit) / len(unit) - stats.mean_quantile
    assert (z > 0) == (diff > 0) and (z < 0) == (diff < 0)


@given(st.integers(0, 10**6), st.integers(0, 500), st.integers(1, 500))
def test_expected_i3_linear(total, n_unit, n_total):
    e1 = expected_i3_from_totals(Fraction(total), n_unit, n_total)
    e2 = expected_i3_from_totals(Fraction(total), 2 * n_unit, n_total)
    assert e2 == 2 * e1
