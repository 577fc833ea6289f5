"""Delimited report files: indicator report, rank table, z-tests, RI3R, graph edges."""

from __future__ import annotations

import csv
from typing import Optional, Sequence

from ..inference import ComparisonGraph, FlaggedResult, Expectation, flag_for

INDICATOR_FIELDS = ("unit", "n_papers", "citations", "c_per_p", "i3", "i3_pct", "expected_i3",
                    "pr6", "pr6_pct", "mean_quantile", "ri3r_z", "i3_flag", "pr6_flag")
RANK_FIELDS = ("rank", "unit", "n_papers", "citations", "c_per_p", "i3", "i3_pct", "pr6_pct")


def fmt_count(x: float) -> str:
    """Whole counts print as integers, fractional counts with two decimals."""
    return str(int(round(x))) if abs(x - round(x)) < 1e-9 else f"{x:.2f}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_indicators(flagged: Sequence[FlaggedResult], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(INDICATOR_FIELDS)
        for f in flagged:
            r = f.result
            w.writerow([
                r.unit_id, fmt_count(r.n_papers), fmt_count(r.sum_citations), f"{r.mean_citations:.2f}",
                f"{r.i3:.2f}", f"{100 * r.i3_share:.4f}", f"{r.expected_i3:.2f}",
                f"{r.pr6:.2f}", f"{100 * r.pr6_share:.4f}", f"{r.mean_quantile:.4f}",
                "" if r.ri3r_z is None else f"{r.ri3r_z:.3f}",
                str(f.i3_test.flag), str(f.pr6_test.flag),
            ])


def _ranks(rows: Sequence[FlaggedResult], key) -> dict[str, int]:
    ordered = sorted(rows, key=lambda f: (-key(f), f.unit_id))
    return {f.unit_id: i for i, f in enumerate(ordered, start=1)}


def _with_flag(text: str, flag) -> str:
    return f"{text} {flag}" if str(flag) else text


def rank_rows(flagged: Sequence[FlaggedResult], top_k: int = 0) -> list[list[str]]:
    """Rows sorted by I3 share, with bracketed within-table ranks per column."""
    rows = sorted(flagged, key=lambda f: (-f.result.i3_exact, f.unit_id))
    if top_k:
        rows = rows[:top_k]
    by_n = _ranks(rows, lambda f: f.result.n_exact)
    by_i3 = _ranks(rows, lambda f: f.result.i3_exact)
    by_pr6 = _ranks(rows, lambda f: f.result.pr6_exact)
    out = []
    for pos, f in enumerate(rows, start=1):
        r, uid = f.result, f.unit_id
        out.append([
            str(pos), uid,
            f"{fmt_count(r.n_papers)} [{by_n[uid]}]",
            fmt_count(r.sum_citations),
            f"{r.mean_citations:.2f}",
            f"{r.i3:.0f}",
            _with_flag(f"{100 * r.i3_share:.2f} [{by_i3[uid]}]", f.i3_test.flag),
            _with_flag(f"{100 * r.pr6_share:.2f} [{by_pr6[uid]}]", f.pr6_test.flag),
        ])
    return out


def emit_rank_table(flagged: Sequence[FlaggedResult], path, top_k: int = 0) -> int:
    rows = rank_rows(flagged, top_k)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(RANK_FIELDS)
        w.writerows(rows)
    return len(rows)


def emit_ztest(flagged: Sequence[FlaggedResult], path, expect=Expectation.I3_POINTS,
               n_total: Optional[int] = None) -> None:
    """unit,observed,expected,z,flag for the I3 test of every unit."""
    expect = Expectation(expect)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["unit", "observed", "expected", "z", "flag"])
        for f in flagged:
            r = f.result
            if expect is Expectation.I3_POINTS:
                observed, expected = f"{r.i3:.0f}", f"{r.expected_i3:.0f}"
            else:
                if not n_total:
                    raise ValueError("share mode needs the reference size")
                observed, expected = f"{100 * r.i3_share:.2f}", f"{100 * r.n_papers / n_total:.2f}"
            w.writerow([r.unit_id, observed, expected, f"{f.i3_test.z:.3f}", str(f.i3_test.flag)])


def emit_ri3r(flagged: Sequence[FlaggedResult], reference_mean: float, path) -> None:
    """Per-paper impact against the reference mean; units below the minimum size are omitted."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["unit", "n_papers", "mean_quantile", "reference_mean", "z", "flag"])
        for f in flagged:
            r = f.result
            if r.ri3r_z is None:
                continue
            w.writerow([r.unit_id, fmt_count(r.n_papers), f"{r.mean_quantile:.4f}",
                        f"{reference_mean:.4f}", f"{r.ri3r_z:.3f}", str(flag_for(r.ri3r_z))])


def emit_edges(graph: ComparisonGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["unit_a", "unit_b", "p"])
        for (a, b), p in sorted(graph.edges.items()):
            w.writerow([a, b, f"{p:.6g}"])


def emit_cores(graph: ComparisonGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["unit", "core", "degree"])
        for v in graph.nodes:
            w.writerow([v, graph.core_number.get(v, 0), len(graph.neighbours(v))])
