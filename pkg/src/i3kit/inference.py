"""Significance tests, homogeneity graphs and k-cores."""

from __future__ import annotations

import heapq
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .indicators import IndicatorResult, ReferenceStats

log = logging.getLogger(__name__)

Z_05 = 1.96
Z_01 = 2.576
SHARE_BASE = 1000  # shares are compared as permillages
EXACT_MAX_SMALL = 8
LARGE_COMPARISON = 50


class Flag(str, Enum):
    ABOVE_P01 = "++"
    ABOVE_P05 = "+"
    NOT_SIGNIFICANT = ""
    BELOW_P05 = "-"
    BELOW_P01 = "--"

    def __str__(self):
        return self.value

    @property
    def above(self) -> bool:
        return self in (Flag.ABOVE_P01, Flag.ABOVE_P05)

    @property
    def below(self) -> bool:
        return self in (Flag.BELOW_P01, Flag.BELOW_P05)


class Expectation(str, Enum):
    I3_POINTS = "i3points"
    SHARES = "shares"


def flag_for(z: float) -> Flag:
    if z >= Z_01:
        return Flag.ABOVE_P01
    if z >= Z_05:
        return Flag.ABOVE_P05
    if z <= -Z_01:
        return Flag.BELOW_P01
    if z <= -Z_05:
        return Flag.BELOW_P05
    return Flag.NOT_SIGNIFICANT


def ztest_two_proportions(x1, n1, x2, n2) -> float:
    """Pooled two-proportion z statistic, no continuity correction.

    A degenerate pool (no successes or no failures at all) gives 0.
    """
    if not (n1 > 0 and n2 > 0):
        raise ValueError("totals must be positive")
    if not (0 <= x1 <= n1 and 0 <= x2 <= n2):
        raise ValueError("counts must lie within their totals")
    pooled = (x1 + x2) / (n1 + n2)
    if pooled <= 0 or pooled >= 1:
        return 0.0
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    return (x1 / n1 - x2 / n2) / se


def degenerate_pool(x1, n1, x2, n2) -> bool:
    pooled = (x1 + x2) / (n1 + n2)
    return pooled <= 0 or pooled >= 1


class UnitTest(NamedTuple):
    z: float
    flag: Flag
    degenerate: bool = False


def flag_unit(observed_metric, observed_total, n_unit, n_total) -> UnitTest:
    """Test a unit's indicator points against its publication rate.

    Indicator points are rounded to whole numbers and treated as successes
    out of the rounded reference total.
    """
    if observed_total <= 0 or n_total <= 0:
        raise ValueError("totals must be positive")
    x1, n1 = round(observed_metric), round(observed_total)
    x2, n2 = float(n_unit), float(n_total)
    z = ztest_two_proportions(x1, n1, x2, n2)
    return UnitTest(z, flag_for(z), degenerate_pool(x1, n1, x2, n2))


def flag_shares(metric_share, pub_share, base: int = SHARE_BASE) -> UnitTest:
    """Test an indicator share against a publication share, both on `base` units."""
    x1, x2 = float(metric_share) * base, float(pub_share) * base
    z = ztest_two_proportions(x1, base, x2, base)
    return UnitTest(z, flag_for(z), degenerate_pool(x1, base, x2, base))


def bonferroni_alpha(alpha: float, n_units: int) -> float:
    if n_units < 2:
        raise ValueError("need at least two units for pairwise comparison")
    return alpha / (n_units * (n_units - 1) / 2)


# --- Mann-Whitney --------------------------------------------------------------

class MannWhitney(NamedTuple):
    u: float
    p: float
    exact: bool


def _tie_groups(values: np.ndarray):
    """Sorted distinct values with counts and doubled midranks."""
    uniq, counts = np.unique(values, return_counts=True)
    ends = np.cumsum(counts)
    starts = ends - counts + 1
    return uniq, counts, starts + ends  # starts+ends = 2 * midrank


def _exact_null(counts: np.ndarray, doubled: np.ndarray, m: int) -> np.ndarray:
    """Null frequency of twice the rank sum of an m-subset, given tie groups.

    dist[s] is the number of labelings whose chosen m items have doubled
    rank sum s.
    """
    size = int(doubled.max()) * m + 1 if m else 1
    dp = np.zeros((m + 1, size))
    dp[0, 0] = 1.0
    reach = 0
    for t, d in zip(counts.tolist(), doubled.tolist()):
        new = dp.copy()
        top = min(t, m)
        hi = min(size, reach + top * d + 1)
        for j in range(1, top + 1):
            shift = j * d
            width = min(reach + 1, hi - shift)
            if width <= 0:
                continue
            new[j:, shift:shift + width] += math.comb(t, j) * dp[: m + 1 - j, :width]
        dp = new
        reach = hi - 1
    return dp[m]


def _exact_null_no_ties(m: int, n: int) -> np.ndarray:
    """Null frequency of U for samples of m and n distinct values.

    Coefficients of the Gaussian binomial prod_{i=1..m} (1 - q^(n+i)) / (1 - q^i).
    """
    poly = np.zeros(m * n + 1)
    poly[0] = 1.0
    for i in range(1, m + 1):
        shifted = np.zeros_like(poly)
        shifted[n + i:] = poly[: len(poly) - n - i]
        poly = poly - shifted
        for r in range(i):   # divide by (1 - q^i): running sums with stride i
            poly[r::i] = np.cumsum(poly[r::i])
    return poly


def mann_whitney(sample_a: Sequence[float], sample_b: Sequence[float], method: str = "auto") -> MannWhitney:
    """Two-sided Mann-Whitney U test; U is reported for `sample_a`.

    Midranks handle ties.  When the smaller sample has at most eight
    values the p-value is exact over all labelings of the pooled data;
    otherwise the normal approximation with tie-corrected variance and a
    continuity correction is used.  `method` ("exact" or "normal") forces
    one route.
    """
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown method {method!r}")
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    na, nb = len(a), len(b)
    if na == 0 or nb == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    uniq, counts, doubled = _tie_groups(pooled)
    rank2 = doubled[np.searchsorted(uniq, a)]
    u2 = int(rank2.sum()) - na * (na + 1)          # 2 * U_a
    u = u2 / 2
    n = na + nb

    use_exact = min(na, nb) <= EXACT_MAX_SMALL if method == "auto" else method == "exact"
    if use_exact:
        m = min(na, nb)
        if counts.max() == 1:
            dist = _exact_null_no_ties(m, n - m)
            u2_all = 2 * np.arange(len(dist))
        else:
            dist = _exact_null(counts, doubled, m)
            u2_all = np.arange(len(dist)) - m * (m + 1)
        dev = np.abs(u2_all - na * nb)
        obs = abs(u2 - na * nb)
        total = dist.sum()
        p = float(dist[dev >= obs].sum() / total)
        return MannWhitney(u, min(1.0, p), True)

    ties = float(np.sum(counts.astype(float) ** 3 - counts))
    var = na * nb / 12.0 * ((n + 1) - ties / (n * (n - 1)))
    if var <= 0:
        return MannWhitney(u, 1.0, False)
    # 0.5 continuity correction keeps n=8 within 0.011 of the exact p (tie-free)
    z = max(abs(u - na * nb / 2.0) - 0.5, 0.0) / math.sqrt(var)
    return MannWhitney(u, min(1.0, math.erfc(z / math.sqrt(2))), False)


# --- graphs --------------------------------------------------------------------

def core_numbers(nodes: Sequence[str], edges) -> dict[str, int]:
    """Core number of every node by repeated removal of a minimum-degree node."""
    adj = {v: set() for v in nodes}
    for a, b in edges:
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    degree = {v: len(adj[v]) for v in adj}
    heap = [(d, v) for v, d in degree.items()]
    heapq.heapify(heap)
    removed, core, k = set(), {}, 0
    while heap:
        d, v = heapq.heappop(heap)
        if v in removed or d != degree[v]:
            continue
        k = max(k, d)
        core[v] = k
        removed.add(v)
        for w in adj[v]:
            if w not in removed:
                degree[w] -= 1
                heapq.heappush(heap, (degree[w], w))
    return core


@dataclass
class ComparisonGraph:
    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], float]
    alpha_family: float
    core_number: dict[str, int] = field(default_factory=dict)
    pvalues: dict[tuple[str, str], float] = field(default_factory=dict)

    def neighbours(self, node: str) -> set[str]:
        return {b if a == node else a for a, b in self.edges if node in (a, b)}

    def core(self, k: int) -> list[str]:
        return [v for v in self.nodes if self.core_number.get(v, 0) >= k]


def homogeneity_graph(units: Mapping[str, Sequence[float]], alpha: float = 0.05,
                      workers: Optional[int] = None) -> ComparisonGraph:
    """Connect units whose distributions do not differ after Bonferroni correction."""
    nodes = tuple(sorted(units))
    if len(nodes) < 2:
        raise ValueError("need at least two units")
    for v in nodes:
        if len(units[v]) == 0:
            raise ValueError(f"unit {v!r} has no values")
    if len(nodes) > LARGE_COMPARISON:
        log.warning("%d units give %d pairwise tests; this may take a while",
                    len(nodes), len(nodes) * (len(nodes) - 1) // 2)
    alpha_family = bonferroni_alpha(alpha, len(nodes))
    pairs = list(combinations(nodes, 2))

    def test(pair):
        return mann_whitney(units[pair[0]], units[pair[1]]).p

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pvals = list(pool.map(test, pairs))
    else:
        pvals = [test(pair) for pair in pairs]

    all_p = dict(zip(pairs, pvals))
    edges = {pair: p for pair, p in all_p.items() if p >= alpha_family}
    return ComparisonGraph(nodes, edges, alpha_family, core_numbers(nodes, edges), all_p)


# --- flagging indicator reports ---------------------------------------------------

@dataclass(frozen=True)
class FlaggedResult:
    result: IndicatorResult
    i3_test: UnitTest
    pr6_test: UnitTest

    @property
    def unit_id(self) -> str:
        return self.result.unit_id


def flag_results(results: Sequence[IndicatorResult], stats: ReferenceStats,
                 expect=Expectation.I3_POINTS) -> list[FlaggedResult]:
    """Attach I3 and PR6 significance tests to every unit of a report."""
    expect = Expectation(expect)
    out = []
    for r in results:
        if expect is Expectation.I3_POINTS:
            i3_test = flag_unit(r.i3_exact, stats.i3, r.n_exact, stats.n)
            pr6_test = flag_unit(r.pr6_exact, stats.pr6, r.n_exact, stats.n)
        else:
            pub_share = r.n_exact / stats.n
            i3_test = flag_shares(r.i3_share, pub_share)
            pr6_test = flag_shares(r.pr6_share, pub_share)
        out.append(FlaggedResult(r, i3_test, pr6_test))
    return out
