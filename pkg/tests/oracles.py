"""Brute-force reference implementations used only by the tests."""

from fractions import Fraction
from itertools import combinations

import numpy as np


def midrank_u(a, b):
    """U for `a` counted pairwise: wins plus half ties."""
    return sum((x > y) + 0.5 * (x == y) for x in a for y in b)


def mann_whitney_by_labelings(a, b):
    """(U, exact two-sided p) by enumerating every split of the pooled data."""
    pooled = list(a) + list(b)
    na, nb = len(a), len(b)
    centre = Fraction(na * nb, 2)
    observed = abs(Fraction(midrank_u(a, b)) - centre)
    hits = total = 0
    for chosen in combinations(range(na + nb), na):
        picked = set(chosen)
        xa = [pooled[i] for i in chosen]
        xb = [pooled[i] for i in range(na + nb) if i not in picked]
        hits += abs(Fraction(midrank_u(xa, xb)) - centre) >= observed
        total += 1
    return midrank_u(a, b), Fraction(hits, total)


def _subset_tables(n):
    masks = np.arange(1 << n, dtype=np.int64)
    member = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    return masks, member


_TABLES = {}


def core_numbers_by_subsets(n, edges):
    """Core number of each node 0..n-1: the largest k such that some node set
    containing it induces a subgraph of minimum degree k."""
    if n not in _TABLES:
        _TABLES[n] = _subset_tables(n)
    masks, member = _TABLES[n]
    adj = np.zeros(n, dtype=np.int64)
    for a, b in edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    inside = masks[:, None] & adj[None, :]
    # popcount of the neighbours inside each subset
    deg = np.zeros_like(inside)
    for bit in range(n):
        deg += (inside >> bit) & 1
    deg = np.where(member, deg, np.iinfo(np.int64).max)
    min_deg = deg.min(axis=1)
    min_deg[0] = -1
    best = np.where(member, min_deg[:, None], -1).max(axis=0)
    return [int(x) for x in best]
