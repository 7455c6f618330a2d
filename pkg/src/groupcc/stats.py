"""Statistical comparison machinery for experiment result sets."""

from __future__ import annotations

import math
from itertools import groupby
from typing import Sequence

import numpy as np

from .errors import ValidationError


def _midranks(values: Sequence[float]) -> np.ndarray:
    """Fractional ranks (ties get the mean of their rank block), 1-based."""
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr))
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_p(ranks: np.ndarray, n_a: int, w_obs: float) -> float:
    """Two-sided exact p over all rank assignments of size ``n_a``.

    Counts arrangements whose rank sum is at least as far from the mean as
    the observed one.  Doubling the (half-integer) midranks makes every
    sum an integer, so the subset-sum distribution can be tabulated
    exactly with a small dynamic program.
    """
    n = len(ranks)
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    # ways[k][s] = number of k-subsets with doubled-rank sum s
    ways = [dict() for _ in range(n_a + 1)]
    ways[0][0] = 1
    for r in doubled:
        for k in range(min(n_a, n), 0, -1):
            src = ways[k - 1]
            dst = ways[k]
            for s, c in list(src.items()):
                dst[s + r] = dst.get(s + r, 0) + c
    mu2 = n_a * (n + 1)  # doubled mean rank sum
    d_obs = abs(int(round(2.0 * w_obs)) - mu2)
    count = sum(c for s, c in ways[n_a].items() if abs(s - mu2) >= d_obs)
    return count / math.comb(n, n_a)


def _normal_p(ranks: np.ndarray, n_a: int, w_obs: float) -> float:
    """Normal approximation with tie correction and continuity correction."""
    n = len(ranks)
    n_b = n - n_a
    mu = n_a * (n + 1) / 2.0
    tie_term = 0.0
    for _, grp in groupby(sorted(ranks)):
        t = len(list(grp))
        tie_term += t**3 - t
    var = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0.0:
        return 1.0
    z = (abs(w_obs - mu) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


def wilcoxon_rank_sum(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """Two-sided unpaired rank-sum p-value.

    Exact enumeration of the rank-assignment distribution for combined
    sizes up to 20, the tie-corrected normal approximation beyond.
    """
    a = list(sample_a)
    b = list(sample_b)
    if not a or not b:
        raise ValidationError("both samples must be non-empty")
    ranks = _midranks(a + b)
    w_obs = float(ranks[: len(a)].sum())
    if len(a) + len(b) <= 20:
        return _exact_p(ranks, len(a), w_obs)
    return _normal_p(ranks, len(a), w_obs)


def holm_bonferroni(p_values: Sequence[float], alpha: float) -> list[bool]:
    """Step-down multiple-testing correction.

    Walks the p-values in ascending order against alpha / (m - i); the
    first retained hypothesis retains all later ones.  Flags are returned
    in the original order.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")
    ps = list(p_values)
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"p-value {p} outside [0, 1]")
    m = len(ps)
    rejected = [False] * m
    order = sorted(range(m), key=lambda i: ps[i])
    for step, i in enumerate(order):
        if ps[i] <= alpha / (m - step):
            rejected[i] = True
        else:
            break
    return rejected
