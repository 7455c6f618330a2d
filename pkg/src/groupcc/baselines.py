"""Comparator decomposition strategies.

Pairwise differential grouping with the automatic tolerance estimate, the
recursive group-level second-difference check with size thresholds, and
the randomized monotonicity-witness strategy that bisects candidate sets
with fresh samples per check.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError
from .interaction import DEFAULT_MODEL, EpsilonModel, gamma, pair_epsilon, sgn_eps
from .irrg import Decomposition, Group, pack_separable
from .problems import ProblemInstance


@dataclass(frozen=True)
class DgProbe:
    """One pairwise probe: base point, anchor value, step and two contexts."""

    a: float
    delta: float
    b1: float
    b2: float
    base: np.ndarray

    def validate(self) -> None:
        if self.delta <= 0.0:
            raise ValidationError("delta must be positive")
        if self.b1 == self.b2:
            raise ValidationError("the two context values must differ")


def dg_pair_check(
    f: ProblemInstance,
    p: int,
    q: int,
    probe: DgProbe,
    model: EpsilonModel = DEFAULT_MODEL,
) -> bool:
    """Second-difference check between variables ``p`` and ``q``.

    Evaluates the four corner points and flags interaction when the two
    first differences disagree beyond the magnitude-scaled tolerance.
    Sensitive to false linkage when separability is non-additive.
    """
    probe.validate()
    pts = []
    for xp, xq in (
        (probe.a, probe.b1),
        (probe.a + probe.delta, probe.b1),
        (probe.a, probe.b2),
        (probe.a + probe.delta, probe.b2),
    ):
        x = np.array(probe.base, dtype=float, copy=True)
        x[p] = xp
        x[q] = xq
        pts.append(f(x))
    y1, y2, y3, y4 = pts
    delta1 = y2 - y1
    delta2 = y4 - y3
    eps = gamma(math.sqrt(f.n) + 2.0, model) * (
        abs(y1) + abs(y2) + abs(y3) + abs(y4)
    )
    return abs(delta1 - delta2) > eps


def rdg_group_check(
    f,
    x1_vars: Sequence[int],
    x2_vars: Sequence[int],
    base: np.ndarray,
    deltas: tuple[np.ndarray, np.ndarray],
    model: EpsilonModel = DEFAULT_MODEL,
    corners: Optional[tuple[float, float]] = None,
) -> bool:
    """Group-level second-difference check.

    ``deltas`` holds the two perturbation vectors (nonzero exactly on the
    respective sets).  ``corners`` may carry precomputed values of the base
    point and the X1-perturbed point to save repeat evaluations.
    """
    i1 = np.asarray(list(x1_vars), dtype=np.intp)
    i2 = np.asarray(list(x2_vars), dtype=np.intp)
    if np.intersect1d(i1, i2).size:
        raise ValidationError("the two groups must be disjoint")
    d1, d2 = deltas
    n = base.shape[0]
    if corners is None:
        y1 = f(base)
        y2 = f(base + d1)
    else:
        y1, y2 = corners
    y3 = f(base + d2)
    y4 = f(base + d1 + d2)
    eps = gamma(math.sqrt(n) + 2.0, model) * (
        abs(y1) + abs(y2) + abs(y3) + abs(y4)
    )
    lhs = (y4 - y3) - (y2 - y1)
    if math.isnan(lhs) or math.isinf(lhs):
        # penalty regions make the corners incomparable
        return False
    return abs(lhs) > eps


@dataclass(frozen=True)
class Rdg3Config:
    eps_s: int = 100
    eps_n: int = 50

    def validate(self) -> None:
        if self.eps_s < 1:
            raise ValidationError("eps_s must be positive")
        if self.eps_n < 2:
            raise ValidationError("eps_n must be at least 2")


def rdg3_decompose(
    f: ProblemInstance, config: Rdg3Config = Rdg3Config(), seed: int = 0
) -> Decomposition:
    """Recursive differential grouping with group-size thresholds.

    Uses the canonical probe: base at the lower-bound corner, the growing
    set perturbed to the upper bound, candidates perturbed to the bounds
    midpoint.  A growing non-separable group is finalized as soon as it
    reaches ``eps_n`` members; loose variables are packed into groups of
    ``eps_s``.  Deterministic; ``seed`` is recorded only.
    """
    config.validate()
    lb, ub, n = f.lb, f.ub, f.n
    ffe_start = f.evals
    base = lb.copy()
    up = ub - lb  # perturbation onto the upper bound
    mid = (ub - lb) / 2.0  # perturbation onto the midpoint
    y_base = f(base)

    def x1_delta(x1: list[int]) -> np.ndarray:
        d = np.zeros(n)
        d[x1] = up[x1]
        return d

    def x2_delta(x2: list[int]) -> np.ndarray:
        d = np.zeros(n)
        d[x2] = mid[x2]
        return d

    def find_linked(x1: list[int], d1: np.ndarray, y_x1: float, cand: list[int]) -> list[int]:
        if not cand:
            return []
        if not rdg_group_check(
            f, x1, cand, base, (d1, x2_delta(cand)), corners=(y_base, y_x1)
        ):
            return []
        if len(cand) == 1:
            return list(cand)
        half = len(cand) // 2
        return find_linked(x1, d1, y_x1, cand[:half]) + find_linked(
            x1, d1, y_x1, cand[half:]
        )

    remaining = deque(range(n))
    seps_pool: list[int] = []
    nonseps: list[Group] = []

    def finalize(x1: list[int]) -> None:
        if len(x1) == 1:
            seps_pool.append(x1[0])
        elif len(x1) > 1:
            nonseps.append(tuple(sorted(x1)))

    x1 = [remaining.popleft()]
    d1 = x1_delta(x1)
    y_x1 = f(base + d1)
    while True:
        if not remaining:
            finalize(x1)
            break
        linked = find_linked(x1, d1, y_x1, list(remaining))
        if linked:
            linked_set = set(linked)
            remaining = deque(v for v in remaining if v not in linked_set)
            x1 = x1 + linked
            if len(x1) >= config.eps_n:
                nonseps.append(tuple(sorted(x1)))
                if not remaining:
                    break
                x1 = [remaining.popleft()]
        else:
            finalize(x1)
            if not remaining:
                break
            x1 = [remaining.popleft()]
        d1 = x1_delta(x1)
        y_x1 = f(base + d1)

    return Decomposition(
        seps=pack_separable(seps_pool, config.eps_s),
        nonseps=nonseps,
        ffe_cost=f.evals - ffe_start,
        iterations=1,
        seed=seed,
    )


@dataclass(frozen=True)
class FvilConfig:
    #: Maximum fresh random samples tried per pair of sets.
    max_checks: int = 10
    eps_s: int = 100

    def validate(self) -> None:
        if self.max_checks < 1:
            raise ValidationError("max_checks must be positive")
        if self.eps_s < 1:
            raise ValidationError("eps_s must be positive")


def fvil_decompose(
    f: ProblemInstance, config: FvilConfig = FvilConfig(), seed: int = 0
) -> Decomposition:
    """Monotonicity-witness decomposition with fresh samples per check.

    The probing set is always a single variable; candidate sets are
    bisected recursively and every pair check draws up to ``max_checks``
    random configurations, declaring interaction on the first order
    inversion that is decisive under the magnitude-scaled tolerance.
    Misses linkage more often than ranking-based search but never invents
    it.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    lb, ub, n = f.lb, f.ub, f.n
    ffe_start = f.evals

    def witness(x1: list[int], x2: list[int]) -> bool:
        i1 = np.asarray(x1, dtype=np.intp)
        i2 = np.asarray(x2, dtype=np.intp)
        for _ in range(config.max_checks):
            xstar = rng.uniform(lb, ub)
            t1 = rng.uniform(lb[i1], ub[i1])
            t2 = rng.uniform(lb[i2], ub[i2])
            pa = xstar.copy()
            pa[i1] = t1
            pb = xstar.copy()
            pb[i2] = t2
            pab = pa.copy()
            pab[i2] = t2
            y0, ya, yb, yab = f(xstar), f(pa), f(pb), f(pab)
            s1 = sgn_eps(ya - y0, pair_epsilon(n, ya, y0))
            s2 = sgn_eps(yab - yb, pair_epsilon(n, yab, yb))
            if (s1 >= 0 and s2 < 0) or (s1 <= 0 and s2 > 0):
                return True
        return False

    def find_partners(v: int, cand: list[int]) -> list[int]:
        if not cand:
            return []
        if not witness([v], cand):
            return []
        if len(cand) == 1:
            return list(cand)
        half = len(cand) // 2
        return find_partners(v, cand[:half]) + find_partners(v, cand[half:])

    assigned: set[int] = set()
    seps_pool: list[int] = []
    nonseps: list[Group] = []
    for v in range(n):
        if v in assigned:
            continue
        assigned.add(v)
        component = {v}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            cand = [w for w in range(n) if w not in assigned]
            for w in find_partners(u, cand):
                assigned.add(w)
                component.add(w)
                queue.append(w)
        if len(component) > 1:
            nonseps.append(tuple(sorted(component)))
        else:
            seps_pool.append(v)

    return Decomposition(
        seps=pack_separable(seps_pool, config.eps_s),
        nonseps=nonseps,
        ffe_cost=f.evals - ffe_start,
        iterations=1,
        seed=seed,
    )
