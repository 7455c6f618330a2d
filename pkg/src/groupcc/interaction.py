"""Primitive machinery shared by the decomposition strategies.

Covers the floating-point tolerance model, the tolerance-aware signum,
per-variable sample grids, fitness rankings, the two-set interaction test
driven by ranking inversions, and the boolean interaction matrix with its
transitive group updates.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ValidationError

#: Round-off unit of IEEE-754 binary64 arithmetic.
MU_M = 2.0 ** -53


@dataclass(frozen=True)
class EpsilonModel:
    """Machine round-off model behind all tolerance estimates."""

    mu_m: float = MU_M

    def __post_init__(self) -> None:
        if not 0.0 < self.mu_m < 1.0:
            raise ValidationError("mu_m must lie in (0, 1)")


DEFAULT_MODEL = EpsilonModel()


def gamma(k: float, model: EpsilonModel = DEFAULT_MODEL) -> float:
    """Relative error growth factor ``k*mu / (1 - k*mu)``.

    Strictly increasing in ``k`` while ``k*mu < 1``.
    """
    if k < 0.0:
        raise ValidationError("k must be non-negative")
    km = k * model.mu_m
    if km >= 1.0:
        raise ValidationError(f"k*mu_m = {km} >= 1 leaves the model's domain")
    return km / (1.0 - km)


def pair_epsilon(
    n: int, y_a: float, y_b: float, model: EpsilonModel = DEFAULT_MODEL
) -> float:
    """Indistinguishability tolerance for comparing two fitness values.

    Non-finite inputs (the +inf infeasibility penalty) propagate as an
    infinite tolerance; sgn_eps resolves those comparisons explicitly.
    """
    if math.isnan(y_a) or math.isnan(y_b):
        raise ValidationError("fitness values must not be NaN")
    if math.isinf(y_a) or math.isinf(y_b):
        return math.inf
    return gamma(math.sqrt(n) + 1.0, model) * (abs(y_a) + abs(y_b))


def sgn_eps(x: float, eps: float) -> int:
    """Signum with a dead zone of width ``eps``.

    Infinity conventions for penalised fitness: a NaN difference (inf - inf)
    counts as indistinguishable, while +-inf differences are decisive
    regardless of ``eps``.
    """
    if eps < 0.0:
        raise ValidationError("eps must be non-negative")
    if math.isnan(x):
        return 0
    if x == math.inf:
        return 1
    if x == -math.inf:
        return -1
    if x < -eps:
        return -1
    if x > eps:
        return 1
    return 0


# ---------------------------------------------------------------------------
# Interaction matrix
# ---------------------------------------------------------------------------


class InteractionMatrix:
    """Symmetric boolean matrix of discovered pairwise dependencies.

    The diagonal is always true.  Connected components of the matrix,
    viewed as a graph, are the variable groups.
    """

    __slots__ = ("bits",)

    def __init__(self, bits: np.ndarray):
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[0] != bits.shape[1]:
            raise ValidationError("interaction matrix must be square")
        if not (bits == bits.T).all():
            raise ValidationError("interaction matrix must be symmetric")
        if not bits.diagonal().all():
            raise ValidationError("interaction matrix diagonal must be true")
        self.bits = bits

    @classmethod
    def identity(cls, n: int) -> "InteractionMatrix":
        return cls(np.eye(n, dtype=bool))

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    def copy(self) -> "InteractionMatrix":
        return InteractionMatrix(self.bits.copy())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, InteractionMatrix) and bool(
            (self.bits == other.bits).all()
        )

    def __hash__(self):  # mutable container
        raise TypeError("InteractionMatrix is not hashable")

    def link_clique(self, indices: Sequence[int]) -> int:
        """Set every pair within ``indices`` true (no transitive closure).

        Returns the number of previously absent links.  Used to assemble
        ground-truth matrices of direct interactions.
        """
        idx = np.asarray(sorted(set(int(i) for i in indices)), dtype=np.intp)
        self._check_indices(idx)
        block = self.bits[np.ix_(idx, idx)]
        added = int(block.size - int(block.sum())) // 2
        self.bits[np.ix_(idx, idx)] = True
        return added

    def merge_group(self, indices: Sequence[int]) -> int:
        """Link a discovered group, closing transitively over touched components.

        All pairs within the union of ``indices`` and every connected
        component intersecting it become true.  Returns the number of
        previously absent links.
        """
        members: set[int] = set(int(i) for i in indices)
        idx = np.asarray(sorted(members), dtype=np.intp)
        self._check_indices(idx)
        for v in list(members):
            members.update(np.flatnonzero(self.bits[v]).tolist())
        return self.link_clique(sorted(members))

    def _check_indices(self, idx: np.ndarray) -> None:
        if idx.size == 0:
            raise ValidationError("empty index set")
        if idx[0] < 0 or idx[-1] >= self.n:
            raise ValidationError("index out of range")

    def component_of(self, v: int) -> np.ndarray:
        """Variables connected to ``v``; valid as-is only on closed matrices."""
        return np.flatnonzero(self.bits[v])

    def components(self) -> list[np.ndarray]:
        """Connected components, each sorted ascending, ordered by lowest member."""
        n = self.n
        seen = np.zeros(n, dtype=bool)
        out = []
        for v in range(n):
            if seen[v]:
                continue
            frontier = [v]
            comp = {v}
            seen[v] = True
            while frontier:
                u = frontier.pop()
                for w in np.flatnonzero(self.bits[u]):
                    if not seen[w]:
                        seen[w] = True
                        comp.add(int(w))
                        frontier.append(int(w))
            out.append(np.asarray(sorted(comp), dtype=np.intp))
        return out

    def transitive_closure(self) -> "InteractionMatrix":
        closed = InteractionMatrix.identity(self.n)
        for comp in self.components():
            closed.link_clique(comp)
        return closed

    def off_diagonal_count(self) -> int:
        return (int(self.bits.sum()) - self.n) // 2

    def to_text(self) -> str:
        """Strictly-lower-triangular 0/1 rows; first line is the dimension."""
        lines = [str(self.n)]
        for i in range(1, self.n):
            lines.append("".join("1" if self.bits[i, j] else "0" for j in range(i)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "InteractionMatrix":
        lines = text.strip().splitlines()
        n = int(lines[0])
        bits = np.eye(n, dtype=bool)
        for i in range(1, n):
            row = lines[i]
            if len(row) != i:
                raise ValidationError(f"triangular row {i} must have {i} bits")
            for j, ch in enumerate(row):
                bits[i, j] = bits[j, i] = ch == "1"
        return cls(bits)


def update_matrix(
    theta: InteractionMatrix, groups: Sequence[Sequence[int]]
) -> tuple[InteractionMatrix, int]:
    """Absorb discovered groups into a copy of ``theta`` with transitivity.

    Returns the updated matrix and the number of links flipped false->true.
    """
    out = theta.copy()
    new_links = 0
    for g in groups:
        new_links += out.merge_group(g)
    return out, new_links


# ---------------------------------------------------------------------------
# Sample matrices, rankings and the interaction check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleMatrix:
    """Per-variable evenly spaced sample values in shuffled row order.

    Column ``j`` holds ``n_s`` values linearly spaced over the j-th
    variable's bounds, endpoints included, independently shuffled.
    """

    values: np.ndarray  # (n_s, n)

    @property
    def n_s(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


def build_sample_matrix(
    lb: np.ndarray, ub: np.ndarray, n_s: int, rng: np.random.Generator
) -> SampleMatrix:
    if n_s < 2:
        raise ValidationError("need at least two samples per variable")
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    grid = np.linspace(lb, ub, n_s)  # (n_s, n), endpoints included
    values = np.empty_like(grid)
    for j in range(grid.shape[1]):
        values[:, j] = grid[rng.permutation(n_s), j]
    return SampleMatrix(values=values)


@dataclass(frozen=True)
class Ranking:
    """Sample indices ordered by ascending fitness, ties by sample index."""

    order: np.ndarray
    fitnesses: np.ndarray


class CachedObjective:
    """Memoising wrapper around an FFE-counted objective.

    Keyed on a digest of the raw vector bytes; repeated evaluations of an
    identical assignment cost no additional FFEs.  One decomposition pass
    owns one cache, which bounds the memory footprint.
    """

    __slots__ = ("inner", "_cache", "hits", "misses")

    def __init__(self, inner: Callable[[np.ndarray], float]):
        self.inner = inner
        self._cache: dict[bytes, float] = {}
        self.hits = 0
        self.misses = 0

    def __call__(self, x: np.ndarray) -> float:
        key = hashlib.blake2b(x.tobytes(), digest_size=16).digest()
        y = self._cache.get(key)
        if y is None:
            y = self.inner(x)
            self._cache[key] = y
            self.misses += 1
        else:
            self.hits += 1
        return y


def create_first_ranking(
    x1_vars: Sequence[int],
    x: np.ndarray,
    samples: SampleMatrix,
    f: Callable[[np.ndarray], float],
    n_s: Optional[int] = None,
) -> tuple[np.ndarray, Ranking]:
    """Fitness values and ranking of the sample rows restricted to ``x1_vars``.

    Row ``i`` of the sample matrix overwrites the ``x1_vars`` coordinates of
    ``x`` before each evaluation.  Costs ``n_s`` FFEs minus cache hits.
    """
    idx = np.asarray(list(x1_vars), dtype=np.intp)
    if idx.size == 0:
        raise ValidationError("the ranked variable set must not be empty")
    n_s = samples.n_s if n_s is None else n_s
    xbar = np.array(x, dtype=float, copy=True)
    y1 = np.empty(n_s, dtype=float)
    for i in range(n_s):
        xbar[idx] = samples.values[i, idx]
        y1[i] = f(xbar)
    order = np.argsort(y1, kind="stable")
    return y1, Ranking(order=order, fitnesses=y1)


@dataclass(frozen=True)
class Witness:
    """Audit record for a discovered interaction.

    The unperturbed pair is ordered (``y1_prev`` below ``y1_curr`` beyond
    ``eps1``) while the perturbed pair inverts (``y2_curr`` below
    ``y2_prev`` beyond ``eps2``), which is exactly an order-inversion
    witness of non-separability.
    """

    row_prev: int
    row_curr: int
    y1_prev: float
    y1_curr: float
    y2_prev: float
    y2_curr: float
    eps1: float
    eps2: float
    x_prev: np.ndarray
    x_curr: np.ndarray
    x_prev_perturbed: np.ndarray
    x_curr_perturbed: np.ndarray


def check_interaction(
    x1_vars: Sequence[int],
    x2_vars: Sequence[int],
    x_hq: np.ndarray,
    samples: SampleMatrix,
    xbar2: np.ndarray,
    y1: np.ndarray,
    r1: Ranking,
    f: Callable[[np.ndarray], float],
    n_s: Optional[int] = None,
    model: EpsilonModel = DEFAULT_MODEL,
) -> Optional[Witness]:
    """Lazy second-ranking construction; returns a witness at the first
    tolerance-decisive inversion, or None when the orderings agree.

    Steps whose first-ranking pair is indistinguishable are skipped; the
    second-ranking comparison is then made against the most recent computed
    value, following the algorithm literally.
    """
    i1 = np.asarray(list(x1_vars), dtype=np.intp)
    i2 = np.asarray(list(x2_vars), dtype=np.intp)
    if i1.size == 0 or i2.size == 0:
        raise ValidationError("interaction check needs two non-empty sets")
    if np.intersect1d(i1, i2).size:
        raise ValidationError("interaction check needs disjoint sets")
    n = x_hq.shape[0]
    n_s = samples.n_s if n_s is None else n_s
    order = r1.order
    g = gamma(math.sqrt(n) + 1.0, model)

    xbar = np.array(x_hq, dtype=float, copy=True)
    xbar[i2] = xbar2[i2]
    xbar[i1] = samples.values[order[0], i1]
    y2_prev = f(xbar)
    prev_pos = 0
    x_prev_perturbed = xbar.copy()
    for i in range(1, n_s):
        a = float(y1[order[i]])  # python floats: inf - inf is a quiet nan
        b = float(y1[order[i - 1]])
        eps1 = math.inf if (math.isinf(a) or math.isinf(b)) else g * (abs(a) + abs(b))
        if sgn_eps(a - b, eps1) == 0:
            continue
        xbar[i1] = samples.values[order[i], i1]
        y2 = f(xbar)
        eps2 = (
            math.inf
            if (math.isinf(y2) or math.isinf(y2_prev))
            else g * (abs(y2) + abs(y2_prev))
        )
        if sgn_eps(y2 - y2_prev, eps2) < 0:
            x_prev = np.array(x_hq, copy=True)
            x_prev[i1] = samples.values[order[prev_pos], i1]
            x_curr = np.array(x_hq, copy=True)
            x_curr[i1] = samples.values[order[i], i1]
            return Witness(
                row_prev=int(order[prev_pos]),
                row_curr=int(order[i]),
                y1_prev=float(y1[order[prev_pos]]),
                y1_curr=float(a),
                y2_prev=float(y2_prev),
                y2_curr=float(y2),
                eps1=float(eps1),
                eps2=float(eps2),
                x_prev=x_prev,
                x_curr=x_curr,
                x_prev_perturbed=x_prev_perturbed,
                x_curr_perturbed=xbar.copy(),
            )
        y2_prev = y2
        prev_pos = i
        x_prev_perturbed = xbar.copy()
    return None


def is_interaction(
    x1_vars: Sequence[int],
    x2_vars: Sequence[int],
    x_hq: np.ndarray,
    samples: SampleMatrix,
    xbar2: np.ndarray,
    y1: np.ndarray,
    r1: Ranking,
    f: Callable[[np.ndarray], float],
    n_s: Optional[int] = None,
    model: EpsilonModel = DEFAULT_MODEL,
) -> bool:
    """True when the two variable sets provably interact; at most n_s FFEs."""
    return (
        check_interaction(x1_vars, x2_vars, x_hq, samples, xbar2, y1, r1, f, n_s, model)
        is not None
    )
