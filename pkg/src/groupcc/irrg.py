"""Incremental recursive ranking grouping.

Decomposes a black-box problem into groups of interacting variables by
repeatedly running a recursive ranking-inversion search (RRG) from a
high-quality starting point, accumulating discoveries in an interaction
matrix until no new link shows up for a configurable number of
iterations.  Separable leftovers are packed into fixed-size groups.
"""

from __future__ import annotations

import json
import types
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import FeasibilityError, ValidationError
from .interaction import (
    CachedObjective,
    InteractionMatrix,
    Ranking,
    SampleMatrix,
    build_sample_matrix,
    create_first_ranking,
    is_interaction,
    update_matrix,
)
from .optimizers import find_xhq
from .problems import ProblemInstance

Group = tuple[int, ...]


@dataclass(frozen=True)
class IrrgConfig:
    n_s: int = 10
    eps_sti: int = 15
    eps_s: int = 100
    bootstrap_global_ffe: int = 5000
    bootstrap_local_ffe: int = 15000
    seed: int = 0
    #: Optional FFE cap on the grouping loop itself (bootstrap excluded).
    #: Zero skips grouping entirely and yields an all-separable result.
    decomposition_ffe: Optional[int] = None

    def validate(self) -> None:
        if self.n_s < 2:
            raise ValidationError("n_s must be at least 2")
        if self.eps_sti < 1 or self.eps_s < 1:
            raise ValidationError("eps_sti and eps_s must be positive")
        if self.bootstrap_global_ffe < 0 or self.bootstrap_local_ffe < 0:
            raise ValidationError("bootstrap budgets must be non-negative")


@dataclass
class Decomposition:
    """Variable partition produced by a decomposition strategy."""

    seps: list[Group]
    nonseps: list[Group]
    ffe_cost: int
    iterations: int
    seed: int
    bootstrap_ffe: int = 0
    warning: Optional[str] = None

    def all_groups(self) -> list[Group]:
        return list(self.seps) + list(self.nonseps)

    def covered(self) -> set[int]:
        return {v for g in self.all_groups() for v in g}

    def interaction_matrix(self, n: int) -> InteractionMatrix:
        """Discovered links as a matrix: cliques over the non-separable groups."""
        theta = InteractionMatrix.identity(n)
        for g in self.nonseps:
            theta.link_clique(g)
        return theta

    def to_json(self) -> str:
        doc = {
            "seps": [list(g) for g in self.seps],
            "nonseps": [list(g) for g in self.nonseps],
            "ffe_cost": self.ffe_cost,
            "iterations": self.iterations,
            "seed": self.seed,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Decomposition":
        doc = json.loads(text)
        return cls(
            seps=[tuple(g) for g in doc["seps"]],
            nonseps=[tuple(g) for g in doc["nonseps"]],
            ffe_cost=int(doc["ffe_cost"]),
            iterations=int(doc["iterations"]),
            seed=int(doc["seed"]),
        )


def pack_separable(variables: Sequence[int], eps_s: int) -> list[Group]:
    """Pack loose variables, ascending, into groups of eps_s (last may be short)."""
    out: list[Group] = []
    pending = sorted(int(v) for v in variables)
    while pending:
        take = min(eps_s, len(pending))
        out.append(tuple(pending[:take]))
        pending = pending[take:]
    return out


def _flatten(groups: Sequence[Group]) -> list[int]:
    return [v for g in groups for v in g]


def consider_variables(
    v_set: Sequence[int],
    groups: Sequence[Group],
    x_hq: np.ndarray,
    samples: SampleMatrix,
    xbar2: np.ndarray,
    f: Callable[[np.ndarray], float],
    n_s: int,
    rng: np.random.Generator,
) -> bool:
    """Decide whether the loose variables are worth entering the search.

    True immediately when nothing was discovered yet or one loose variable
    remains; otherwise true when a random half-split of the loose set
    interacts in either direction or the loose set interacts with any
    known group in either direction.
    """
    v_list = [int(v) for v in v_set]
    if len(groups) == 0 or len(v_list) == 1:
        return True
    if len(v_list) == 0:
        return False
    shuffled = list(rng.permutation(np.asarray(v_list, dtype=np.intp)))
    mid = len(shuffled) // 2
    v1, v2 = shuffled[:mid], shuffled[mid:]
    y1, r1 = create_first_ranking(v1, x_hq, samples, f, n_s)
    if is_interaction(v1, v2, x_hq, samples, xbar2, y1, r1, f, n_s):
        return True
    y1, r1 = create_first_ranking(v2, x_hq, samples, f, n_s)
    if is_interaction(v2, v1, x_hq, samples, xbar2, y1, r1, f, n_s):
        return True
    for g in groups:
        y1, r1 = create_first_ranking(v_list, x_hq, samples, f, n_s)
        if is_interaction(v_list, g, x_hq, samples, xbar2, y1, r1, f, n_s):
            return True
        y1, r1 = create_first_ranking(g, x_hq, samples, f, n_s)
        if is_interaction(g, v_list, x_hq, samples, xbar2, y1, r1, f, n_s):
            return True
    return False


def interact(
    g1: Sequence[Group],
    g2: Sequence[Group],
    x_hq: np.ndarray,
    samples: SampleMatrix,
    xbar2: np.ndarray,
    y1: np.ndarray,
    r1: Ranking,
    f: Callable[[np.ndarray], float],
    n_s: int,
) -> list[Group]:
    """Collect groups of ``g2`` interacting with the union of ``g1``.

    Recursive bisection over the group list of ``g2``: a confirmed
    singleton group is absorbed; ``g1`` itself is never mutated and is
    always a prefix of the result.
    """
    out = list(g1)
    known = set(g1)
    x1 = _flatten(g1)
    x2 = _flatten(g2)
    if is_interaction(x1, x2, x_hq, samples, xbar2, y1, r1, f, n_s):
        if len(g2) == 1:
            out.append(g2[0])
        else:
            mid = len(g2) // 2
            for half in (g2[:mid], g2[mid:]):
                for g in interact(g1, half, x_hq, samples, xbar2, y1, r1, f, n_s):
                    if g not in known:
                        known.add(g)
                        out.append(g)
    return out


def rrg(
    x_hq: np.ndarray,
    xbar2: np.ndarray,
    theta: InteractionMatrix,
    f: Callable[[np.ndarray], float],
    lb: np.ndarray,
    ub: np.ndarray,
    n_s: int,
    rng: np.random.Generator,
) -> list[Group]:
    """One recursive ranking grouping pass; returns newly found groups.

    Seeds the working set from the current interaction matrix components
    (member order shuffled), draws a fresh sample matrix, optionally
    admits the loose variables, then alternates group-absorption with the
    half-removal escape that restores drowned-out signals.
    """
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    x_hq = np.asarray(x_hq, dtype=float)
    if (x_hq < lb).any() or (x_hq > ub).any():
        raise FeasibilityError("x_hq must be feasible")
    f = CachedObjective(f)  # repeat assignments within one pass are free

    groups: list[Group] = []
    loose: list[int] = []
    for comp in theta.components():
        if comp.size > 1:
            groups.append(tuple(int(v) for v in rng.permutation(comp)))
        else:
            loose.append(int(comp[0]))
    samples = build_sample_matrix(lb, ub, n_s, rng)
    if consider_variables(loose, groups, x_hq, samples, xbar2, f, n_s, rng):
        groups.extend((v,) for v in loose)
    rng.shuffle(groups)
    if not groups:
        return []

    g1 = [groups[0]]
    g2 = list(groups[1:])
    nonseps: list[Group] = []
    while g2:
        x1 = _flatten(g1)
        y1, r1 = create_first_ranking(x1, x_hq, samples, f, n_s)
        extended = interact(g1, g2, x_hq, samples, xbar2, y1, r1, f, n_s)
        if len(extended) == len(g1):
            if len(g1) == 1:
                min_size = min(len(g) for g in g2)
                if len(g1[0]) >= max(min_size, 2):
                    keep = len(g1[0]) - len(g1[0]) // 2
                    chosen = rng.choice(len(g1[0]), size=keep, replace=False)
                    g1 = [tuple(g1[0][j] for j in sorted(chosen))]
                else:
                    g1 = [g2.pop(0)]
            else:
                nonseps.append(tuple(sorted(x1)))
                g1 = [g2.pop(0)]
        else:
            g1 = extended
            absorbed = set(g1)
            g2 = [g for g in g2 if g not in absorbed]
    if len(g1) > 1:
        nonseps.append(tuple(sorted(_flatten(g1))))
    return nonseps


def irrg(
    f: ProblemInstance,
    config: IrrgConfig = IrrgConfig(),
    bootstrap: Optional[Callable[..., object]] = None,
) -> Decomposition:
    """Full incremental decomposition of ``f``.

    Runs the bootstrap (global then local search) for a high-quality
    point, then iterates ranking-grouping passes with a fresh random
    perturbation vector each time.  Stops when the first pass finds
    nothing, or after ``eps_sti`` consecutive stale passes.  Interaction
    growth is monotone, so the loop always halts.
    """
    config.validate()
    n, lb, ub = f.n, f.lb, f.ub
    ss = np.random.SeedSequence(config.seed)
    boot_ss, loop_ss = ss.spawn(2)
    rng = np.random.default_rng(loop_ss)
    ffe_start = f.evals

    boot = bootstrap if bootstrap is not None else find_xhq
    boot_cfg = types.SimpleNamespace(
        bootstrap_global_ffe=config.bootstrap_global_ffe,
        bootstrap_local_ffe=config.bootstrap_local_ffe,
        seed=boot_ss,
    )
    x_hq = np.asarray(boot(f, lb, ub, boot_cfg).best_x, dtype=float)
    bootstrap_ffe = f.evals - ffe_start

    theta = InteractionMatrix.identity(n)
    warning = None
    iterations = 0
    budget = config.decomposition_ffe
    if budget is not None and budget <= 0:
        warning = "zero-budget decomposition: reporting every variable separable"
    else:
        first = True
        stale = 0
        while True:
            xbar2 = rng.uniform(lb, ub)
            found = rrg(x_hq, xbar2, theta, f, lb, ub, config.n_s, rng)
            theta, new_links = update_matrix(theta, found)
            iterations += 1
            if new_links == 0:
                stale += 1
                if first or stale >= config.eps_sti:
                    break
            else:
                stale = 0
            first = False
            if budget is not None and f.evals - ffe_start - bootstrap_ffe >= budget:
                warning = "decomposition FFE budget exhausted"
                break

    loose: list[int] = []
    nonseps: list[Group] = []
    for comp in theta.components():
        if comp.size == 1:
            loose.append(int(comp[0]))
        else:
            nonseps.append(tuple(int(v) for v in comp))
    return Decomposition(
        seps=pack_separable(loose, config.eps_s),
        nonseps=nonseps,
        ffe_cost=f.evals - ffe_start,
        iterations=iterations,
        seed=config.seed,
        bootstrap_ffe=bootstrap_ffe,
        warning=warning,
    )
