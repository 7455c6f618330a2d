"""Black-box optimizers with strict FFE accounting.

All optimizers stop exactly at their evaluation budget, never exceed it,
and are deterministic under a fixed seed.  They accept any callable
objective, including FFE-counted problem instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import FeasibilityError, ValidationError

Objective = Callable[[np.ndarray], float]


@dataclass
class OptimizerRun:
    """Outcome of one optimizer execution."""

    best_x: np.ndarray
    best_f: float
    ffe_used: int
    trace: Optional[list[tuple[int, float]]] = None


def trace_csv(run: OptimizerRun) -> str:
    """Checkpoint trace as CSV text; empty when tracing was off."""
    if run.trace is None:
        return "ffe,best_f\n"
    return "ffe,best_f\n" + "".join(
        f"{ffe},{float(bf)!r}\n" for ffe, bf in run.trace
    )


class _Tracker:
    """Best-so-far bookkeeping plus optional (ffe, best_f) checkpoints."""

    def __init__(self, trace_every: Optional[int] = None):
        self.best_x: Optional[np.ndarray] = None
        self.best_f = math.inf
        self.ffe = 0
        self.trace_every = trace_every
        self.trace: Optional[list[tuple[int, float]]] = (
            [] if trace_every else None
        )

    def record(self, x: np.ndarray, y: float) -> None:
        self.ffe += 1
        y = float(y)
        if y < self.best_f or self.best_x is None:
            self.best_f = y
            self.best_x = np.array(x, copy=True)
        if self.trace is not None and self.ffe % self.trace_every == 0:
            self.trace.append((self.ffe, self.best_f))

    def run(self) -> OptimizerRun:
        if self.trace is not None and (
            not self.trace or self.trace[-1][0] != self.ffe
        ):
            self.trace.append((self.ffe, self.best_f))
        return OptimizerRun(
            best_x=self.best_x, best_f=self.best_f, ffe_used=self.ffe, trace=self.trace
        )


# ---------------------------------------------------------------------------
# SHADE
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShadeConfig:
    pop_size: int = 100
    arc_ratio: float = 2.0
    pbest_ratio: float = 0.1
    memory_size: int = 1000
    seed: int = 0


def shade_optimize(
    f: Objective,
    lb: np.ndarray,
    ub: np.ndarray,
    budget: int,
    config: ShadeConfig = ShadeConfig(),
    trace_every: Optional[int] = None,
) -> OptimizerRun:
    """Success-history adaptive differential evolution with an external archive.

    current-to-pbest/1 mutation with binomial crossover; F drawn from a
    Cauchy and CR from a normal around per-slot success memories, which are
    refreshed with improvement-weighted means (Lehmer mean for F).
    """
    if config.pop_size < 4:
        raise ValidationError("SHADE needs a population of at least 4")
    if not 0.0 < config.pbest_ratio <= 1.0:
        raise ValidationError("pbest_ratio must lie in (0, 1]")
    if config.memory_size < 1:
        raise ValidationError("memory_size must be positive")
    if budget < config.pop_size:
        raise ValidationError("budget must cover the initial population")
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    n = lb.shape[0]
    np_pop = config.pop_size
    rng = np.random.default_rng(config.seed)
    tracker = _Tracker(trace_every)

    pop = rng.uniform(lb, ub, size=(np_pop, n))
    fit = np.empty(np_pop)
    for i in range(np_pop):
        fit[i] = f(pop[i])
        tracker.record(pop[i], fit[i])

    h = config.memory_size
    m_cr = np.full(h, 0.5)
    m_f = np.full(h, 0.5)
    k = 0
    archive: list[np.ndarray] = []
    arc_max = int(config.arc_ratio * np_pop)
    p_num = max(2, int(round(config.pbest_ratio * np_pop)))

    while tracker.ffe < budget:
        trials = np.empty_like(pop)
        cr_used = np.empty(np_pop)
        f_used = np.empty(np_pop)
        sorted_idx = np.argsort(fit, kind="stable")
        for i in range(np_pop):
            r = rng.integers(h)
            cr_used[i] = min(max(rng.normal(m_cr[r], 0.1), 0.0), 1.0)
            fi = m_f[r] + 0.1 * math.tan(math.pi * (rng.random() - 0.5))
            while fi <= 0.0:
                fi = m_f[r] + 0.1 * math.tan(math.pi * (rng.random() - 0.5))
            f_used[i] = min(fi, 1.0)

            pbest = pop[sorted_idx[rng.integers(p_num)]]
            r1 = rng.integers(np_pop)
            while r1 == i:
                r1 = rng.integers(np_pop)
            pool = np_pop + len(archive)
            r2 = rng.integers(pool)
            while r2 == i or r2 == r1:
                r2 = rng.integers(pool)
            x_r2 = pop[r2] if r2 < np_pop else archive[r2 - np_pop]

            v = pop[i] + f_used[i] * (pbest - pop[i]) + f_used[i] * (pop[r1] - x_r2)
            # midpoint repair keeps trials feasible without clustering on bounds
            low = v < lb
            v[low] = (pop[i][low] + lb[low]) / 2.0
            high = v > ub
            v[high] = (pop[i][high] + ub[high]) / 2.0

            cross = rng.random(n) < cr_used[i]
            cross[rng.integers(n)] = True
            trials[i] = np.where(cross, v, pop[i])

        s_cr: list[float] = []
        s_f: list[float] = []
        s_delta: list[float] = []
        for i in range(np_pop):
            if tracker.ffe >= budget:
                break
            y = f(trials[i])
            tracker.record(trials[i], y)
            if y <= fit[i]:
                if y < fit[i]:
                    archive.append(pop[i].copy())
                    s_cr.append(cr_used[i])
                    s_f.append(f_used[i])
                    delta = fit[i] - y
                    # escaping a penalty region counts as a huge finite gain
                    s_delta.append(delta if math.isfinite(delta) else 1e300)
                pop[i] = trials[i]
                fit[i] = y
        while len(archive) > arc_max:
            archive.pop(rng.integers(len(archive)))
        if s_delta:
            w = np.asarray(s_delta) / sum(s_delta)
            scr = np.asarray(s_cr)
            sf = np.asarray(s_f)
            m_cr[k] = float(np.sum(w * scr))
            m_f[k] = float(np.sum(w * sf * sf) / np.sum(w * sf))
            k = (k + 1) % h

    return tracker.run()


# ---------------------------------------------------------------------------
# MTS-LS1
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MtsLs1Config:
    #: Initial search range as a fraction of each variable's bound width.
    step_fraction: float = 0.2


def mts_ls1(
    f: Objective,
    lb: np.ndarray,
    ub: np.ndarray,
    start: np.ndarray,
    budget: int,
    config: MtsLs1Config = MtsLs1Config(),
    trace_every: Optional[int] = None,
) -> OptimizerRun:
    """Coordinate-wise line search with a per-variable adaptive step.

    Each sweep probes x_i - step, then x_i + step/2; the step halves when
    neither probe improves and resets when it underflows.  Probes are
    clipped to the bounds.  best_f is non-increasing throughout.
    """
    if not 0.0 < config.step_fraction <= 1.0:
        raise ValidationError("step_fraction must lie in (0, 1]")
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    start = np.asarray(start, dtype=float)
    if (start < lb).any() or (start > ub).any():
        raise FeasibilityError("start point outside the feasible box")
    tracker = _Tracker(trace_every)
    best = np.array(start, copy=True)
    if budget < 1:
        return OptimizerRun(best_x=best, best_f=math.nan, ffe_used=0, trace=None)
    best_f = f(best)
    tracker.record(best, best_f)

    width = ub - lb
    step = config.step_fraction * width
    n = lb.shape[0]
    while tracker.ffe < budget:
        for i in range(n):
            if tracker.ffe >= budget:
                break
            improved = False
            cand = best.copy()
            cand[i] = max(lb[i], best[i] - step[i])
            if cand[i] != best[i]:
                y = f(cand)
                tracker.record(cand, y)
                if y < best_f:
                    best, best_f = cand, y
                    improved = True
            if not improved and tracker.ffe < budget:
                cand = best.copy()
                cand[i] = min(ub[i], best[i] + 0.5 * step[i])
                if cand[i] != best[i]:
                    y = f(cand)
                    tracker.record(cand, y)
                    if y < best_f:
                        best, best_f = cand, y
                        improved = True
            if not improved:
                step[i] *= 0.5
                if step[i] < 1e-14 * width[i]:
                    step[i] = 0.4 * width[i]
    run = tracker.run()
    # the tracker saw every probe, so its best matches the sweep's best
    return run


# ---------------------------------------------------------------------------
# Covariance-adapting evolution strategy (component optimizer)
# ---------------------------------------------------------------------------


class EsState:
    """Resumable rank-based ES with step-size and covariance adaptation.

    Operates in coordinates normalised to the unit box.  Keeps a full
    covariance matrix up to dimension 100 and a diagonal model beyond.
    ``run`` may be called repeatedly; distribution state persists, which is
    what the cooperative frameworks need for their round-based schedule.
    """

    FULL_COV_MAX_DIM = 100

    def __init__(
        self,
        lb: np.ndarray,
        ub: np.ndarray,
        seed,
        x0: Optional[np.ndarray] = None,
        sigma0: float = 0.3,
        popsize: Optional[int] = None,
    ):
        self.lb = np.asarray(lb, dtype=float)
        self.ub = np.asarray(ub, dtype=float)
        d = self.lb.shape[0]
        if d < 1:
            raise ValidationError("dimension must be at least 1")
        if sigma0 < 0.0:
            raise ValidationError("sigma0 must be non-negative")
        self.d = d
        self.width = self.ub - self.lb
        self.rng = np.random.default_rng(seed)
        self.mean = (
            np.full(d, 0.5) if x0 is None else (np.asarray(x0, float) - self.lb) / self.width
        )
        self.sigma = float(sigma0)
        self.lam = popsize if popsize is not None else 4 + int(3 * math.log(d))
        self.lam = max(self.lam, 4)
        mu = self.lam // 2
        w = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        self.weights = w / w.sum()
        self.mu = mu
        self.mueff = 1.0 / float(np.sum(self.weights**2))
        self.cc = (4 + self.mueff / d) / (d + 4 + 2 * self.mueff / d)
        self.cs = (self.mueff + 2) / (d + self.mueff + 5)
        self.c1 = 2 / ((d + 1.3) ** 2 + self.mueff)
        self.cmu = min(
            1 - self.c1,
            2 * (self.mueff - 2 + 1 / self.mueff) / ((d + 2) ** 2 + self.mueff),
        )
        self.damps = (
            1 + 2 * max(0.0, math.sqrt((self.mueff - 1) / (d + 1)) - 1) + self.cs
        )
        self.chi_n = math.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d * d))
        self.diagonal = d > self.FULL_COV_MAX_DIM
        if self.diagonal:
            self.c_diag = np.ones(d)
        else:
            self.cov = np.eye(d)
            self._decompose()
        self.pc = np.zeros(d)
        self.ps = np.zeros(d)
        self.gen = 0
        self.best_x: Optional[np.ndarray] = None
        self.best_f = math.inf
        self.ffe = 0

    def _decompose(self) -> None:
        self.cov = (self.cov + self.cov.T) / 2.0
        vals, vecs = np.linalg.eigh(self.cov)
        vals = np.maximum(vals, 1e-20)
        self._b = vecs
        self._d = np.sqrt(vals)

    def _denorm(self, y: np.ndarray) -> np.ndarray:
        return self.lb + y * self.width

    def run(
        self,
        f: Objective,
        max_ffe: Optional[int] = None,
        max_iters: Optional[int] = None,
        tracker: Optional[_Tracker] = None,
    ) -> int:
        """Advance the strategy; returns the number of FFEs consumed.

        Stops when either limit is reached (at least one must be given).
        A generation cut short by the FFE limit updates the incumbent but
        not the distribution.
        """
        if max_ffe is None and max_iters is None:
            raise ValidationError("need an FFE or iteration limit")
        used = 0
        iters = 0
        while True:
            if max_iters is not None and iters >= max_iters:
                break
            if max_ffe is not None and used >= max_ffe:
                break
            allowance = math.inf if max_ffe is None else max_ffe - used
            n_eval = int(min(self.lam, allowance))
            zs = self.rng.standard_normal((self.lam, self.d))
            if self.diagonal:
                ys = self.mean + self.sigma * zs * np.sqrt(self.c_diag)
            else:
                ys = self.mean + self.sigma * (zs * self._d) @ self._b.T
            np.clip(ys, 0.0, 1.0, out=ys)
            fs = np.empty(self.lam)
            for j in range(n_eval):
                x = self._denorm(ys[j])
                fs[j] = f(x)
                used += 1
                self.ffe += 1
                if tracker is not None:
                    tracker.record(x, fs[j])
                if fs[j] < self.best_f:
                    self.best_f = fs[j]
                    self.best_x = x.copy()
            if n_eval < self.lam:
                break  # truncated generation: no distribution update
            iters += 1
            self.gen += 1
            if self.sigma <= 0.0:
                continue
            order = np.argsort(fs, kind="stable")
            sel = ys[order[: self.mu]]
            old_mean = self.mean
            self.mean = self.weights @ sel
            y_w = (self.mean - old_mean) / self.sigma
            if self.diagonal:
                ps_step = y_w / np.sqrt(self.c_diag)
            else:
                ps_step = self._b @ ((self._b.T @ y_w) / self._d)
            self.ps = (1 - self.cs) * self.ps + math.sqrt(
                self.cs * (2 - self.cs) * self.mueff
            ) * ps_step
            ps_norm = float(np.linalg.norm(self.ps))
            hs = ps_norm / math.sqrt(
                1 - (1 - self.cs) ** (2 * self.gen)
            ) < (1.4 + 2 / (self.d + 1)) * self.chi_n
            self.pc = (1 - self.cc) * self.pc + (
                math.sqrt(self.cc * (2 - self.cc) * self.mueff) * y_w if hs else 0.0
            )
            artifacts = (sel - old_mean) / self.sigma
            if self.diagonal:
                rank_mu = self.weights @ (artifacts**2)
                self.c_diag = (
                    (1 - self.c1 - self.cmu) * self.c_diag
                    + self.c1 * self.pc**2
                    + self.cmu * rank_mu
                )
                self.c_diag = np.maximum(self.c_diag, 1e-20)
            else:
                rank_mu = np.einsum("k,ki,kj->ij", self.weights, artifacts, artifacts)
                self.cov = (
                    (1 - self.c1 - self.cmu) * self.cov
                    + self.c1 * np.outer(self.pc, self.pc)
                    + self.cmu * rank_mu
                )
                self._decompose()
            self.sigma *= math.exp((self.cs / self.damps) * (ps_norm / self.chi_n - 1))
            self.sigma = min(max(self.sigma, 1e-14), 10.0)
        return used


def es_component_optimize(
    f: Objective,
    lb: np.ndarray,
    ub: np.ndarray,
    max_ffe: Optional[int] = None,
    max_iters: Optional[int] = None,
    seed=0,
    x0: Optional[np.ndarray] = None,
    sigma0: float = 0.3,
    popsize: Optional[int] = None,
    trace_every: Optional[int] = None,
) -> OptimizerRun:
    """One-shot run of the covariance-adapting ES.

    The stopping unit (FFEs or iterations) is the caller's choice, which
    lets the same optimizer serve both round-based cooperative frameworks.
    """
    state = EsState(lb, ub, seed, x0=x0, sigma0=sigma0, popsize=popsize)
    tracker = _Tracker(trace_every)
    state.run(f, max_ffe=max_ffe, max_iters=max_iters, tracker=tracker)
    if state.best_x is None:
        start = state._denorm(state.mean)
        return OptimizerRun(best_x=start, best_f=math.nan, ffe_used=0, trace=None)
    run = tracker.run()
    run.best_x = state.best_x
    run.best_f = state.best_f
    run.ffe_used = state.ffe
    return run


# ---------------------------------------------------------------------------
# High-quality starting point for decomposition
# ---------------------------------------------------------------------------


def find_xhq(f: Objective, lb: np.ndarray, ub: np.ndarray, config) -> OptimizerRun:
    """Global search then local refinement to seed the decomposition.

    ``config`` provides ``bootstrap_global_ffe``, ``bootstrap_local_ffe``
    and ``seed``.  With both budgets zero the fallback is a uniform random
    feasible vector (zero FFEs).
    """
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    global_ffe = int(config.bootstrap_global_ffe)
    local_ffe = int(config.bootstrap_local_ffe)
    rng = np.random.default_rng(config.seed)
    if global_ffe + local_ffe == 0:
        return OptimizerRun(
            best_x=rng.uniform(lb, ub), best_f=math.nan, ffe_used=0, trace=None
        )
    best: Optional[np.ndarray] = None
    best_f = math.inf
    used = 0
    if global_ffe >= 4:
        pop = min(100, global_ffe)
        run = shade_optimize(
            f,
            lb,
            ub,
            global_ffe,
            ShadeConfig(pop_size=pop, seed=int(rng.integers(2**63))),
        )
        best, best_f, used = run.best_x, run.best_f, run.ffe_used
    if best is None:
        best = rng.uniform(lb, ub)
    if local_ffe > 0:
        run = mts_ls1(f, lb, ub, best, local_ffe)
        if run.ffe_used and run.best_f <= best_f:
            best, best_f = run.best_x, run.best_f
        used += run.ffe_used
    return OptimizerRun(best_x=best, best_f=best_f, ffe_used=used, trace=None)
