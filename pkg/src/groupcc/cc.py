"""Contribution-based cooperative co-evolution drivers.

Components (the groups of a decomposition) are optimized one round at a
time against a shared context vector; the next component is always the
one with the largest smoothed contribution.  The two framework flavours
differ in their round unit and in whether a contribution is normalised
by the evaluations it cost.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError
from .irrg import Decomposition
from .optimizers import EsState, OptimizerRun, _Tracker
from .problems import ProblemInstance

FRAMEWORKS = ("cbcc", "ccfr2")


@dataclass(frozen=True)
class CcConfig:
    framework: str = "cbcc"
    #: Contribution smoothing factor.
    w: float = 0.5
    #: FFEs per round for cbcc; optimizer iterations per round for ccfr2.
    round_unit: int = 1000
    total_budget: int = 100_000
    seed: int = 0

    def validate(self) -> None:
        if self.framework not in FRAMEWORKS:
            raise ValidationError(f"unknown framework {self.framework!r}")
        if not 0.0 <= self.w <= 1.0:
            raise ValidationError("w must lie in [0, 1]")
        if self.round_unit < 1:
            raise ValidationError("round_unit must be positive")
        if self.total_budget <= 0:
            raise ValidationError("total_budget must be positive")


@dataclass
class ComponentState:
    indices: tuple[int, ...]
    optimizer: object
    contribution: float = 0.0
    ffe_spent: int = 0
    last_selected: int = -1


def update_contribution(
    state: ComponentState, new_improvement: float, ffe_delta: int, config: CcConfig
) -> ComponentState:
    """Exponentially smooth a round's improvement into the component record.

    ccfr2 divides the improvement by the evaluations that produced it, so
    cheap gains outrank expensive ones.
    """
    if ffe_delta < 1:
        raise ValidationError("ffe_delta must be at least 1")
    if new_improvement < 0.0:
        warnings.warn("negative improvement clipped to zero", stacklevel=2)
        new_improvement = 0.0
    gain = (
        new_improvement / ffe_delta
        if config.framework == "ccfr2"
        else new_improvement
    )
    state.contribution = config.w * state.contribution + (1.0 - config.w) * gain
    state.ffe_spent += ffe_delta
    return state


def _default_factory(lb, ub, seed, x0):
    return EsState(lb, ub, seed, x0=x0)


def cc_trace_csv(trace: list) -> str:
    """Round trace rows (ffe, best_f, component) as CSV text."""
    return "ffe,best_f,component\n" + "".join(
        f"{ffe},{float(bf)!r},{comp}\n" for ffe, bf, comp in trace
    )


def cc_run(
    f: ProblemInstance,
    decomposition: Decomposition,
    config: CcConfig = CcConfig(),
    component_optimizer: Optional[Callable] = None,
    trace: Optional[list] = None,
) -> OptimizerRun:
    """Cooperatively optimize ``f`` along a decomposition.

    One resumable optimizer per component; a warm-up round touches every
    component once, after which rounds go to the component with the
    maximal contribution (ties to the least recently selected, then the
    lowest index, which degrades to a round-robin on plateaus).  Component
    objectives evaluate through the context vector, so every candidate
    costs one full FFE; the total never exceeds the budget.

    ``trace``, when given, collects (ffe, best_f, component) per round.
    """
    config.validate()
    groups = decomposition.all_groups()
    covered = decomposition.covered()
    if covered != set(range(f.n)) or sum(len(g) for g in groups) != f.n:
        raise ValidationError("decomposition must partition the problem's variables")

    factory = component_optimizer or _default_factory
    ss = np.random.SeedSequence(config.seed)
    children = ss.spawn(len(groups) + 1)
    rng = np.random.default_rng(children[0])
    context = rng.uniform(f.lb, f.ub)
    spent = 0
    f_ctx = f(context)
    spent += 1

    states = []
    for i, g in enumerate(groups):
        idx = np.asarray(g, dtype=np.intp)
        states.append(
            ComponentState(
                indices=tuple(g),
                optimizer=factory(f.lb[idx], f.ub[idx], children[i + 1], context[idx]),
            )
        )

    round_no = 0

    def run_round(i: int) -> int:
        nonlocal f_ctx, spent, round_no
        remaining = config.total_budget - spent
        if remaining <= 0:
            return 0
        state = states[i]
        idx = np.asarray(state.indices, dtype=np.intp)

        def component_objective(xc: np.ndarray) -> float:
            full = context.copy()
            full[idx] = xc
            return f(full)

        max_ffe = remaining
        max_iters = None
        if config.framework == "cbcc":
            max_ffe = min(config.round_unit, remaining)
        else:
            max_iters = config.round_unit
        before = f_ctx
        tracker = _Tracker()
        used = state.optimizer.run(
            component_objective, max_ffe=max_ffe, max_iters=max_iters, tracker=tracker
        )
        spent += used
        if used and tracker.best_f < f_ctx:
            context[idx] = tracker.best_x
            f_ctx = tracker.best_f
        improvement = before - f_ctx
        if math.isnan(improvement):  # penalty plateau: inf stayed inf
            improvement = 0.0
        elif math.isinf(improvement):  # escaped the penalty region
            improvement = 1e300
        update_contribution(state, max(0.0, improvement), max(1, used), config)
        round_no += 1
        state.last_selected = round_no
        if trace is not None:
            trace.append((spent, f_ctx, i))
        return used

    for i in range(len(states)):  # warm-up pass
        if spent >= config.total_budget:
            break
        run_round(i)

    while spent < config.total_budget:
        best = min(
            range(len(states)),
            key=lambda i: (-states[i].contribution, states[i].last_selected, i),
        )
        if run_round(best) == 0:
            break

    return OptimizerRun(best_x=context, best_f=f_ctx, ffe_used=spent, trace=None)
