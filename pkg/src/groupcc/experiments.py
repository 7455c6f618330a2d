"""Experiment orchestration and result records.

An experiment names a problem, a decomposer, an optional cooperative
framework, a budget and a repetition count; running it produces one
record per seed.  Records serialize deterministically (timing is kept
out of the primary artifacts) so reruns are byte-comparable.
"""

from __future__ import annotations

import hashlib
import json
import statistics
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .baselines import FvilConfig, Rdg3Config, fvil_decompose, rdg3_decompose
from .cc import CcConfig, cc_run, cc_trace_csv
from .errors import ConfigError
from .irrg import Decomposition, IrrgConfig, irrg
from .metrics import score
from .optimizers import es_component_optimize, trace_csv
from .problems import ProblemInstance, load_problem

DECOMPOSERS = ("irrg", "rdg3", "fvil", "none")
FRAMEWORKS = ("cbcc", "ccfr2", "mono")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    problem: Union[str, dict]
    decomposer: str = "irrg"
    decomposer_config: dict = field(default_factory=dict)
    framework: Optional[str] = None
    framework_config: dict = field(default_factory=dict)
    budget: int = 0
    repetitions: int = 1
    seed_base: int = 0

    def validate(self) -> None:
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.decomposer not in DECOMPOSERS:
            raise ConfigError(f"unknown decomposer {self.decomposer!r}")
        if self.framework is not None and self.framework not in FRAMEWORKS:
            raise ConfigError(f"unknown framework {self.framework!r}")
        if self.framework is not None and self.budget <= 0:
            raise ConfigError("optimization experiments need a positive budget")

    def fingerprint(self) -> str:
        doc = {
            "name": self.name,
            "problem": self.problem,
            "decomposer": self.decomposer,
            "decomposer_config": self.decomposer_config,
            "framework": self.framework,
            "framework_config": self.framework_config,
            "budget": self.budget,
            "repetitions": self.repetitions,
            "seed_base": self.seed_base,
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {
            "name",
            "problem",
            "decomposer",
            "decomposer_config",
            "framework",
            "framework_config",
            "budget",
            "repetitions",
            "seed_base",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class RunRecord:
    fingerprint: str
    name: str
    problem: str
    decomposer: str
    framework: Optional[str]
    seed: int
    decomposition: dict
    scores: Optional[dict]
    best_f: Optional[float]
    ffe_total: int
    warning: Optional[str]
    wall_time: float
    trace_ref: Optional[str] = None

    def to_dict(self, include_timing: bool = False) -> dict:
        doc = {
            "fingerprint": self.fingerprint,
            "name": self.name,
            "problem": self.problem,
            "decomposer": self.decomposer,
            "framework": self.framework,
            "seed": self.seed,
            "decomposition": self.decomposition,
            "scores": self.scores,
            "best_f": self.best_f,
            "ffe_total": self.ffe_total,
            "warning": self.warning,
            "trace_ref": self.trace_ref,
        }
        if include_timing:
            doc["wall_time"] = self.wall_time
        return doc

    def to_json(self, include_timing: bool = False) -> str:
        return (
            json.dumps(
                self.to_dict(include_timing), sort_keys=True, separators=(",", ":")
            )
            + "\n"
        )


def _build_problem(source: Union[str, dict], seed: int) -> ProblemInstance:
    if isinstance(source, str) and not source.endswith(".json"):
        return load_problem({"kind": "fixture", "name": source, "seed": seed})
    return load_problem(source, seed=seed)


def run_decomposer(
    instance: ProblemInstance, name: str, cfg: dict, seed: int
) -> Decomposition:
    if name == "irrg":
        return irrg(instance, IrrgConfig(**{**cfg, "seed": seed}))
    if name == "rdg3":
        return rdg3_decompose(instance, Rdg3Config(**cfg), seed=seed)
    if name == "fvil":
        return fvil_decompose(instance, FvilConfig(**cfg), seed=seed)
    if name == "none":
        return Decomposition(
            seps=[],
            nonseps=[tuple(range(instance.n))],
            ffe_cost=0,
            iterations=0,
            seed=seed,
        )
    raise ConfigError(f"unknown decomposer {name!r}")


def _decomposition_doc(d: Decomposition) -> dict:
    return json.loads(d.to_json())


def _score_against_truth(instance: ProblemInstance, d: Decomposition):
    if instance.theta_star is None:
        return None
    return score(d.interaction_matrix(instance.n), instance.theta_star).as_dict()


def _opt_seed(seed: int) -> int:
    # stage-separated child seed so decomposition and optimization streams differ
    return int(np.random.SeedSequence([seed, 0x0C]).generate_state(1)[0])


def run_decomposition_experiment(config: ExperimentConfig) -> list[RunRecord]:
    """Repeat a decomposition with consecutive seeds and score each run."""
    config.validate()
    records = []
    fp = config.fingerprint()
    for rep in range(config.repetitions):
        seed = config.seed_base + rep
        instance = _build_problem(config.problem, seed)
        t0 = time.perf_counter()
        decomposition = run_decomposer(
            instance, config.decomposer, config.decomposer_config, seed
        )
        records.append(
            RunRecord(
                fingerprint=fp,
                name=config.name,
                problem=instance.name,
                decomposer=config.decomposer,
                framework=None,
                seed=seed,
                decomposition=_decomposition_doc(decomposition),
                scores=_score_against_truth(instance, decomposition),
                best_f=None,
                ffe_total=decomposition.ffe_cost,
                warning=decomposition.warning,
                wall_time=time.perf_counter() - t0,
            )
        )
    return records


def run_optimization_experiment(
    config: ExperimentConfig, trace_sink: Optional[dict] = None
) -> list[RunRecord]:
    """Decompose, then optimize within the remaining budget.

    Decomposition FFEs are charged against the total; a run whose budget
    is exhausted by decomposition is flagged and skips optimization.
    ``trace_sink``, when given, collects per-seed convergence CSV text.
    """
    config.validate()
    if config.framework is None:
        raise ConfigError("optimization experiments need a framework")
    records = []
    fp = config.fingerprint()
    for rep in range(config.repetitions):
        seed = config.seed_base + rep
        instance = _build_problem(config.problem, seed)
        t0 = time.perf_counter()
        decomposition = run_decomposer(
            instance, config.decomposer, config.decomposer_config, seed
        )
        remaining = config.budget - decomposition.ffe_cost
        warning = decomposition.warning
        best_f = None
        if remaining <= 0:
            warning = "budget exhausted during decomposition"
        elif config.framework == "mono":
            run = es_component_optimize(
                instance,
                instance.lb,
                instance.ub,
                max_ffe=remaining,
                seed=_opt_seed(seed),
                trace_every=(1000 if trace_sink is not None else None),
                **config.framework_config,
            )
            best_f = run.best_f
            if trace_sink is not None:
                trace_sink[seed] = trace_csv(run)
        else:
            cc_config = CcConfig(
                framework=config.framework,
                total_budget=remaining,
                seed=_opt_seed(seed),
                **config.framework_config,
            )
            rounds = [] if trace_sink is not None else None
            run = cc_run(instance, decomposition, cc_config, trace=rounds)
            best_f = run.best_f
            if trace_sink is not None:
                trace_sink[seed] = cc_trace_csv(rounds)
        records.append(
            RunRecord(
                fingerprint=fp,
                name=config.name,
                problem=instance.name,
                decomposer=config.decomposer,
                framework=config.framework,
                seed=seed,
                decomposition=_decomposition_doc(decomposition),
                scores=_score_against_truth(instance, decomposition),
                best_f=best_f,
                ffe_total=instance.evals,
                warning=warning,
                wall_time=time.perf_counter() - t0,
            )
        )
    return records


def run_experiment(config: ExperimentConfig) -> list[RunRecord]:
    if config.framework is None:
        return run_decomposition_experiment(config)
    return run_optimization_experiment(config)


def _summary_cell(values: list[Optional[float]], stat: str) -> str:
    clean = [v for v in values if v is not None]
    if len(clean) != len(values) or not clean:
        return "NA"
    if stat == "med":
        out = statistics.median(clean)
    elif stat == "avg":
        out = statistics.fmean(clean)
    else:
        out = statistics.pstdev(clean) if len(clean) > 1 else 0.0
    return f"{out:.6g}"


def summarize(records: list[RunRecord]) -> str:
    """Med/Avg/Std summary CSV over records grouped by experiment name."""
    header = (
        "name,problem,decomposer,framework,runs,"
        "best_f_med,best_f_avg,best_f_std,"
        "rho1_med,rho2_med,rho3_med,ffe_med\n"
    )
    lines = [header]
    by_name: dict[str, list[RunRecord]] = {}
    for r in records:
        by_name.setdefault(r.name, []).append(r)
    for name in sorted(by_name):
        rs = by_name[name]
        best = [r.best_f for r in rs]
        ffes = [float(r.ffe_total) for r in rs]
        rhos = {k: [] for k in ("rho1", "rho2", "rho3")}
        for r in rs:
            for k in rhos:
                rhos[k].append(None if r.scores is None else r.scores[k])
        row = [
            name,
            rs[0].problem,
            rs[0].decomposer,
            rs[0].framework or "",
            str(len(rs)),
            _summary_cell(best, "med"),
            _summary_cell(best, "avg"),
            _summary_cell(best, "std"),
            _summary_cell(rhos["rho1"], "med"),
            _summary_cell(rhos["rho2"], "med"),
            _summary_cell(rhos["rho3"], "med"),
            _summary_cell(ffes, "med"),
        ]
        lines.append(",".join(row) + "\n")
    return "".join(lines)
