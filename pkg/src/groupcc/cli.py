"""Command line entry point.

Subcommands: ``decompose`` (problem + decomposer + seed to a decomposition
JSON), ``optimize`` (full pipeline to a run-record JSON), ``bench``
(experiment config file to a records directory plus summary CSV),
``routing-gen`` (random routing instance JSON) and ``stats`` (rank-sum +
step-down comparison of two record sets).  All randomness flows from the
declared seeds, and primary outputs carry no timing, so reruns are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError
from .experiments import (
    ExperimentConfig,
    run_decomposer,
    run_experiment,
    run_optimization_experiment,
    summarize,
)
from .problems import fixture_names
from .routing import generate_instance
from .stats import holm_bonferroni, wilcoxon_rank_sum


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _json_arg(raw: str | None) -> dict:
    if not raw:
        return {}
    if os.path.exists(raw):
        with open(raw) as fh:
            return json.load(fh)
    return json.loads(raw)


def _cmd_decompose(args) -> int:
    from .experiments import _build_problem

    instance = _build_problem(args.problem, args.seed)
    decomposition = run_decomposer(
        instance, args.decomposer, _json_arg(args.decomposer_config), args.seed
    )
    _write(args.out, decomposition.to_json())
    return 0


def _cmd_optimize(args) -> int:
    config = ExperimentConfig(
        name=args.name,
        problem=args.problem,
        decomposer=args.decomposer,
        decomposer_config=_json_arg(args.decomposer_config),
        framework=args.framework,
        framework_config=_json_arg(args.framework_config),
        budget=args.budget,
        repetitions=1,
        seed_base=args.seed,
    )
    traces = {} if args.trace_out else None
    records = run_optimization_experiment(config, trace_sink=traces)
    if args.trace_out:
        records[0].trace_ref = args.trace_out
        _write(args.trace_out, traces[args.seed])
    _write(args.out, records[0].to_json())
    return 0


def _cmd_bench(args) -> int:
    with open(args.config) as fh:
        doc = json.load(fh)
    experiments = [ExperimentConfig.from_dict(e) for e in doc["experiments"]]
    os.makedirs(args.out_dir, exist_ok=True)
    records_dir = os.path.join(args.out_dir, "records")
    os.makedirs(records_dir, exist_ok=True)
    all_records = []
    timing_rows = []
    for config in experiments:
        for record in run_experiment(config):
            all_records.append(record)
            path = os.path.join(records_dir, f"{record.name}-seed{record.seed}.json")
            _write(path, record.to_json())
            timing_rows.append(f"{record.name},{record.seed},{record.wall_time:.3f}\n")
    _write(os.path.join(args.out_dir, "summary.csv"), summarize(all_records))
    if args.timings:
        _write(
            os.path.join(args.out_dir, "timings.csv"),
            "name,seed,wall_time\n" + "".join(timing_rows),
        )
    return 0


def _cmd_routing_gen(args) -> int:
    instance = generate_instance(
        topology=(args.nodes, args.links if args.links else 2 * args.nodes),
        demand_count=args.demands,
        paths_per_demand=args.paths,
        capacity_range=(args.capacity_min, args.capacity_max),
        volume_range=(args.volume_min, args.volume_max),
        seed=args.seed,
    )
    _write(args.out, instance.to_json())
    return 0


def _load_records(path: str) -> list[dict]:
    if os.path.isdir(path):
        docs = []
        for fname in sorted(os.listdir(path)):
            if fname.endswith(".json"):
                with open(os.path.join(path, fname)) as fh:
                    docs.append(json.load(fh))
        return docs
    with open(path) as fh:
        doc = json.load(fh)
    return doc if isinstance(doc, list) else [doc]


def _cmd_stats(args) -> int:
    recs_a = _load_records(args.a)
    recs_b = _load_records(args.b)

    def by_problem(recs):
        out: dict[str, list[float]] = {}
        for r in recs:
            if r.get("best_f") is not None:
                out.setdefault(r["problem"], []).append(float(r["best_f"]))
        return out

    a_map, b_map = by_problem(recs_a), by_problem(recs_b)
    problems = sorted(set(a_map) & set(b_map))
    if not problems:
        raise ConfigError("the two record sets share no problems with results")
    p_values = [wilcoxon_rank_sum(a_map[p], b_map[p]) for p in problems]
    rejects = holm_bonferroni(p_values, args.alpha)
    report = {
        "alpha": args.alpha,
        "tests": [
            {
                "problem": prob,
                "n_a": len(a_map[prob]),
                "n_b": len(b_map[prob]),
                "p_value": p,
                "reject": rej,
            }
            for prob, p, rej in zip(problems, p_values, rejects)
        ],
    }
    _write(args.out, json.dumps(report, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_fixtures(args) -> int:
    _write(args.out, "\n".join(fixture_names()) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groupcc")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose a problem into variable groups")
    p.add_argument("--problem", required=True, help="fixture id or problem JSON file")
    p.add_argument("--decomposer", default="irrg", help="irrg, rdg3, fvil or none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decomposer-config", help="JSON string or file of parameters")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("optimize", help="decompose then optimize within a budget")
    p.add_argument("--problem", required=True)
    p.add_argument("--decomposer", default="irrg")
    p.add_argument("--decomposer-config")
    p.add_argument("--framework", default="cbcc", help="cbcc, ccfr2 or mono")
    p.add_argument("--framework-config")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default="run")
    p.add_argument("--out")
    p.add_argument("--trace-out", help="write the convergence trace CSV here")
    p.set_defaults(fn=_cmd_optimize)

    p = sub.add_parser("bench", help="run an experiment config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--timings", action="store_true", help="also write timings.csv")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("routing-gen", help="generate a random routing instance")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--links", type=int, default=0, help="defaults to twice the nodes")
    p.add_argument("--demands", type=int, required=True)
    p.add_argument("--paths", type=int, required=True)
    p.add_argument("--capacity-min", type=float, default=1e6)
    p.add_argument("--capacity-max", type=float, default=5e8)
    p.add_argument("--volume-min", type=float, default=1.0)
    p.add_argument("--volume-max", type=float, default=50.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_routing_gen)

    p = sub.add_parser("stats", help="compare two record sets")
    p.add_argument("--a", required=True, help="record file or directory")
    p.add_argument("--b", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("fixtures", help="list the registered problem fixtures")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_fixtures)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
