"""Multi-path routing over a capacitated network as a box-bounded problem.

Each demand's traffic splits across precomputed candidate paths.  A
ranking-based decoder maps unit-box decision variables to path fractions
that always sum to one, and the objective is the average-delay function
with an infinite penalty on any saturated link (the penalty interacts
with ranking comparisons through the interaction-core infinity rules).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import networkx as nx
import numpy as np

from .errors import GenerationError, StructureError, ValidationError
from .interaction import InteractionMatrix
from .problems import ProblemInstance


@dataclass(frozen=True)
class Link:
    id: int
    u: int
    v: int
    capacity: float

    def other(self, node: int) -> int:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise StructureError(f"link {self.id} does not touch node {node}")


@dataclass(frozen=True)
class Network:
    nodes: int
    links: tuple[Link, ...]

    def __post_init__(self) -> None:
        for e in self.links:
            if e.capacity <= 0.0:
                raise StructureError(f"link {e.id} has non-positive capacity")
            if not (0 <= e.u < self.nodes and 0 <= e.v < self.nodes):
                raise StructureError(f"link {e.id} has invalid endpoints")

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.nodes))
        for e in self.links:
            g.add_edge(e.u, e.v, link_id=e.id)
        return g


@dataclass(frozen=True)
class Demand:
    src: int
    dst: int
    volume: float
    paths: tuple[tuple[int, ...], ...]  # link-id sequences


def _validate_path(network: Network, demand: Demand, path: Sequence[int]) -> None:
    by_id = {e.id: e for e in network.links}
    if len(set(path)) != len(path):
        raise StructureError("path repeats a link")
    node = demand.src
    for link_id in path:
        node = by_id[link_id].other(node)
    if node != demand.dst:
        raise StructureError(
            f"path {list(path)} does not connect {demand.src} to {demand.dst}"
        )


@dataclass
class RoutingInstance:
    network: Network
    demands: tuple[Demand, ...]
    name: str = "routing"
    theta_star: Optional[InteractionMatrix] = None

    def __post_init__(self) -> None:
        for d in self.demands:
            if d.volume <= 0.0:
                raise StructureError("demand volumes must be positive")
            if len(d.paths) < 2:
                raise StructureError("each demand needs at least two candidate paths")
            for p in d.paths:
                _validate_path(self.network, d, p)
        self.offsets = []
        pos = 0
        for d in self.demands:
            self.offsets.append((pos, pos + len(d.paths) - 1))
            pos += len(d.paths) - 1
        self.dimension = pos

    def as_problem_instance(self) -> ProblemInstance:
        return ProblemInstance(
            n=self.dimension,
            lb=np.zeros(self.dimension),
            ub=np.ones(self.dimension),
            evaluator=lambda z: evaluate_delay(self, z),
            theta_star=self.theta_star,
            name=self.name,
        )

    def to_json(self) -> str:
        doc = {
            "nodes": self.network.nodes,
            "links": [
                {"id": e.id, "endpoints": [e.u, e.v], "capacity": e.capacity}
                for e in self.network.links
            ],
            "demands": [
                {
                    "src": d.src,
                    "dst": d.dst,
                    "volume": d.volume,
                    "paths": [list(p) for p in d.paths],
                }
                for d in self.demands
            ],
            "name": self.name,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RoutingInstance":
        doc = json.loads(text)
        links = tuple(
            Link(
                id=int(e["id"]),
                u=int(e["endpoints"][0]),
                v=int(e["endpoints"][1]),
                capacity=float(e["capacity"]),
            )
            for e in doc["links"]
        )
        demands = tuple(
            Demand(
                src=int(d["src"]),
                dst=int(d["dst"]),
                volume=float(d["volume"]),
                paths=tuple(tuple(int(i) for i in p) for p in d["paths"]),
            )
            for d in doc["demands"]
        )
        return cls(
            network=Network(nodes=int(doc["nodes"]), links=links),
            demands=demands,
            name=doc.get("name", "routing"),
        )


def decode_fractions(z: np.ndarray, path_count: int) -> np.ndarray:
    """Map ``path_count - 1`` unit-box values to fractions that sum to one.

    The smallest value (by ascending order, ties by index) is taken as a
    fraction directly; each later value takes its fraction of what the
    earlier ones left; the final path receives the remainder.  The
    ordering step removes plateaus from the landscape.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (path_count - 1,):
        raise ValidationError(f"need {path_count - 1} values for {path_count} paths")
    if (z < 0.0).any() or (z > 1.0).any():
        raise ValidationError("encoded values must lie in [0, 1]")
    x = np.zeros(path_count)
    order = np.argsort(z, kind="stable")
    used = 0.0
    for rank, p in enumerate(order):
        x[p] = z[p] if rank == 0 else (1.0 - used) * z[p]
        used += x[p]
    x[path_count - 1] = max(0.0, 1.0 - float(x[: path_count - 1].sum()))
    return x


def evaluate_delay(instance: RoutingInstance, z_full: np.ndarray) -> float:
    """Average network delay, or +inf when any link flow reaches capacity."""
    z_full = np.asarray(z_full, dtype=float)
    if z_full.shape != (instance.dimension,):
        raise ValidationError(f"expected {instance.dimension} decision variables")
    if (z_full < 0.0).any() or (z_full > 1.0).any():
        raise ValidationError("decision variables must lie in [0, 1]")
    flows = np.zeros(len(instance.network.links))
    for d, (lo, hi) in zip(instance.demands, instance.offsets):
        fractions = decode_fractions(z_full[lo:hi], len(d.paths))
        for frac, path in zip(fractions, d.paths):
            if frac > 0.0:
                for link_id in path:
                    flows[link_id] += frac * d.volume
    caps = np.asarray([e.capacity for e in instance.network.links])
    if (flows >= caps).any():
        return math.inf
    return float(np.sum(flows / (caps - flows)))


# ---------------------------------------------------------------------------
# Instance generation
# ---------------------------------------------------------------------------


def k_shortest_paths(graph: nx.Graph, src: int, dst: int, k: int) -> list[list[int]]:
    """The k shortest loopless node paths by hop count.

    Equal-hop ties are broken lexicographically on the node sequence,
    which keeps generation deterministic across runs.
    """
    collected: list[list[int]] = []
    try:
        for path in nx.shortest_simple_paths(graph, src, dst):
            if len(collected) >= k:
                kth = sorted(len(p) for p in collected)[k - 1]
                if len(path) > kth:
                    break
            collected.append(path)
    except nx.NetworkXNoPath:
        pass
    collected.sort(key=lambda p: (len(p), tuple(p)))
    return collected[:k]


def _random_connected_network(
    nodes: int, link_count: int, capacity_range: tuple[float, float], rng
) -> Network:
    max_links = nodes * (nodes - 1) // 2
    if link_count < nodes - 1 or link_count > max_links:
        raise GenerationError(
            f"link count {link_count} cannot make a connected simple graph on "
            f"{nodes} nodes"
        )
    order = rng.permutation(nodes)
    edges: set[tuple[int, int]] = set()
    for i in range(1, nodes):  # random spanning tree
        u = int(order[i])
        v = int(order[rng.integers(i)])
        edges.add((min(u, v), max(u, v)))
    while len(edges) < link_count:
        u, v = rng.choice(nodes, size=2, replace=False)
        edges.add((min(int(u), int(v)), max(int(u), int(v))))
    links = tuple(
        Link(
            id=i,
            u=u,
            v=v,
            capacity=float(rng.uniform(capacity_range[0], capacity_range[1])),
        )
        for i, (u, v) in enumerate(sorted(edges))
    )
    return Network(nodes=nodes, links=links)


def generate_instance(
    topology: Union[int, tuple[int, int], Network],
    demand_count: int,
    paths_per_demand: int,
    capacity_range: tuple[float, float] = (1e6, 5e8),
    volume_range: tuple[float, float] = (1.0, 50.0),
    seed: int = 0,
    name: str = "",
) -> RoutingInstance:
    """Random routing instance with k-shortest candidate paths per demand.

    ``topology`` is a node count (links default to twice the nodes), a
    (nodes, links) pair, or a prebuilt network.  Deterministic under the
    seed; raises naming the demand when a node pair has fewer than the
    requested number of simple paths.
    """
    if paths_per_demand < 2:
        raise ValidationError("each demand needs at least two candidate paths")
    if demand_count < 1:
        raise ValidationError("need at least one demand")
    rng = np.random.default_rng(seed)
    if isinstance(topology, Network):
        network = topology
    else:
        nodes, link_count = (
            (topology, 2 * topology) if isinstance(topology, int) else topology
        )
        network = _random_connected_network(nodes, link_count, capacity_range, rng)
    graph = network.graph()
    edge_to_id = {
        (min(e.u, e.v), max(e.u, e.v)): e.id for e in network.links
    }

    demands = []
    for i in range(demand_count):
        src, dst = (int(v) for v in rng.choice(network.nodes, size=2, replace=False))
        volume = float(rng.uniform(volume_range[0], volume_range[1]))
        node_paths = k_shortest_paths(graph, src, dst, paths_per_demand)
        if len(node_paths) < paths_per_demand:
            raise GenerationError(
                f"demand {i} ({src} -> {dst}) admits only {len(node_paths)} simple "
                f"paths, {paths_per_demand} requested"
            )
        link_paths = tuple(
            tuple(
                edge_to_id[(min(a, b), max(a, b))]
                for a, b in zip(p[:-1], p[1:])
            )
            for p in node_paths
        )
        demands.append(Demand(src=src, dst=dst, volume=volume, paths=link_paths))
    return RoutingInstance(
        network=network,
        demands=tuple(demands),
        name=name or f"routing-{network.nodes}n-{demand_count}d-{paths_per_demand}p",
    )


# ---------------------------------------------------------------------------
# The four-node diamond example
# ---------------------------------------------------------------------------


def four_node_example(shared_capacity: float = 5000.0) -> RoutingInstance:
    """Two demands over a diamond network with one shared middle link.

    With an ample shared capacity the two encoded variables are
    independently optimizable (non-additively separable); tightening it
    couples them through the congestion term and the problem becomes
    overlapping.
    """
    links = (
        Link(id=0, u=0, v=1, capacity=115.0),
        Link(id=1, u=0, v=2, capacity=120.0),
        Link(id=2, u=1, v=2, capacity=shared_capacity),
        Link(id=3, u=1, v=3, capacity=130.0),
        Link(id=4, u=2, v=3, capacity=125.0),
    )
    network = Network(nodes=4, links=links)
    demands = (
        Demand(src=0, dst=2, volume=100.0, paths=((1,), (0, 2))),
        Demand(src=1, dst=3, volume=110.0, paths=((3,), (2, 4))),
    )
    separable = shared_capacity >= 1000.0  # ample shared link decouples the demands
    theta = InteractionMatrix.identity(2)
    if not separable:
        theta.link_clique([0, 1])
    return RoutingInstance(
        network=network,
        demands=demands,
        name=f"routing-4node-{int(shared_capacity)}",
        theta_star=theta,
    )


_FIXTURES = {
    "routing-4node-separable": lambda seed=0: four_node_example(5000.0),
    "routing-4node-overlapping": lambda seed=0: four_node_example(220.0),
}


def fixture_names() -> list[str]:
    return sorted(_FIXTURES)


def get_fixture(name: str, seed: int = 0) -> ProblemInstance:
    if name not in _FIXTURES:
        raise ValidationError(f"unknown routing fixture {name!r}")
    return _FIXTURES[name](seed=seed).as_problem_instance()
