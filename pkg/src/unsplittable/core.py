"""Problem model for Unsplittable Flow: graphs, tasks, instances, routings.

Instances and routings round-trip through JSON documents::

    {"num_vertices": 3, "edges": [[0, 1, 2], [1, 2, 1]],
     "tasks": [[0, 2, 1, 5]], "target": 5, "max_route_length": 3}

    {"routes": [{"task": 0, "path": [0, 1, 2]}]}
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Edge = Tuple[int, int]


class InputError(ValueError):
    """Malformed or inconsistent input."""


class LimitExceeded(RuntimeError):
    """A configured search or memory budget would be exceeded."""


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class CapacitatedGraph:
    """Simple undirected graph on vertices ``0..vertex_count-1`` with integer
    edge capacities."""

    __slots__ = ("vertex_count", "capacity", "_adj")

    def __init__(self, vertex_count: int, edges: Iterable[Tuple[int, int, int]] = ()):
        if vertex_count < 0:
            raise InputError("vertex_count must be nonnegative")
        self.vertex_count = vertex_count
        capacity: Dict[Edge, int] = {}
        adj: List[set] = [set() for _ in range(vertex_count)]
        for u, v, cap in edges:
            u, v, cap = int(u), int(v), int(cap)
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise InputError(f"edge ({u}, {v}) has an endpoint out of range")
            if cap < 0:
                raise InputError(f"edge ({u}, {v}) has negative capacity {cap}")
            key = edge_key(u, v)
            if key in capacity:
                raise InputError(f"duplicate edge {key}")
            capacity[key] = cap
            adj[u].add(v)
            adj[v].add(u)
        self.capacity = capacity
        self._adj = tuple(frozenset(a) for a in adj)

    @property
    def edges(self) -> List[Edge]:
        return sorted(self.capacity)

    def neighbors(self, v: int) -> frozenset:
        return self._adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.capacity

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    @property
    def max_capacity(self) -> int:
        return max(self.capacity.values(), default=0)

    def __eq__(self, other):
        if not isinstance(other, CapacitatedGraph):
            return NotImplemented
        return self.vertex_count == other.vertex_count and self.capacity == other.capacity

    def __hash__(self):
        return hash((self.vertex_count, frozenset(self.capacity.items())))

    def __repr__(self):
        return f"CapacitatedGraph(n={self.vertex_count}, m={len(self.capacity)})"


@dataclass(frozen=True)
class Task:
    source: int
    target: int
    demand: int
    profit: int

    def __post_init__(self):
        if self.source == self.target:
            raise InputError(f"task endpoints coincide at vertex {self.source}")
        if self.demand < 0 or self.profit < 0:
            raise InputError("task demand and profit must be nonnegative")

    @property
    def endpoints(self) -> Tuple[int, int]:
        return (self.source, self.target)


@dataclass(frozen=True)
class Instance:
    graph: CapacitatedGraph
    tasks: Tuple[Task, ...]
    target: int = 0
    max_route_length: Optional[int] = None
    provenance: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if self.max_route_length is None:
            object.__setattr__(self, "max_route_length", self.graph.vertex_count)
        if self.target < 0:
            raise InputError("target must be nonnegative")
        if self.max_route_length < 0:
            raise InputError("max_route_length must be nonnegative")
        n = self.graph.vertex_count
        for i, z in enumerate(self.tasks):
            if not (0 <= z.source < n and 0 <= z.target < n):
                raise InputError(f"task {i} has an endpoint out of range")

    @property
    def max_capacity(self) -> int:
        return self.graph.max_capacity

    @property
    def max_degree(self) -> int:
        return self.graph.max_degree

    def with_max_route_length(self, length: int) -> "Instance":
        return Instance(self.graph, self.tasks, self.target, length, self.provenance)


@dataclass(frozen=True)
class Routing:
    """Selected tasks (by index) mapped to vertex paths."""

    routes: Mapping[int, Tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "routes", {int(k): tuple(int(x) for x in p) for k, p in dict(self.routes).items()}
        )

    def __len__(self):
        return len(self.routes)


@dataclass(frozen=True)
class Violation:
    kind: str  # overload | too_long | endpoint_mismatch | non_edge | not_simple
    task: Optional[int] = None
    edge: Optional[Edge] = None
    detail: str = ""

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "detail": self.detail}
        if self.task is not None:
            d["task"] = self.task
        if self.edge is not None:
            d["edge"] = list(self.edge)
        return d


@dataclass(frozen=True)
class VerificationReport:
    valid: bool
    profit: int
    violations: Tuple[Violation, ...] = ()

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "profit": self.profit,
            "violations": [v.to_dict() for v in self.violations],
        }


def path_edges(path: Sequence[int]) -> List[Edge]:
    return [edge_key(a, b) for a, b in zip(path, path[1:])]


def _check_indices(instance: Instance, routing: Routing) -> None:
    n = instance.graph.vertex_count
    for idx, path in routing.routes.items():
        if not 0 <= idx < len(instance.tasks):
            raise InputError(f"routing refers to unknown task {idx}")
        for x in path:
            if not 0 <= x < n:
                raise InputError(f"vertex {x} in route of task {idx} is out of range")


def edge_loads(instance: Instance, routing: Routing) -> Dict[Edge, int]:
    """Total demand routed over every edge of the graph (unused edges map to 0).

    Steps between non-adjacent vertices are ignored here; ``verify_routing``
    reports them.
    """
    _check_indices(instance, routing)
    loads = dict.fromkeys(instance.graph.capacity, 0)
    for idx, path in routing.routes.items():
        d = instance.tasks[idx].demand
        for e in path_edges(path):
            if e in loads:
                loads[e] += d
    return loads


def verify_routing(instance: Instance, routing: Routing) -> VerificationReport:
    _check_indices(instance, routing)
    graph = instance.graph
    violations: List[Violation] = []
    profit = 0
    for idx in sorted(routing.routes):
        path = routing.routes[idx]
        task = instance.tasks[idx]
        profit += task.profit
        if len(path) < 2 or path[0] != task.source or path[-1] != task.target:
            violations.append(Violation("endpoint_mismatch", task=idx,
                                        detail=f"path {list(path)} does not join {task.source} and {task.target}"))
        if len(set(path)) != len(path):
            violations.append(Violation("not_simple", task=idx, detail="path repeats a vertex"))
        for a, b in zip(path, path[1:]):
            if not graph.has_edge(a, b):
                violations.append(Violation("non_edge", task=idx, edge=edge_key(a, b),
                                            detail=f"{a}-{b} is not an edge"))
        if len(path) - 1 > instance.max_route_length:
            violations.append(Violation("too_long", task=idx,
                                        detail=f"length {len(path) - 1} > {instance.max_route_length}"))
    for e, load in sorted(edge_loads(instance, routing).items()):
        if load > graph.capacity[e]:
            violations.append(Violation("overload", edge=e,
                                        detail=f"load {load} > capacity {graph.capacity[e]}"))
    return VerificationReport(not violations, profit, tuple(violations))


# -- documents ---------------------------------------------------------------

def _require(doc: Mapping, key: str):
    if key not in doc:
        raise InputError(f"missing field {key!r}")
    return doc[key]


def instance_from_dict(doc: Mapping) -> Instance:
    if not isinstance(doc, Mapping):
        raise InputError("instance document must be an object")
    try:
        n = int(_require(doc, "num_vertices"))
        edges = [tuple(int(x) for x in e) for e in _require(doc, "edges")]
        tasks = [Task(*(int(x) for x in t)) for t in _require(doc, "tasks")]
        target = int(doc.get("target", 0))
        length = doc.get("max_route_length")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed instance document: {exc}") from exc
    for e in edges:
        if len(e) != 3:
            raise InputError(f"edge entry {list(e)} must be [u, v, capacity]")
    graph = CapacitatedGraph(n, edges)
    return Instance(graph, tasks, target, None if length is None else int(length),
                    doc.get("provenance"))


def instance_to_dict(instance: Instance) -> dict:
    g = instance.graph
    doc = {
        "num_vertices": g.vertex_count,
        "edges": [[u, v, g.capacity[(u, v)]] for u, v in g.edges],
        "tasks": [[z.source, z.target, z.demand, z.profit] for z in instance.tasks],
        "target": instance.target,
        "max_route_length": instance.max_route_length,
    }
    if instance.provenance is not None:
        doc["provenance"] = instance.provenance
    return doc


def routing_from_dict(doc: Mapping) -> Routing:
    try:
        routes = {}
        for item in _require(doc, "routes"):
            idx = int(item["task"])
            if idx in routes:
                raise InputError(f"task {idx} routed twice")
            routes[idx] = tuple(int(x) for x in item["path"])
    except (TypeError, KeyError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed routing document: {exc}") from exc
    return Routing(routes)


def routing_to_dict(routing: Routing) -> dict:
    return {"routes": [{"task": k, "path": list(routing.routes[k])} for k in sorted(routing.routes)]}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=None, separators=(", ", ": ")) + "\n"


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not a JSON document: {exc}") from exc


def parse_instance(text: str) -> Instance:
    return instance_from_dict(loads(text))


def serialize_instance(instance: Instance) -> str:
    return dumps(instance_to_dict(instance))


def parse_routing(text: str) -> Routing:
    return routing_from_dict(loads(text))


def serialize_routing(routing: Routing) -> str:
    return dumps(routing_to_dict(routing))
