"""Brute-force exact solver used as ground truth for the dynamic programs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Collection, List, Optional, Tuple

from .core import CapacitatedGraph, Edge, InputError, Instance, LimitExceeded, Routing, edge_key, path_edges

DEFAULT_BUDGET = 10 ** 8


@dataclass(frozen=True)
class OptimalResult:
    optimum: int
    witness: Routing
    decision: bool
    stats: dict = field(default_factory=dict, compare=False)


def enumerate_paths(graph: CapacitatedGraph, s: int, t: int, max_length: int,
                    allowed_edges: Optional[Collection[Edge]] = None) -> List[Tuple[int, ...]]:
    """All simple s-t paths with at most ``max_length`` edges, in lexicographic order.

    ``allowed_edges`` restricts the search to a subgraph.
    """
    n = graph.vertex_count
    if not (0 <= s < n and 0 <= t < n):
        raise InputError("path endpoints out of range")
    if s == t:
        raise InputError("path endpoints must differ")
    out: List[Tuple[int, ...]] = []
    path = [s]
    on_path = {s}

    def extend(x: int) -> None:
        if len(path) - 1 == max_length:
            return
        for y in sorted(graph.neighbors(x)):
            if y in on_path:
                continue
            if allowed_edges is not None and edge_key(x, y) not in allowed_edges:
                continue
            path.append(y)
            if y == t:
                out.append(tuple(path))
            else:
                on_path.add(y)
                extend(y)
                on_path.discard(y)
            path.pop()

    extend(s)
    return out


def solve_exhaustive(instance: Instance, budget: int = DEFAULT_BUDGET) -> OptimalResult:
    """Try every subset of tasks with every combination of bounded-length paths.

    Branch-and-bound on the remaining profit keeps it usable; the bound never
    discards an optimal branch.
    """
    graph = instance.graph
    tasks = instance.tasks
    path_lists: List[List[Tuple[int, ...]]] = []
    space = 1
    for z in tasks:
        paths = enumerate_paths(graph, z.source, z.target, instance.max_route_length)
        path_lists.append(paths)
        space *= 1 + len(paths)
        if space > budget:
            raise LimitExceeded(f"exhaustive search space exceeds budget {budget}")
    options = [[path_edges(p) for p in paths] for paths in path_lists]

    order = sorted(range(len(tasks)), key=lambda i: (-tasks[i].profit, i))
    suffix = [0] * (len(order) + 1)
    for pos in range(len(order) - 1, -1, -1):
        i = order[pos]
        suffix[pos] = suffix[pos + 1] + (tasks[i].profit if options[i] else 0)

    residual = dict(graph.capacity)
    choice: List[int] = [-1] * len(tasks)
    best = [-1, list(choice)]

    def search(pos: int, profit: int) -> None:
        if profit + suffix[pos] <= best[0]:
            return
        if pos == len(order):
            best[0] = profit
            best[1] = list(choice)
            return
        i = order[pos]
        z = tasks[i]
        for k, edges in enumerate(options[i]):
            if all(residual[e] >= z.demand for e in edges):
                for e in edges:
                    residual[e] -= z.demand
                choice[i] = k
                search(pos + 1, profit + z.profit)
                choice[i] = -1
                for e in edges:
                    residual[e] += z.demand
        search(pos + 1, profit)

    search(0, 0)
    optimum, picks = best
    routes = {i: path_lists[i][k] for i, k in enumerate(picks) if k >= 0}
    return OptimalResult(optimum, Routing(routes), optimum >= instance.target)


def count_paths(graph: CapacitatedGraph, s: int, t: int, max_length: int) -> int:
    return len(enumerate_paths(graph, s, t, max_length))


def search_space(instance: Instance) -> int:
    space = 1
    for z in instance.tasks:
        space *= 1 + count_paths(instance.graph, z.source, z.target, instance.max_route_length)
    return space
