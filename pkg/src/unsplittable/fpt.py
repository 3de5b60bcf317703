"""Dynamic program over visible edges for bounded route length.

A record at node ``t`` is ``(lam, omega)``: ``lam`` gives the capacity already
consumed on each edge within distance ``max_route_length`` of the bag by tasks
whose endpoints are both forgotten, and ``omega`` the best profit of such a
routing.  Tasks that become active at a forget or join node are added one at
a time by a second-level DP (the rank steps), each branching over the task's
bounded-length paths.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .core import Edge, InputError, Instance, LimitExceeded, Routing, path_edges
from .oracle import OptimalResult, enumerate_paths
from .treedecomp import FORGET, INTRODUCE, JOIN, LEAF, BoundaryView, NiceTreeDecomposition, boundary_view, validate

log = logging.getLogger(__name__)

DEFAULT_TABLE_LIMIT = 2_000_000
DEFAULT_PATH_LIMIT = 100_000

Lam = Tuple[int, ...]


@dataclass
class FptTable:
    """Records over a fixed edge domain: ``entries[lam] = (omega, back)``."""

    edges: Tuple[Edge, ...]
    entries: Dict[Lam, Tuple[int, object]]

    def __len__(self):
        return len(self.entries)

    def as_dict(self) -> Dict[Tuple[Tuple[Edge, int], ...], int]:
        """``{((edge, load), ...): omega}`` for readable comparisons."""
        return {tuple(zip(self.edges, lam)): omega for lam, (omega, _) in self.entries.items()}


def _keep_best(table: Dict[Lam, Tuple[int, object]], lam: Lam, omega: int, back: object) -> None:
    prev = table.get(lam)
    if prev is None or omega > prev[0]:
        table[lam] = (omega, back)


def newly_active_tasks(node: int, nice: NiceTreeDecomposition, view: BoundaryView,
                       instance: Instance) -> List[int]:
    """Tasks whose endpoints are both forgotten at ``node`` but not at its children."""
    kind = nice.kinds[node]
    ch = nice.children[node]
    out = []
    if kind == FORGET:
        u = nice.vertex[node]
        past_c = view.past[ch[0]]
        for i, z in enumerate(instance.tasks):
            if (z.source == u and z.target in past_c) or (z.target == u and z.source in past_c):
                out.append(i)
    elif kind == JOIN:
        p1, p2 = view.past[ch[0]], view.past[ch[1]]
        for i, z in enumerate(instance.tasks):
            if (z.source in p1 and z.target in p2) or (z.source in p2 and z.target in p1):
                out.append(i)
    return out


def rank_step(table: FptTable, task: int, instance: Instance,
              path_limit: int = DEFAULT_PATH_LIMIT) -> FptTable:
    """Extend every record by optionally routing ``task`` along one of its paths.

    Only paths whose edges all lie in ``table.edges`` are considered.  Per
    resulting ``lam`` the highest omega is kept.
    """
    z = instance.tasks[task]
    domain = set(table.edges)
    paths = enumerate_paths(instance.graph, z.source, z.target, instance.max_route_length, domain)
    if len(paths) > path_limit:
        raise LimitExceeded(f"task {task} has {len(paths)} candidate paths, limit {path_limit}")
    pos = {e: i for i, e in enumerate(table.edges)}
    cap = instance.graph.capacity
    routes = []
    for p in paths:
        idx = [pos[e] for e in path_edges(p)]
        routes.append((p, idx, [cap[e] for e in path_edges(p)]))
    d, w = z.demand, z.profit
    out: Dict[Lam, Tuple[int, object]] = {}
    for lam, (omega, back) in table.entries.items():
        _keep_best(out, lam, omega, back)
        for p, idx, caps in routes:
            if any(lam[i] + d > c for i, c in zip(idx, caps)):
                continue
            new = list(lam)
            for i in idx:
                new[i] += d
            base, routed = back
            _keep_best(out, tuple(new), omega + w, (base, routed + ((task, p),)))
    return FptTable(table.edges, out)


def leaf_table(edges: Sequence[Edge]) -> FptTable:
    return FptTable(tuple(edges), {(0,) * len(edges): (0, None)})


def step_introduce(child: FptTable, node: int, view: BoundaryView) -> FptTable:
    """Each child record extended by zero load on newly visible edges."""
    edges = tuple(sorted(view.e_vis[node]))
    pos = {e: i for i, e in enumerate(child.edges)}
    src = [pos.get(e) for e in edges]
    out = {}
    for lam, (omega, _) in child.entries.items():
        new = tuple(0 if s is None else lam[s] for s in src)
        out[new] = (omega, ("intro", lam))
    return FptTable(edges, out)


def _run_ranks(base: Dict[Lam, Tuple[int, object]], edges: Tuple[Edge, ...], tasks: Sequence[int],
               instance: Instance, table_limit: int, path_limit: int) -> FptTable:
    table = FptTable(edges, {lam: (omega, (ref, ())) for lam, (omega, ref) in base.items()})
    for z in tasks:
        table = rank_step(table, z, instance, path_limit)
        if len(table) > table_limit:
            raise LimitExceeded(f"table size exceeds limit {table_limit}")
    return table


def step_forget(child: FptTable, node: int, nice: NiceTreeDecomposition, view: BoundaryView,
                instance: Instance, table_limit: int = DEFAULT_TABLE_LIMIT,
                path_limit: int = DEFAULT_PATH_LIMIT) -> FptTable:
    """Rank DP over the child's visible edges, then restriction to this node's."""
    tasks = newly_active_tasks(node, nice, view, instance)
    base = {lam: (omega, ("forget", lam)) for lam, (omega, _) in child.entries.items()}
    ranked = _run_ranks(base, child.edges, tasks, instance, table_limit, path_limit)
    edges = tuple(sorted(view.e_vis[node]))
    pos = {e: i for i, e in enumerate(child.edges)}
    keep = [pos[e] for e in edges]
    out: Dict[Lam, Tuple[int, object]] = {}
    for lam, (omega, back) in ranked.entries.items():
        _keep_best(out, tuple(lam[i] for i in keep), omega, back)
    return FptTable(edges, out)


def step_join(left: FptTable, right: FptTable, node: int, nice: NiceTreeDecomposition,
              view: BoundaryView, instance: Instance, table_limit: int = DEFAULT_TABLE_LIMIT,
              path_limit: int = DEFAULT_PATH_LIMIT) -> FptTable:
    if left.edges != right.edges:
        raise InputError("join children disagree on visible edges")
    edges = left.edges
    caps = [instance.graph.capacity[e] for e in edges]
    base: Dict[Lam, Tuple[int, object]] = {}
    for l1, (o1, _) in left.entries.items():
        for l2, (o2, _) in right.entries.items():
            lam = tuple(a + b for a, b in zip(l1, l2))
            if any(x > c for x, c in zip(lam, caps)):
                continue
            _keep_best(base, lam, o1 + o2, ("join", l1, l2))
        if len(base) > table_limit:
            raise LimitExceeded(f"table size exceeds limit {table_limit}")
    tasks = newly_active_tasks(node, nice, view, instance)
    return _run_ranks(base, edges, tasks, instance, table_limit, path_limit)


def table_violations(table: FptTable, instance: Instance) -> List[str]:
    out = []
    c = instance.max_capacity
    cap = instance.graph.capacity
    bound = 1
    for e in table.edges:
        bound *= min(c, cap[e]) + 1
    if len(table) > bound:
        out.append(f"table has {len(table)} records, more than the {bound} possible loads")
    if len(set(table.entries)) != len(table.entries):
        out.append("duplicate lam")
    for lam in table.entries:
        for e, x in zip(table.edges, lam):
            if not 0 <= x <= min(c, cap[e]):
                out.append(f"load {x} on edge {e} outside [0, {min(c, cap[e])}]")
    return out


def _witness(tables: List[FptTable], nice: NiceTreeDecomposition) -> Routing:
    routes = {}
    lam0 = next(iter(tables[nice.root].entries))
    stack = [(nice.root, lam0)]
    while stack:
        t, lam = stack.pop()
        back = tables[t].entries[lam][1]
        if back is None:
            continue
        ch = nice.children[t]
        if back[0] == "intro":
            stack.append((ch[0], back[1]))
            continue
        ref, routed = back
        for z, p in routed:
            routes[z] = p
        if ref[0] == "forget":
            stack.append((ch[0], ref[1]))
        else:
            stack.append((ch[0], ref[1]))
            stack.append((ch[1], ref[2]))
    return Routing(routes)


def solve_fpt(instance: Instance, nice: NiceTreeDecomposition, *, check_invariants: bool = False,
              table_limit: int = DEFAULT_TABLE_LIMIT, path_limit: int = DEFAULT_PATH_LIMIT,
              validate_input: bool = True) -> OptimalResult:
    graph = instance.graph
    if validate_input:
        ok, problems = validate(graph, nice)
        if not ok:
            raise InputError("invalid nice tree decomposition: " + "; ".join(problems))
    view = boundary_view(graph, nice, instance.max_route_length)
    tables: List[Optional[FptTable]] = [None] * len(nice.bags)
    max_size = 0
    violations: List[str] = []
    for t in range(len(nice.bags)):
        kind = nice.kinds[t]
        ch = nice.children[t]
        edges = tuple(sorted(view.e_vis[t]))
        if kind == LEAF:
            table = leaf_table(edges)
        elif kind == INTRODUCE:
            table = step_introduce(tables[ch[0]], t, view)
        elif kind == FORGET:
            table = step_forget(tables[ch[0]], t, nice, view, instance, table_limit, path_limit)
        elif kind == JOIN:
            table = step_join(tables[ch[0]], tables[ch[1]], t, nice, view, instance, table_limit, path_limit)
        else:
            raise InputError(f"unknown node kind {kind!r}")
        if len(table) > table_limit:
            raise LimitExceeded(f"table size exceeds limit {table_limit}")
        tables[t] = table
        max_size = max(max_size, len(table))
        if check_invariants:
            violations.extend(f"node {t}: {v}" for v in table_violations(table, instance))
    root = tables[nice.root]
    if len(root) != 1:
        raise RuntimeError(f"root table has {len(root)} records")
    optimum = next(iter(root.entries.values()))[0]
    witness = _witness(tables, nice)
    got = sum(instance.tasks[z].profit for z in witness.routes)
    if got != optimum:
        raise RuntimeError(f"witness profit {got} differs from optimum {optimum}")
    stats = {"nodes": len(nice.bags), "max_table_size": max_size, "violations": violations}
    log.debug("fpt: %d nodes, max table %d", len(nice.bags), max_size)
    return OptimalResult(optimum, witness, optimum >= instance.target, stats)
