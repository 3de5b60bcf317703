"""Exact dynamic program over a nice tree decomposition, valid for any route length.

Records at a node describe a partial routing restricted to edges with at least
one endpoint in ``past(t)``:

* ``lam`` assigns to every present edge the set of tasks routed across it,
* ``theta`` gives each task crossing the boundary the number of edges it has
  used so far,
* ``omega`` is the profit collected at forgotten endpoints, counted in
  half-units (each routed endpoint contributes ``w`` so a finished task
  contributes ``2w``).

Internally ``lam`` is a tuple of sorted task tuples aligned with the node's
sorted present edges, and ``theta`` a sorted tuple of ``(task, length)`` pairs.
Tables map ``(lam, theta)`` to ``(omega, back)`` where ``back`` is the
provenance used to rebuild a witness.
"""
from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .core import Edge, InputError, Instance, LimitExceeded, Routing, edge_key
from .oracle import OptimalResult
from .treedecomp import FORGET, INTRODUCE, JOIN, LEAF, BoundaryView, NiceTreeDecomposition, boundary_view, validate

log = logging.getLogger(__name__)

DEFAULT_TABLE_LIMIT = 2_000_000

Lam = Tuple[Tuple[int, ...], ...]
Theta = Tuple[Tuple[int, int], ...]
Key = Tuple[Lam, Theta]


@dataclass(frozen=True)
class XpRecord:
    """Readable form of one table entry; ``omega`` is in half-profit units."""

    lam: Mapping[Edge, FrozenSet[int]]
    theta: Mapping[int, int]
    omega: int

    def active_tasks(self) -> FrozenSet[int]:
        return frozenset().union(*self.lam.values()) if self.lam else frozenset()


class XpTable:
    """Records of one node, keyed by ``(lam, theta)``."""

    def __init__(self, edges: Sequence[Edge], entries: Optional[Dict[Key, Tuple[int, object]]] = None):
        self.edges: Tuple[Edge, ...] = tuple(edges)
        self.entries: Dict[Key, Tuple[int, object]] = entries if entries is not None else {}

    def __len__(self):
        return len(self.entries)

    def records(self) -> List[XpRecord]:
        return [to_record(self.edges, key, omega) for key, (omega, _) in sorted(self.entries.items())]

    def __eq__(self, other):
        if not isinstance(other, XpTable):
            return NotImplemented
        return self.edges == other.edges and \
            {k: v[0] for k, v in self.entries.items()} == {k: v[0] for k, v in other.entries.items()}


def to_record(edges: Sequence[Edge], key: Key, omega: int) -> XpRecord:
    lam, theta = key
    return XpRecord({e: frozenset(s) for e, s in zip(edges, lam)}, dict(theta), omega)


def from_record(edges: Sequence[Edge], record: XpRecord) -> Key:
    lam = tuple(tuple(sorted(record.lam.get(e, ()))) for e in edges)
    return lam, tuple(sorted(record.theta.items()))


# -- jump vertices and superseding ---------------------------------------------

def jump_vertices(lam: Mapping[Edge, Iterable[int]], bag: Iterable[int], task: int) -> Set[int]:
    """Bag vertices with at least two incident present edges carrying ``task``."""
    counts: Dict[int, int] = defaultdict(int)
    bag = set(bag)
    for e, tasks in lam.items():
        if task in tasks:
            for x in e:
                if x in bag:
                    counts[x] += 1
    return {v for v, k in counts.items() if k >= 2}


def _incidence(edges: Sequence[Edge], bag: FrozenSet[int]) -> Dict[int, List[int]]:
    at: Dict[int, List[int]] = defaultdict(list)
    for i, e in enumerate(edges):
        for x in e:
            if x in bag:
                at[x].append(i)
    return at


def _stripped(lam: Lam, incidence: Mapping[int, List[int]]) -> Lam:
    """Remove every task from the edges at each of its jump vertices."""
    drop: Dict[int, Set[int]] = defaultdict(set)
    for idxs in incidence.values():
        if len(idxs) < 2:
            continue
        seen: Dict[int, int] = defaultdict(int)
        for i in idxs:
            for z in lam[i]:
                seen[z] += 1
        for z, k in seen.items():
            if k >= 2:
                for i in idxs:
                    if z in lam[i]:
                        drop[i].add(z)
    if not drop:
        return lam
    return tuple(tuple(z for z in s if z not in drop[i]) if i in drop else s for i, s in enumerate(lam))


def _supersedes_key(cand: Key, other: Key, incidence: Mapping[int, List[int]]) -> bool:
    """Whether ``cand`` is reachable from ``other`` by direct supersession steps.

    Both keys are assumed to carry equal omega.
    """
    lam_c, theta_c = cand
    lam_o, theta_o = other
    removed: Dict[int, Set[int]] = defaultdict(set)
    for i, (sc, so) in enumerate(zip(lam_c, lam_o)):
        if len(sc) > len(so):
            return False
        set_c = set(sc)
        if not set_c.issubset(so):
            return False
        for z in so:
            if z not in set_c:
                removed[z].add(i)
    for z, idxs in removed.items():
        # every removal must clear z from all edges at some jump vertex
        covered: Set[int] = set()
        for v, at in incidence.items():
            carrying = [i for i in at if z in lam_o[i]]
            if len(carrying) < 2:
                continue
            hit = [i for i in carrying if i in idxs]
            if hit and len(hit) != len(carrying):
                return False
            covered.update(hit)
        if covered != idxs:
            return False
    th_c = dict(theta_c)
    strict = False
    for z, val in theta_o:
        if z not in th_c:
            strict = True
            continue
        if th_c[z] > val:
            return False
        if th_c[z] < val:
            strict = True
        elif z in removed:
            return False
    return strict


def supersedes(candidate: XpRecord, other: XpRecord, bag: Iterable[int]) -> bool:
    if candidate.omega != other.omega:
        raise InputError("superseding is only defined between records of equal profit")
    edges = sorted(set(candidate.lam) | set(other.lam))
    inc = _incidence(edges, frozenset(bag))
    return _supersedes_key(from_record(edges, candidate), from_record(edges, other), inc)


def _theta_total(theta: Theta) -> int:
    return sum(v for _, v in theta)


def prune(candidates: Dict[Key, Tuple[int, object]], edges: Sequence[Edge],
          bag: FrozenSet[int]) -> Dict[Key, Tuple[int, object]]:
    """Drop every candidate superseded by another candidate of equal omega.

    ``candidates`` already holds only the best omega per ``(lam, theta)``.
    A superseding record has the same jump-stripped ``lam`` and a strictly
    smaller total ``theta``, which is used to bucket the pairwise scan.
    """
    incidence = _incidence(edges, bag)
    if not any(len(v) >= 2 for v in incidence.values()):
        # no jump vertex possible: only theta decreases with equal lam matter
        buckets: Dict[Tuple, List[Key]] = defaultdict(list)
        for key, (omega, _) in candidates.items():
            buckets[(omega, key[0])].append(key)
    else:
        buckets = defaultdict(list)
        for key, (omega, _) in candidates.items():
            buckets[(omega, _stripped(key[0], incidence))].append(key)
    out: Dict[Key, Tuple[int, object]] = {}
    for keys in buckets.values():
        if len(keys) == 1:
            out[keys[0]] = candidates[keys[0]]
            continue
        keys.sort(key=lambda k: (_theta_total(k[1]), k))
        kept: List[Key] = []
        for key in keys:
            total = _theta_total(key[1])
            if not any(_theta_total(q[1]) < total and _supersedes_key(q, key, incidence) for q in kept):
                kept.append(key)
        for key in kept:
            out[key] = candidates[key]
    return dict(sorted(out.items()))


# -- node steps ----------------------------------------------------------------

class _Context:
    def __init__(self, instance: Instance, nice: NiceTreeDecomposition, view: BoundaryView,
                 table_limit: int):
        self.instance = instance
        self.nice = nice
        self.view = view
        self.length = instance.max_route_length
        self.table_limit = table_limit
        self.present = [tuple(sorted(p)) for p in view.present]
        cap = instance.graph.capacity
        self.cap = cap
        self.endpoints = [frozenset(z.endpoints) for z in instance.tasks]


def leaf_table() -> XpTable:
    return XpTable((), {((), ()): (0, None)})


def step_introduce(child: XpTable) -> XpTable:
    return XpTable(child.edges, {k: (v[0], ("intro", k)) for k, v in child.entries.items()})


def _check_limit(n: int, ctx: _Context) -> None:
    if n > ctx.table_limit:
        raise LimitExceeded(f"table size exceeds limit {ctx.table_limit}")


def _forget(child: XpTable, t: int, ctx: _Context) -> XpTable:
    nice, view, inst = ctx.nice, ctx.view, ctx.instance
    u = nice.vertex[t]
    c_node = nice.children[t][0]
    bag = nice.bags[t]
    pe_c = child.edges
    pe_t = ctx.present[t]
    old_at_u = [i for i, e in enumerate(pe_c) if u in e]
    new_edges = [e for e in pe_t if u in e]
    n_new = len(new_edges)
    new_caps = [ctx.cap[e] for e in new_edges]
    pos_c = {e: i for i, e in enumerate(pe_c)}
    # each edge of pe_t comes from the child (index >= 0) or is new (-1 - j)
    source = []
    j = 0
    for e in pe_t:
        if e in pos_c:
            source.append(pos_c[e])
        else:
            source.append(-1 - j)
            j += 1
    incidence = _incidence(pe_t, bag)
    touched = sorted({x for e in new_edges for x in e if x != u})
    past_c = view.past[c_node]
    tasks = inst.tasks
    length = ctx.length
    ends_at_u = [z for z, ep in enumerate(ctx.endpoints) if u in ep]
    free_tasks = [z for z, ep in enumerate(ctx.endpoints) if not (ep & past_c)]
    bound_tasks = [z for z, ep in enumerate(ctx.endpoints) if ep & past_c]

    pairs = list(itertools.combinations(range(n_new), 2))
    singles = [(i,) for i in range(n_new)]

    candidates: Dict[Key, Tuple[int, object]] = {}
    for ckey, (omega_c, _) in child.entries.items():
        lam_c, theta_c = ckey
        k: Dict[int, int] = defaultdict(int)
        for i in old_at_u:
            for z in lam_c[i]:
                k[z] += 1
        active_c = set()
        for s in lam_c:
            active_c.update(s)
        choices: List[Tuple[int, List[Tuple[int, ...]]]] = []
        dead = False
        for z, cnt in k.items():
            at_end = u in ctx.endpoints[z]
            if at_end:
                if cnt > 1:
                    dead = True
                    break
                continue  # cnt == 1: the route terminates at u
            if cnt == 1:
                if not singles:
                    dead = True
                    break
                choices.append((z, singles))
            elif cnt > 2:
                dead = True
                break
        if dead:
            continue
        optional = [z for z in free_tasks if z not in k] + \
                   [z for z in bound_tasks if z not in k and z in active_c]
        optional.sort()
        for z in optional:
            if u in ctx.endpoints[z]:
                if singles:
                    choices.append((z, [()] + singles))
            elif pairs:
                choices.append((z, [()] + pairs))

        theta_map = dict(theta_c)
        loads = [0] * n_new
        assigned: List[List[int]] = [[] for _ in range(n_new)]

        def emit() -> None:
            lam = []
            for src in source:
                if src >= 0:
                    lam.append(lam_c[src])
                else:
                    lam.append(tuple(sorted(assigned[-1 - src])))
            lam_t = tuple(lam)
            # degree constraints at bag vertices that received new edges
            for y in touched:
                cnt: Dict[int, int] = defaultdict(int)
                for i in incidence[y]:
                    for z in lam_t[i]:
                        cnt[z] += 1
                for z, c in cnt.items():
                    if c > 2 or (c > 1 and y in ctx.endpoints[z]):
                        return
            delta: Dict[int, int] = defaultdict(int)
            for j2, zs in enumerate(assigned):
                for z in zs:
                    delta[z] += 1
            active_t = set()
            for s in lam_t:
                active_t.update(s)
            theta = []
            for z in sorted(active_t):
                val = theta_map.get(z, 0) + delta.get(z, 0)
                if val > length:
                    return
                theta.append((z, val))
            omega = omega_c
            for z in ends_at_u:
                if k.get(z, 0) + delta.get(z, 0) == 1:
                    omega += tasks[z].profit
            key = (lam_t, tuple(theta))
            prev = candidates.get(key)
            if prev is None or omega > prev[0]:
                new_assign = tuple((new_edges[j3], tuple(sorted(zs))) for j3, zs in enumerate(assigned) if zs)
                candidates[key] = (omega, ("forget", ckey, new_assign))

        def branch(idx: int) -> None:
            if idx == len(choices):
                emit()
                return
            z, opts = choices[idx]
            d = tasks[z].demand
            for opt in opts:
                if any(loads[i] + d > new_caps[i] for i in opt):
                    continue
                for i in opt:
                    loads[i] += d
                    assigned[i].append(z)
                branch(idx + 1)
                for i in opt:
                    loads[i] -= d
                    assigned[i].pop()

        branch(0)
        _check_limit(len(candidates), ctx)
    return XpTable(pe_t, prune(candidates, pe_t, bag))


def _join(left: XpTable, right: XpTable, t: int, ctx: _Context) -> XpTable:
    bag = ctx.nice.bags[t]
    pe_t = ctx.present[t]
    pos = {e: i for i, e in enumerate(pe_t)}
    idx_l = [pos[e] for e in left.edges]
    idx_r = [pos[e] for e in right.edges]
    incidence = _incidence(pe_t, bag)
    # only vertices with edges from both sides can violate the degree bound
    shared = [v for v, at in incidence.items()
              if set(at) & set(idx_l) and set(at) & set(idx_r)]
    length = ctx.length
    candidates: Dict[Key, Tuple[int, object]] = {}
    width = len(pe_t)
    for kl, (ol, _) in left.entries.items():
        th_l = dict(kl[1])
        for kr, (orr, _) in right.entries.items():
            lam = [()] * width
            for i, s in zip(idx_l, kl[0]):
                lam[i] = s
            for i, s in zip(idx_r, kr[0]):
                lam[i] = s
            ok = True
            for v in shared:
                cnt: Dict[int, int] = defaultdict(int)
                for i in incidence[v]:
                    for z in lam[i]:
                        cnt[z] += 1
                for z, c in cnt.items():
                    if c > 2 or (c > 1 and v in ctx.endpoints[z]):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            theta = dict(th_l)
            for z, val in kr[1]:
                theta[z] = theta.get(z, 0) + val
            if any(val > length for val in theta.values()):
                continue
            key = (tuple(lam), tuple(sorted(theta.items())))
            omega = ol + orr
            prev = candidates.get(key)
            if prev is None or omega > prev[0]:
                candidates[key] = (omega, ("join", kl, kr))
        _check_limit(len(candidates), ctx)
    return XpTable(pe_t, prune(candidates, pe_t, bag))


def step_forget(child: XpTable, node: int, nice: NiceTreeDecomposition, view: BoundaryView,
                instance: Instance) -> XpTable:
    ctx = _Context(instance, nice, view, DEFAULT_TABLE_LIMIT)
    return _forget(child, node, ctx)


def step_join(left: XpTable, right: XpTable, node: int, nice: NiceTreeDecomposition,
              view: BoundaryView, instance: Instance) -> XpTable:
    ctx = _Context(instance, nice, view, DEFAULT_TABLE_LIMIT)
    return _join(left, right, node, ctx)


# -- invariants ----------------------------------------------------------------

def table_violations(table: XpTable, bag: FrozenSet[int], instance: Instance) -> List[str]:
    """Pairwise scan for superseded records and per-edge capacity excess."""
    out = []
    inc = _incidence(table.edges, bag)
    cap = instance.graph.capacity
    c = instance.max_capacity
    exp = len(table.edges) * c
    bound = (len(instance.tasks) + 1) ** exp * (instance.max_route_length + 1) ** exp
    if len(table) > bound:
        out.append(f"table has {len(table)} records, above the bound {bound}")
    for key in table.entries:
        lam, theta = key
        for e, s in zip(table.edges, lam):
            if sum(instance.tasks[z].demand for z in s) > min(c, cap[e]):
                out.append(f"edge {e} over capacity")
        active = set().union(*map(set, lam)) if lam else set()
        if set(dict(theta)) != active:
            out.append("theta domain differs from active tasks")
        if any(not 1 <= v <= instance.max_route_length for _, v in theta):
            out.append("theta value out of range")
    # superseding preserves omega and the jump-stripped lam, so compare within those groups
    groups: Dict[Tuple, List[Key]] = defaultdict(list)
    for key, (omega, _) in table.entries.items():
        groups[(omega, _stripped(key[0], inc))].append(key)
    for group in groups.values():
        for a in group:
            for b in group:
                if a != b and _supersedes_key(a, b, inc):
                    out.append("superseded record kept")
    return out


# -- driver ----------------------------------------------------------------

def _witness(tables: List[XpTable], nice: NiceTreeDecomposition, instance: Instance) -> Routing:
    edges_of: Dict[int, List[Edge]] = defaultdict(list)
    root_key = next(iter(tables[nice.root].entries))
    stack = [(nice.root, root_key)]
    while stack:
        t, key = stack.pop()
        back = tables[t].entries[key][1]
        if back is None:
            continue
        ch = nice.children[t]
        if back[0] == "intro":
            stack.append((ch[0], back[1]))
        elif back[0] == "forget":
            for e, zs in back[2]:
                for z in zs:
                    edges_of[z].append(e)
            stack.append((ch[0], back[1]))
        else:
            stack.append((ch[0], back[1]))
            stack.append((ch[1], back[2]))
    routes = {}
    for z, edges in edges_of.items():
        task = instance.tasks[z]
        adj: Dict[int, List[int]] = defaultdict(list)
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        if len(adj[task.source]) != 1 or len(adj[task.target]) != 1:
            continue
        path = [task.source]
        prev = None
        while path[-1] != task.target:
            nxt = [y for y in adj[path[-1]] if y != prev]
            prev = path[-1]
            path.append(nxt[0])
        routes[z] = tuple(path)
    return Routing(routes)


def solve_xp(instance: Instance, nice: NiceTreeDecomposition, *, check_invariants: bool = False,
             table_limit: int = DEFAULT_TABLE_LIMIT, validate_input: bool = True) -> OptimalResult:
    graph = instance.graph
    if validate_input:
        ok, problems = validate(graph, nice)
        if not ok:
            raise InputError("invalid nice tree decomposition: " + "; ".join(problems))
    view = boundary_view(graph, nice, instance.max_route_length)
    ctx = _Context(instance, nice, view, table_limit)
    tables: List[Optional[XpTable]] = [None] * len(nice.bags)
    max_size = 0
    violations: List[str] = []
    for t in range(len(nice.bags)):
        kind = nice.kinds[t]
        ch = nice.children[t]
        if kind == LEAF:
            table = leaf_table()
        elif kind == INTRODUCE:
            table = step_introduce(tables[ch[0]])
        elif kind == FORGET:
            table = _forget(tables[ch[0]], t, ctx)
        elif kind == JOIN:
            table = _join(tables[ch[0]], tables[ch[1]], t, ctx)
        else:
            raise InputError(f"unknown node kind {kind!r}")
        tables[t] = table
        max_size = max(max_size, len(table))
        if check_invariants:
            violations.extend(f"node {t}: {v}" for v in table_violations(table, nice.bags[t], instance))
    root = tables[nice.root]
    if len(root) != 1:
        raise RuntimeError(f"root table has {len(root)} records")
    omega = next(iter(root.entries.values()))[0]
    if omega % 2:
        raise RuntimeError("odd half-profit at the root")
    optimum = omega // 2
    witness = _witness(tables, nice, instance)
    got = sum(instance.tasks[z].profit for z in witness.routes)
    if got != optimum:
        raise RuntimeError(f"witness profit {got} differs from optimum {optimum}")
    stats = {"nodes": len(nice.bags), "max_table_size": max_size, "violations": violations}
    log.debug("xp: %d nodes, max table %d", len(nice.bags), max_size)
    return OptimalResult(optimum, witness, optimum >= instance.target, stats)
