"""Tree decompositions: construction, validation, nice form and boundary sets.

A decomposition is a rooted tree stored as parallel lists indexed by node id.
Nice decompositions additionally carry a node kind and are numbered so that
every child id is smaller than its parent id, which lets the dynamic programs
sweep ``range(len(nodes))`` bottom-up.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .core import CapacitatedGraph, Edge, InputError, LimitExceeded, edge_key

EXACT_VERTEX_LIMIT = 16

LEAF, INTRODUCE, FORGET, JOIN = "leaf", "introduce", "forget", "join"


@dataclass
class TreeDecomposition:
    bags: List[FrozenSet[int]]
    children: List[Tuple[int, ...]]
    root: int = 0

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def __len__(self):
        return len(self.bags)

    def tree_edges(self) -> List[Tuple[int, int]]:
        return [(p, c) for p, cs in enumerate(self.children) for c in cs]

    def postorder(self) -> List[int]:
        order, stack = [], [(self.root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            stack.append((node, True))
            for c in reversed(self.children[node]):
                stack.append((c, False))
        return order


@dataclass
class NiceTreeDecomposition(TreeDecomposition):
    kinds: List[str] = field(default_factory=list)
    # introduced / forgotten vertex per node, None for leaf and join nodes
    vertex: List[Optional[int]] = field(default_factory=list)

    def postorder(self) -> List[int]:
        return list(range(len(self.bags)))


@dataclass
class BoundaryView:
    past: List[FrozenSet[int]]
    present: List[FrozenSet[Edge]]
    vis: List[FrozenSet[int]]
    e_vis: List[FrozenSet[Edge]]
    max_route_length: int

    def future(self, node: int, vertex_count: int) -> FrozenSet[int]:
        return frozenset(range(vertex_count)) - self.past[node]


# -- validation ----------------------------------------------------------------

def validate(graph: CapacitatedGraph, td: TreeDecomposition) -> Tuple[bool, List[str]]:
    """Check both decomposition axioms (and node kinds if ``td`` is nice).

    Returns ``(ok, violations)``; nothing is raised.
    """
    problems: List[str] = []
    n_nodes = len(td.bags)
    if n_nodes == 0:
        if graph.vertex_count:
            problems.append("connectivity: decomposition has no nodes")
        return not problems, problems
    if len(td.children) != n_nodes or not 0 <= td.root < n_nodes:
        return False, ["structure: children list or root does not match bags"]

    parent = [-1] * n_nodes
    seen = {td.root}
    stack = [td.root]
    while stack:
        t = stack.pop()
        for c in td.children[t]:
            if not 0 <= c < n_nodes or c in seen:
                return False, [f"structure: node {c} is out of range or reached twice"]
            seen.add(c)
            parent[c] = t
            stack.append(c)
    if len(seen) != n_nodes:
        problems.append(f"structure: {n_nodes - len(seen)} nodes unreachable from the root")
        return False, problems

    for bag in td.bags:
        bad = [v for v in bag if not 0 <= v < graph.vertex_count]
        if bad:
            problems.append(f"structure: bag mentions unknown vertices {sorted(bad)}")
            return False, problems

    for u, v in graph.edges:
        if not any(u in b and v in b for b in td.bags):
            problems.append(f"coverage: edge ({u}, {v}) is in no bag")

    holders: Dict[int, List[int]] = {v: [] for v in range(graph.vertex_count)}
    for t, bag in enumerate(td.bags):
        for v in bag:
            holders[v].append(t)
    for v, nodes in holders.items():
        if not nodes:
            problems.append(f"connectivity: vertex {v} is in no bag")
            continue
        # the holders form a subtree iff exactly one of them has a parent outside
        tops = [t for t in nodes if parent[t] == -1 or v not in td.bags[parent[t]]]
        if len(tops) != 1:
            problems.append(f"connectivity: bags containing vertex {v} form {len(tops)} components")

    if isinstance(td, NiceTreeDecomposition):
        problems.extend(_nice_problems(td))
    return not problems, problems


def _nice_problems(td: NiceTreeDecomposition) -> List[str]:
    out = []
    if len(td.kinds) != len(td.bags) or len(td.vertex) != len(td.bags):
        return ["nice: kinds/vertex lists do not match bags"]
    if td.bags[td.root]:
        out.append("nice: root bag is not empty")
    for t, kind in enumerate(td.kinds):
        ch = td.children[t]
        bag = td.bags[t]
        if kind == LEAF:
            ok = not ch and (len(bag) == 1 or len(td.bags) == 1)
        elif kind == INTRODUCE:
            ok = len(ch) == 1 and td.vertex[t] not in td.bags[ch[0]] and bag == td.bags[ch[0]] | {td.vertex[t]}
        elif kind == FORGET:
            ok = len(ch) == 1 and td.vertex[t] in td.bags[ch[0]] and bag == td.bags[ch[0]] - {td.vertex[t]}
        elif kind == JOIN:
            ok = len(ch) == 2 and bag == td.bags[ch[0]] == td.bags[ch[1]]
        else:
            ok = False
        if not ok:
            out.append(f"nice: node {t} is not a well-formed {kind} node")
        if any(c >= t for c in ch):
            out.append(f"nice: node {t} is not numbered after its children")
    return out


# -- construction ----------------------------------------------------------------

def _adjacency(graph: CapacitatedGraph) -> List[Set[int]]:
    return [set(graph.neighbors(v)) for v in range(graph.vertex_count)]


def min_fill_order(graph: CapacitatedGraph) -> List[int]:
    adj = _adjacency(graph)
    remaining = set(range(graph.vertex_count))
    order = []
    while remaining:
        def fill(v):
            nb = list(adj[v])
            return sum(1 for a, b in itertools.combinations(nb, 2) if b not in adj[a])
        v = min(remaining, key=lambda x: (fill(x), len(adj[x]), x))
        _eliminate(adj, v)
        remaining.discard(v)
        order.append(v)
    return order


def _eliminate(adj: List[Set[int]], v: int) -> None:
    nb = adj[v]
    for a in nb:
        adj[a] |= nb
        adj[a].discard(a)
        adj[a].discard(v)
    adj[v] = set()


def order_width(graph: CapacitatedGraph, order: Sequence[int]) -> int:
    adj = _adjacency(graph)
    width = -1
    for v in order:
        width = max(width, len(adj[v]))
        _eliminate(adj, v)
    return width


def exact_order(graph: CapacitatedGraph) -> List[int]:
    """Minimum-width elimination order by dynamic programming over vertex subsets.

    ``best[S]`` is the least possible maximum of ``|Q(S', v)|`` when the vertices
    of ``S`` are eliminated first, where ``Q(S', v)`` is the set of uneliminated
    vertices reachable from ``v`` through ``S'``.
    """
    n = graph.vertex_count
    adj = [0] * n
    for u, v in graph.edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u

    def q_size(s: int, v: int) -> int:
        # vertices outside s | {v} reachable from v via paths inside s
        seen = 1 << v
        frontier = 1 << v
        outside = 0
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                f ^= low
                nxt |= adj[low.bit_length() - 1]
            nxt &= ~seen
            seen |= nxt
            outside |= nxt & ~s
            frontier = nxt & s
        return bin(outside).count("1")

    full = (1 << n) - 1
    best = {0: -1}
    choice: Dict[int, int] = {}
    for size in range(1, n + 1):
        nxt_best = {}
        for s in _subsets_of_size(n, size):
            val, pick = None, None
            m = s
            while m:
                low = m & -m
                m ^= low
                v = low.bit_length() - 1
                prev = best.get(s ^ low)
                if prev is None:
                    continue
                cand = max(prev, q_size(s ^ low, v))
                if val is None or cand < val:
                    val, pick = cand, v
            nxt_best[s] = val
            choice[s] = pick
        best = nxt_best
    order = []
    s = full
    while s:
        v = choice[s]
        order.append(v)
        s ^= 1 << v
    order.reverse()
    return order


def _subsets_of_size(n: int, k: int) -> Iterable[int]:
    for combo in itertools.combinations(range(n), k):
        m = 0
        for v in combo:
            m |= 1 << v
        yield m


def from_elimination_order(graph: CapacitatedGraph, order: Sequence[int]) -> TreeDecomposition:
    """Build a decomposition whose bags are ``{v} | N+(v)`` along ``order``."""
    n = graph.vertex_count
    if n == 0:
        return TreeDecomposition([frozenset()], [()], 0)
    position = {v: i for i, v in enumerate(order)}
    adj = _adjacency(graph)
    bags: List[FrozenSet[int]] = []
    parent_vertex: List[Optional[int]] = []
    for v in order:
        later = frozenset(adj[v])
        bags.append(later | {v})
        parent_vertex.append(min(later, key=position.__getitem__) if later else None)
        _eliminate(adj, v)
    # node i corresponds to order[i]; link each to the node of its earliest later neighbour
    children: List[List[int]] = [[] for _ in range(n)]
    roots = []
    for i, pv in enumerate(parent_vertex):
        if pv is None:
            roots.append(i)
        else:
            children[position[pv]].append(i)
    root = roots[-1]
    for r in roots[:-1]:
        children[root].append(r)
    return TreeDecomposition(bags, [tuple(c) for c in children], root)


def compute_decomposition(graph: CapacitatedGraph, mode: str = "heuristic",
                          exact_limit: int = EXACT_VERTEX_LIMIT) -> TreeDecomposition:
    if mode == "heuristic":
        order = min_fill_order(graph)
    elif mode == "exact_small":
        if graph.vertex_count > exact_limit:
            raise LimitExceeded(f"exact decomposition limited to {exact_limit} vertices, "
                                f"graph has {graph.vertex_count}")
        order = exact_order(graph)
    else:
        raise InputError(f"unknown decomposition mode {mode!r}")
    return from_elimination_order(graph, order)


def auto_decomposition(graph: CapacitatedGraph, exact_limit: int = EXACT_VERTEX_LIMIT) -> TreeDecomposition:
    """Min-fill decomposition, replaced by an exact one when that is strictly narrower.

    Min-fill orders tend to give shallower introduce chains, which keeps the
    dynamic programming tables smaller at equal width.
    """
    order = min_fill_order(graph)
    if graph.vertex_count <= exact_limit:
        exact = exact_order(graph)
        if order_width(graph, exact) < order_width(graph, order):
            order = exact
    return from_elimination_order(graph, order)


# -- nice form ---------------------------------------------------------------

class _NiceBuilder:
    def __init__(self):
        self.bags: List[FrozenSet[int]] = []
        self.children: List[Tuple[int, ...]] = []
        self.kinds: List[str] = []
        self.vertex: List[Optional[int]] = []

    def add(self, bag, children, kind, vertex=None) -> int:
        self.bags.append(frozenset(bag))
        self.children.append(tuple(children))
        self.kinds.append(kind)
        self.vertex.append(vertex)
        return len(self.bags) - 1

    def morph(self, node: int, target: FrozenSet[int]) -> int:
        """Forget then introduce vertices until the bag of ``node`` equals ``target``."""
        bag = self.bags[node]
        for v in sorted(bag - target):
            bag = bag - {v}
            node = self.add(bag, [node], FORGET, v)
        for v in sorted(target - bag):
            bag = bag | {v}
            node = self.add(bag, [node], INTRODUCE, v)
        return node

    def leaf_chain(self, target: FrozenSet[int]) -> int:
        first = min(target)
        node = self.add({first}, [], LEAF)
        return self.morph(node, target)

    def join_all(self, nodes: List[int], bag: FrozenSet[int]) -> int:
        while len(nodes) > 1:
            merged = []
            for i in range(0, len(nodes) - 1, 2):
                merged.append(self.add(bag, [nodes[i], nodes[i + 1]], JOIN))
            if len(nodes) % 2:
                merged.append(nodes[-1])
            nodes = merged
        return nodes[0]


def to_nice(td: TreeDecomposition, graph: Optional[CapacitatedGraph] = None) -> NiceTreeDecomposition:
    """Normalize ``td`` into a nice decomposition of the same width.

    If ``graph`` is given the input is validated first.
    """
    if graph is not None:
        ok, problems = validate(graph, td)
        if not ok:
            raise InputError("invalid tree decomposition: " + "; ".join(problems))
    b = _NiceBuilder()
    built: Dict[int, Optional[int]] = {}
    for t in td.postorder():
        bag = td.bags[t]
        subs = []
        for c in td.children[t]:
            sub = built.pop(c)
            if sub is not None:
                subs.append(b.morph(sub, bag))
        if not subs:
            built[t] = b.leaf_chain(bag) if bag else None
        else:
            built[t] = b.join_all(subs, bag)
    top = built[td.root]
    if top is None:
        b.add(frozenset(), [], LEAF)
    else:
        b.morph(top, frozenset())
    root = len(b.bags) - 1
    return NiceTreeDecomposition(b.bags, b.children, root, b.kinds, b.vertex)


# -- boundary sets ---------------------------------------------------------------

def _within_distance(graph: CapacitatedGraph, sources: Iterable[int], limit: int) -> FrozenSet[int]:
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        x = queue.popleft()
        if dist[x] == limit:
            continue
        for y in graph.neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return frozenset(dist)


def boundary_view(graph: CapacitatedGraph, nice: NiceTreeDecomposition, max_route_length: int) -> BoundaryView:
    past: List[FrozenSet[int]] = []
    for t in range(len(nice.bags)):
        kind = nice.kinds[t]
        ch = nice.children[t]
        if kind == LEAF:
            p = frozenset()
        elif kind == INTRODUCE:
            p = past[ch[0]]
        elif kind == FORGET:
            p = past[ch[0]] | {nice.vertex[t]}
        else:
            p = past[ch[0]] | past[ch[1]]
        past.append(p)
    present = []
    for t, p in enumerate(past):
        present.append(frozenset(
            edge_key(x, y) for x in p for y in graph.neighbors(x) if y not in p
        ))
    vis = [_within_distance(graph, bag, max_route_length) for bag in nice.bags]
    e_vis = [frozenset(e for e in graph.capacity if e[0] in vs and e[1] in vs) for vs in vis]
    return BoundaryView(past, present, vis, e_vis, max_route_length)


# -- PACE .td ----------------------------------------------------------------

def read_td(text: str) -> TreeDecomposition:
    header = None
    bags: Dict[int, FrozenSet[int]] = {}
    links: List[Tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        try:
            if parts[0] == "s":
                if header is not None or len(parts) != 5 or parts[1] != "td":
                    raise InputError(f"line {lineno}: bad solution line")
                header = tuple(int(x) for x in parts[2:])
            elif parts[0] == "b":
                bag_id = int(parts[1])
                if bag_id in bags:
                    raise InputError(f"line {lineno}: bag {bag_id} defined twice")
                bags[bag_id] = frozenset(int(x) - 1 for x in parts[2:])
            else:
                a, c = (int(x) for x in parts)
                links.append((a, c))
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from exc
    if header is None:
        raise InputError("missing 's td' line")
    num_bags, _max_bag, n = header
    if sorted(bags) != list(range(1, num_bags + 1)):
        raise InputError("bag ids must be exactly 1..num_bags")
    for i, bag in bags.items():
        if any(not 0 <= v < n for v in bag):
            raise InputError(f"bag {i} names a vertex outside 1..{n}")
    if len(links) != max(num_bags - 1, 0):
        raise InputError(f"expected {max(num_bags - 1, 0)} tree edges, found {len(links)}")
    adj: Dict[int, List[int]] = {i: [] for i in range(num_bags)}
    for a, c in links:
        if not (1 <= a <= num_bags and 1 <= c <= num_bags):
            raise InputError(f"tree edge ({a}, {c}) refers to an unknown bag")
        adj[a - 1].append(c - 1)
        adj[c - 1].append(a - 1)
    children: List[List[int]] = [[] for _ in range(num_bags)]
    if num_bags:
        seen = {0}
        stack = [0]
        while stack:
            t = stack.pop()
            for c in sorted(adj[t]):
                if c not in seen:
                    seen.add(c)
                    children[t].append(c)
                    stack.append(c)
        if len(seen) != num_bags:
            raise InputError("tree edges do not form a tree")
    return TreeDecomposition([bags[i + 1] for i in range(num_bags)],
                             [tuple(c) for c in children], 0)


def write_td(td: TreeDecomposition, vertex_count: int) -> str:
    lines = [f"s td {len(td.bags)} {td.width + 1} {vertex_count}"]
    for i, bag in enumerate(td.bags):
        lines.append(" ".join(["b", str(i + 1)] + [str(v + 1) for v in sorted(bag)]))
    for p, c in td.tree_edges():
        lines.append(f"{p + 1} {c + 1}")
    return "\n".join(lines) + "\n"
