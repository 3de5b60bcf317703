"""Instance builders: the Multicolored Clique and Unary Bin Packing reductions,
seeded random instances, and brute-force checkers for the source problems.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .core import CapacitatedGraph, InputError, Instance, LimitExceeded, Task, edge_key

DEFAULT_CHECK_BUDGET = 10 ** 7


@dataclass(frozen=True)
class MccInput:
    """A graph on ``0..vertex_count-1`` whose vertices carry class ids ``0..k-1``.

    ``colors[v]`` is the class of ``v``; ``k`` defaults to one more than the
    largest id, so an explicit larger ``k`` describes empty classes.
    """

    vertex_count: int
    edges: Tuple[Tuple[int, int], ...]
    colors: Tuple[int, ...]
    k: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "colors", tuple(int(c) for c in self.colors))
        object.__setattr__(self, "edges", tuple(sorted({edge_key(int(u), int(v)) for u, v in self.edges})))
        if len(self.colors) != self.vertex_count:
            raise InputError(f"{len(self.colors)} colors given for {self.vertex_count} vertices")
        if self.k is None:
            object.__setattr__(self, "k", max(self.colors, default=-1) + 1)
        for c in self.colors:
            if not 0 <= c < self.k:
                raise InputError(f"class id {c} outside 0..{self.k - 1}")
        for u, v in self.edges:
            if u == v or not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise InputError(f"bad edge ({u}, {v})")

    def classes(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in range(self.k)]
        for v, c in enumerate(self.colors):
            out[c].append(v)
        return out

    def order(self) -> List[int]:
        """Vertices grouped by class, ascending within each class."""
        return [v for cls in self.classes() for v in cls]


@dataclass(frozen=True)
class BinPackingInput:
    bins: int
    bin_capacity: int
    item_sizes: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "item_sizes", tuple(int(h) for h in self.item_sizes))
        if self.bins < 1 or self.bin_capacity < 1:
            raise InputError("bins and bin capacity must be positive")
        if any(h < 1 for h in self.item_sizes):
            raise InputError("item sizes must be positive")


# -- Multicolored Clique -----------------------------------------------------

def control_capacity(k: int, i: int) -> int:
    """Capacity of the i-th control edge (1-based) for ``k`` classes."""
    return sum(max(0, k - 2 * j + 1) for j in range(1, i + 1))


def _make_even(mcc: MccInput) -> MccInput:
    if mcc.k % 2 == 0:
        return mcc
    u = mcc.vertex_count
    edges = mcc.edges + tuple((v, u) for v in range(u))
    return MccInput(u + 1, edges, mcc.colors + (mcc.k,), mcc.k + 1)


def reduce_mcc(mcc: MccInput, drop_zero: bool = False) -> Instance:
    """Path instance that reaches its target iff ``mcc`` has a multicolored clique.

    An odd class count is first padded by a universal one-vertex class.  With
    ``drop_zero`` the zero-demand tasks (which carry no profit) are omitted.
    """
    classes = mcc.classes()
    for c, cls in enumerate(classes):
        if not cls:
            raise InputError(f"color class {c} is empty")
    mcc = _make_even(mcc)
    k = mcc.k
    order = mcc.order()
    n = len(order)
    color = mcc.colors
    # s_1..s_k -> 0..k-1, then v_s, v_t pairs, then t_1..t_k
    s = list(range(k))
    vs = {v: k + 2 * pos for pos, v in enumerate(order)}
    vt = {v: k + 2 * pos + 1 for pos, v in enumerate(order)}
    t = [k + 2 * n + i for i in range(k)]
    size = 2 * n + 2 * k
    p_sq = (k // 2) ** 2
    caps = [p_sq] * (size - 1)
    for i in range(1, k):
        cap = control_capacity(k, i)
        caps[i - 1] = cap                  # s_i - s_{i+1}
        caps[size - 1 - i] = cap           # t_{k-i} - t_{k-i+1}
    graph = CapacitatedGraph(size, [(x, x + 1, caps[x]) for x in range(size - 1)])

    tasks: List[Task] = []

    def add(a: int, b: int, demand: int) -> None:
        if drop_zero and demand == 0:
            return
        tasks.append(Task(a, b, demand, demand * abs(b - a)))

    for v in order:
        i = color[v] + 1
        add(s[i - 1], vs[v], max(0, k - 2 * i + 1))
        add(vs[v], vt[v], max(k - i, i - 1))
        add(vt[v], t[i - 1], max(0, 2 * i - k - 1))
    pos = {v: j for j, v in enumerate(order)}
    for u, v in mcc.edges:
        if color[u] == color[v]:
            continue
        a, b = (u, v) if pos[u] < pos[v] else (v, u)
        add(vt[a], vs[b], 1)
    tau = sum(caps)
    prov = {"generator": "mcc", "k": k, "drop_zero": drop_zero}
    return Instance(graph, tasks, tau, size, prov)


def check_mcc_bruteforce(mcc: MccInput, budget: int = DEFAULT_CHECK_BUDGET) -> bool:
    """Whether one vertex per class can be chosen pairwise adjacent."""
    classes = mcc.classes()
    space = 1
    for cls in classes:
        space *= len(cls)
    if space > budget:
        raise LimitExceeded(f"{space} candidate cliques exceed budget {budget}")
    edges = set(mcc.edges)
    for pick in itertools.product(*classes):
        if all(edge_key(a, b) in edges for a, b in itertools.combinations(pick, 2)):
            return True
    return False


# -- Unary Bin Packing -------------------------------------------------------

def reduce_binpacking(bp: BinPackingInput) -> Instance:
    """Two terminals joined through one vertex per bin; one unit-profit task per item."""
    k, m = bp.bins, bp.bin_capacity
    if sum(bp.item_sizes) != k * m:
        raise InputError(f"item sizes sum to {sum(bp.item_sizes)}, expected {k * m}")
    edges = []
    for b in range(2, k + 2):
        edges.append((0, b, m))
        edges.append((1, b, m))
    tasks = [Task(0, 1, h, 1) for h in bp.item_sizes]
    return Instance(CapacitatedGraph(k + 2, edges), tasks, len(tasks), 2, {"generator": "binpack"})


def check_binpacking_bruteforce(bp: BinPackingInput, budget: int = DEFAULT_CHECK_BUDGET) -> bool:
    """Tries all ``k**p`` assignments of items to bins."""
    k, m, items = bp.bins, bp.bin_capacity, bp.item_sizes
    if k ** len(items) > budget:
        raise LimitExceeded(f"{k ** len(items)} assignments exceed budget {budget}")
    if sum(items) != k * m:
        return False
    for assign in itertools.product(range(k), repeat=len(items)):
        fill = [0] * k
        for b, h in zip(assign, items):
            fill[b] += h
        if all(f == m for f in fill):
            return True
    return False


# -- random instances --------------------------------------------------------

def gen_random(n: int, max_degree: int, max_capacity: int, task_count: int,
               demand_range: Tuple[int, int] = (1, 3), profit_range: Tuple[int, int] = (1, 9),
               max_route_length: Optional[int] = None, seed: int = 0,
               edge_probability: float = 0.5, target: int = 1) -> Instance:
    """Random degree-capped instance, reproducible from ``seed``.

    Candidate edges are visited in a shuffled order and kept with probability
    ``edge_probability`` while both endpoints stay under ``max_degree``.
    """
    if n < 1 or max_capacity < 1 or task_count < 0 or max_degree < 0:
        raise InputError("n and max_capacity must be positive, max_degree and task_count nonnegative")
    if task_count and n < 2:
        raise InputError("tasks need at least two vertices")
    lo_d, hi_d = demand_range
    lo_w, hi_w = profit_range
    if not (0 <= lo_d <= hi_d and 0 <= lo_w <= hi_w):
        raise InputError("bad demand or profit range")
    if not 0.0 <= edge_probability <= 1.0:
        raise InputError("edge_probability must lie in [0, 1]")
    rng = random.Random(seed)
    degree = [0] * n
    pairs = list(itertools.combinations(range(n), 2))
    rng.shuffle(pairs)
    edges = []
    for a, b in pairs:
        if degree[a] < max_degree and degree[b] < max_degree and rng.random() < edge_probability:
            degree[a] += 1
            degree[b] += 1
            edges.append((a, b, rng.randint(1, max_capacity)))
    tasks = []
    for _ in range(task_count):
        a, b = rng.sample(range(n), 2)
        tasks.append(Task(a, b, rng.randint(lo_d, hi_d), rng.randint(lo_w, hi_w)))
    prov = {
        "generator": "random.Random",
        "seed": seed,
        "params": [n, max_degree, max_capacity, task_count, list(demand_range), list(profit_range)],
    }
    return Instance(CapacitatedGraph(n, edges), tasks, target, max_route_length, prov)


# -- text formats --------------------------------------------------------------

def parse_colors(text: str) -> Tuple[int, ...]:
    """One class id per non-blank line, vertex ``i`` on line ``i``."""
    try:
        return tuple(int(line) for line in text.split("\n") if line.strip())
    except ValueError as exc:
        raise InputError(f"bad colors file: {exc}") from exc


def parse_edge_list(text: str) -> List[Tuple[int, int]]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"edge line {line!r} needs two vertices")
        try:
            out.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise InputError(f"bad edge line {line!r}") from exc
    return out


def parse_items(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split())
    except ValueError as exc:
        raise InputError(f"bad item list: {exc}") from exc


def format_items(items: Sequence[int]) -> str:
    return " ".join(str(h) for h in items) + "\n"


def format_colors(colors: Sequence[int]) -> str:
    return "".join(f"{c}\n" for c in colors)
