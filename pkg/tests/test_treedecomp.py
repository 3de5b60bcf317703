import itertools
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unsplittable.core import CapacitatedGraph, InputError, LimitExceeded
from unsplittable.treedecomp import (FORGET, INTRODUCE, JOIN, LEAF, TreeDecomposition, auto_decomposition,
                                     boundary_view, compute_decomposition, read_td, to_nice, validate, write_td)

from conftest import chain


def graph_from(n, pairs):
    return CapacitatedGraph(n, [(u, v, 1) for u, v in pairs])


def random_graph(rng, n, p):
    return graph_from(n, [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p])


def brute_treewidth(graph):
    """Minimum over all elimination orders; independent of the library's search."""
    best = graph.vertex_count - 1
    for order in itertools.permutations(range(graph.vertex_count)):
        adj = {v: set(graph.neighbors(v)) for v in range(graph.vertex_count)}
        width = 0
        for v in order:
            nb = adj.pop(v)
            width = max(width, len(nb))
            for a in nb:
                adj[a] |= nb - {a}
                adj[a].discard(v)
        best = min(best, width)
    return max(best, 0)


def test_single_bag_is_valid():
    g = graph_from(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    td = TreeDecomposition([frozenset(range(4))], [()], 0)
    assert validate(g, td) == (True, [])
    assert td.width == 3


def test_missing_edge_reported():
    g = graph_from(3, [(0, 1), (1, 2)])
    td = TreeDecomposition([frozenset({0, 1}), frozenset({2})], [(1,), ()], 0)
    ok, problems = validate(g, td)
    assert not ok
    assert any("edge" in p for p in problems)


def test_disconnected_occurrence_reported():
    g = graph_from(3, [(0, 1), (1, 2)])
    td = TreeDecomposition([frozenset({0, 1}), frozenset({1, 2}), frozenset({0})], [(1,), (2,), ()], 0)
    ok, problems = validate(g, td)
    assert not ok
    assert any("vertex 0" in p for p in problems)


@pytest.mark.parametrize("n", [2, 5, 9])
def test_exact_trees_have_width_one(n):
    tree = nx.random_labeled_tree(n, seed=n) if hasattr(nx, "random_labeled_tree") else nx.random_tree(n, seed=n)
    g = graph_from(n, tree.edges())
    assert compute_decomposition(g, "exact_small").width == 1


@pytest.mark.parametrize("n", [1, 4, 6])
def test_exact_clique(n):
    g = graph_from(n, itertools.combinations(range(n), 2))
    assert compute_decomposition(g, "exact_small").width == n - 1


def test_exact_cycle():
    g = graph_from(5, [(i, (i + 1) % 5) for i in range(5)])
    assert compute_decomposition(g, "exact_small").width == 2


def test_exact_matches_brute_force_orders():
    rng = random.Random(7)
    for _ in range(25):
        g = random_graph(rng, rng.randint(1, 7), rng.random())
        assert compute_decomposition(g, "exact_small").width == brute_treewidth(g)


def test_exact_limit_and_unknown_mode():
    g = graph_from(5, [])
    with pytest.raises(LimitExceeded):
        compute_decomposition(g, "exact_small", exact_limit=4)
    with pytest.raises(InputError):
        compute_decomposition(g, "fancy")


def test_heuristic_is_valid_and_not_below_exact():
    rng = random.Random(11)
    for _ in range(30):
        g = random_graph(rng, rng.randint(1, 10), rng.random())
        h = compute_decomposition(g, "heuristic")
        assert validate(g, h)[0]
        assert h.width >= compute_decomposition(g, "exact_small").width


def test_single_vertex_nice_form():
    g = CapacitatedGraph(1)
    nice = to_nice(TreeDecomposition([frozenset({0})], [()], 0), g)
    assert nice.kinds == [LEAF, FORGET]
    assert nice.bags == [frozenset({0}), frozenset()]
    assert nice.root == 1


def test_to_nice_rejects_invalid_input():
    g = graph_from(2, [(0, 1)])
    with pytest.raises(InputError):
        to_nice(TreeDecomposition([frozenset({0}), frozenset({1})], [(1,), ()], 0), g)


def test_nice_kinds_are_consistent():
    rng = random.Random(3)
    for _ in range(20):
        g = random_graph(rng, rng.randint(2, 9), 0.4)
        nice = to_nice(auto_decomposition(g), g)
        assert nice.bags[nice.root] == frozenset()
        for t, kind in enumerate(nice.kinds):
            ch = nice.children[t]
            assert all(c < t for c in ch)
            if kind == LEAF:
                assert len(nice.bags[t]) == 1 and ch == ()
            elif kind == INTRODUCE:
                assert nice.bags[t] == nice.bags[ch[0]] | {nice.vertex[t]}
                assert nice.vertex[t] not in nice.bags[ch[0]]
            elif kind == FORGET:
                assert nice.bags[t] == nice.bags[ch[0]] - {nice.vertex[t]}
                assert nice.vertex[t] in nice.bags[ch[0]]
            else:
                assert kind == JOIN and len(ch) == 2
                assert nice.bags[ch[0]] == nice.bags[ch[1]] == nice.bags[t]


@given(st.integers(1, 11), st.floats(0.0, 1.0), st.integers(0, 2 ** 32))
@settings(max_examples=60, deadline=None)
def test_to_nice_preserves_width(n, p, seed):
    g = random_graph(random.Random(seed), n, p)
    td = compute_decomposition(g, "heuristic")
    nice = to_nice(td, g)
    assert nice.width == td.width
    assert validate(g, nice) == (True, [])


def test_p3_forget_zero_first():
    g = graph_from(3, [(0, 1), (1, 2)])
    nice = chain([("+", 1), ("-", 0), ("+", 2), ("-", 1), ("-", 2)], 0)
    assert validate(g, nice)[0]
    view = boundary_view(g, nice, 3)
    t = nice.kinds.index(FORGET)
    assert nice.vertex[t] == 0
    assert view.past[t] == {0}
    assert view.present[t] == {(0, 1)}


@given(st.integers(1, 10), st.floats(0.0, 1.0), st.integers(1, 4), st.integers(0, 2 ** 32))
@settings(max_examples=60, deadline=None)
def test_boundary_invariants(n, p, length, seed):
    g = random_graph(random.Random(seed), n, p)
    nice = to_nice(auto_decomposition(g), g)
    view = boundary_view(g, nice, length)
    delta = g.max_degree
    assert view.present[nice.root] == frozenset()
    for t, kind in enumerate(nice.kinds):
        bag = nice.bags[t]
        past = view.past[t]
        assert not past & bag
        assert view.present[t] == {e for e in g.capacity if (e[0] in past) != (e[1] in past)}
        assert len(view.present[t]) <= len(bag) * delta
        assert len(view.vis[t]) <= len(bag) * sum(delta ** i for i in range(length + 1))
        for a, b in view.e_vis[t]:
            assert a in view.vis[t] and b in view.vis[t]
        ch = nice.children[t]
        if kind == LEAF:
            assert past == frozenset() and view.present[t] == frozenset()
        elif kind == INTRODUCE:
            assert past == view.past[ch[0]]
            assert view.present[t] == view.present[ch[0]]
            assert view.e_vis[t] >= view.e_vis[ch[0]]
        elif kind == FORGET:
            assert past >= view.past[ch[0]]
            assert view.e_vis[t] <= view.e_vis[ch[0]]
        else:
            p1, p2 = view.past[ch[0]], view.past[ch[1]]
            assert not p1 & p2 and past == p1 | p2
            assert view.present[t] == view.present[ch[0]] | view.present[ch[1]]
            assert not view.present[ch[0]] & view.present[ch[1]]


def ball_bound(bag_size, delta, length):
    return bag_size * sum(delta ** i for i in range(length + 1))


def test_vis_bound_counts_the_bag_itself():
    # a star centre sees itself plus all leaves: 1 + delta, above 1 * delta ** 1
    g = graph_from(4, [(0, 1), (0, 2), (0, 3)])
    nice = chain([("+", 1), ("+", 2), ("+", 3), ("-", 1), ("-", 2), ("-", 3), ("-", 0)], 0)
    view = boundary_view(g, nice, 1)
    assert len(view.vis[0]) == 4 > 1 * g.max_degree
    assert len(view.vis[0]) <= ball_bound(1, g.max_degree, 1)


def test_vis_bound_on_random_graphs():
    rng = random.Random(5)
    for _ in range(20):
        g = random_graph(rng, 9, 0.35)
        nice = to_nice(auto_decomposition(g), g)
        for length in (1, 2, 3):
            view = boundary_view(g, nice, length)
            for t in range(len(nice.bags)):
                assert len(view.vis[t]) <= ball_bound(len(nice.bags[t]), g.max_degree, length)


def test_vis_matches_networkx_distances():
    rng = random.Random(9)
    g = random_graph(rng, 10, 0.3)
    ng = nx.Graph(list(g.capacity))
    ng.add_nodes_from(range(10))
    nice = to_nice(auto_decomposition(g), g)
    view = boundary_view(g, nice, 2)
    for t, bag in enumerate(nice.bags):
        expect = set()
        for b in bag:
            expect |= set(nx.single_source_shortest_path_length(ng, b, cutoff=2))
        assert view.vis[t] == expect


def test_td_round_trip():
    g = graph_from(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    td = compute_decomposition(g, "exact_small")
    text = write_td(td, 5)
    assert text.startswith("s td ")
    back = read_td(text)
    assert back.width == td.width
    assert validate(g, back)[0]


def test_read_td_pace_example():
    text = "c example\ns td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n"
    td = read_td(text)
    assert sorted(map(sorted, td.bags)) == [[0, 1], [1, 2]]
    assert validate(graph_from(3, [(0, 1), (1, 2)]), td)[0]


@pytest.mark.parametrize("text", ["", "s td 1 1 1\n", "s td 1 1 2\nb 1 3\n", "s td 2 1 2\nb 1 1\nb 2 2\n"])
def test_read_td_malformed(text):
    with pytest.raises(InputError):
        read_td(text)
