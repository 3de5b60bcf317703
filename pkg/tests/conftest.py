import pytest

from unsplittable.core import CapacitatedGraph, Instance, Task
from unsplittable.treedecomp import (FORGET, INTRODUCE, JOIN, LEAF, NiceTreeDecomposition, auto_decomposition,
                                     to_nice)


def nice_of(instance_or_graph):
    graph = getattr(instance_or_graph, "graph", instance_or_graph)
    return to_nice(auto_decomposition(graph), graph)


def chain(steps, start):
    """Nice decomposition built from a leaf vertex and a list of ('+'|'-', v) steps."""
    bags, children, kinds, vertex = [frozenset([start])], [()], [LEAF], [None]
    for op, v in steps:
        prev = bags[-1]
        if op == "+":
            bags.append(prev | {v})
            kinds.append(INTRODUCE)
        else:
            bags.append(prev - {v})
            kinds.append(FORGET)
        children.append((len(bags) - 2,))
        vertex.append(v)
    return NiceTreeDecomposition(bags, children, len(bags) - 1, kinds, vertex)


@pytest.fixture
def k2_instance():
    graph = CapacitatedGraph(2, [(0, 1, 5)])
    return Instance(graph, [Task(0, 1, 3, 7)], target=7)


@pytest.fixture
def k2_nice():
    # leaf {0}, introduce 1, forget 0, forget 1
    return chain([("+", 1), ("-", 0), ("-", 1)], 0)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for number in sorted(verdicts):
            terminalreporter.write_line(verdicts[number])
