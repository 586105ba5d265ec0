import pytest

from rgraphs.relations import Relation, full_relation, identity_relation
from rgraphs.rgraph import build_markov_dyck, dyck_graph, one_vertex_graph

SPLIT_ADJACENCY = [[0, 1, 0], [1, 0, 1], [1, 0, 1]]
SPLIT_NAMES = ["a0", "a1", "b"]


def example_one_relation():
    """One-vertex relation {(a-, a+), (a-, b+), (b-, a+)}."""
    return Relation.make(["a-", "b-"], ["a+", "b+"], [("a-", "a+"), ("a-", "b+"), ("b-", "a+")])


def off_diagonal_relation(n=3):
    minus = [f"x{i}-" for i in range(n)]
    plus = [f"x{i}+" for i in range(n)]
    return Relation.make(minus, plus, [(minus[i], plus[j]) for i in range(n) for j in range(n) if i != j])


@pytest.fixture
def dyck2():
    return dyck_graph(2)


@pytest.fixture
def example_one():
    return one_vertex_graph(example_one_relation())


@pytest.fixture
def example_two():
    return one_vertex_graph(off_diagonal_relation())


@pytest.fixture
def split_graph():
    """Markov-Dyck graph of [[0,1,0],[1,0,1],[1,0,1]] with vertices a0, a1, b."""
    return build_markov_dyck(SPLIT_ADJACENCY, SPLIT_NAMES)


@pytest.fixture
def identity2():
    return identity_relation(2)


@pytest.fixture
def full22():
    return full_relation(2, 2)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
