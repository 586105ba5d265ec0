import pytest
from conftest import off_diagonal_relation

from rgraphs.quotient import (
    PreconditionError,
    associated_semigroup_graph,
    build_quotient,
    graphs_isomorphic,
    hat_graph,
    neutral_classes,
)
from rgraphs.relations import Relation, are_isomorphic
from rgraphs.rgraph import RGraph, build_markov_dyck, one_vertex_graph


def test_split_graph_quotient(split_graph):
    q = build_quotient(split_graph)
    assert set(q.roots) == {"a0", "b"}
    assert q.root_partition["a1"] == "a0"
    assert len(q.tilde_graph.minus_edges) == 4
    assert graphs_isomorphic(q.tilde_graph, build_markov_dyck([[1, 1], [1, 1]])) is not None


def test_dyck_quotient_is_the_graph_itself(dyck2):
    q = build_quotient(dyck2)
    assert q.hat_graph == dyck2
    assert q.tilde_graph == dyck2


def test_hat_graph_merges_equal_partner_sets():
    rel = Relation.make(["a-", "b-", "c-"], ["a+", "b+"], [("a-", "a+"), ("b-", "a+"), ("c-", "b+")])
    hat, class_of_minus, _ = hat_graph(one_vertex_graph(rel))
    assert class_of_minus["a-"] == class_of_minus["b-"] != class_of_minus["c-"]
    assert len(hat.minus_edges) == 2


def test_neutral_classes_examples(split_graph, dyck2):
    assert neutral_classes(split_graph) == [("a0", "a1"), ("b",)]
    assert neutral_classes(dyck2) == [("p",)]
    every_vertex_two_predecessors = build_markov_dyck([[1, 1], [1, 1]])
    assert sorted(neutral_classes(every_vertex_two_predecessors)) == [("p0",), ("p1",)]


def test_one_vertex_circle_graph_is_fixed():
    g = one_vertex_graph(off_diagonal_relation())
    assert associated_semigroup_graph(g) == g


def test_quotient_requires_context_conditions():
    g = RGraph.make(
        ["p", "q"],
        [("e1-", "p", "q"), ("e2-", "p", "q"), ("f-", "q", "p")],
        [("e1+", "q", "p"), ("e2+", "q", "p"), ("f+", "p", "q")],
        [("e1-", "e1+"), ("e1-", "e2+"), ("e2-", "e1+"), ("f-", "f+")],
    )
    with pytest.raises(PreconditionError):
        build_quotient(g)


def test_all_vertices_in_trees_is_rejected():
    cycle = build_markov_dyck([[0, 1], [1, 0]])
    with pytest.raises(PreconditionError):
        build_quotient(cycle)


def test_chain_family_quotient_is_one_vertex():
    from rgraphs.families import full_block, make_family, random_relation
    import random

    rng = random.Random(5)
    blocks = {
        ("p", "p"): random_relation(rng, "p", "p", 2, 2, "circle"),
        ("p", "q"): full_block("p", "q", 2, 1),
        ("q", "p"): random_relation(rng, "q", "p", 2, 2, "nabla"),
    }
    inst = make_family("chain", blocks)
    tilde = associated_semigroup_graph(inst.graph)
    assert tilde.vertices == ("p",)
    from rgraphs.quotient import hat_graph as hat_of
    from rgraphs.relations import kronecker_sum, tagged

    hat = hat_of(inst.graph)[0]
    expected = kronecker_sum(tagged(hat.relation_block("p", "p"), 0), tagged(hat.relation_block("q", "p"), 1))
    assert are_isomorphic(tilde.relation_block("p", "p"), expected) is not None


def test_graphs_isomorphic_rejects_different_graphs(dyck2):
    assert graphs_isomorphic(dyck2, build_markov_dyck([[3]])) is None
