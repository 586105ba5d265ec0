"""R-graph semigroups, their Markov-Dyck type subshifts, and orbit invariants."""
from .relations import Relation
from .rgraph import RGraph, build_markov_dyck, dyck_graph, one_vertex_graph
from .semigroup import ZERO, NormalForm, reduce_word

__all__ = ["Relation", "RGraph", "build_markov_dyck", "dyck_graph", "one_vertex_graph", "ZERO", "NormalForm", "reduce_word"]
