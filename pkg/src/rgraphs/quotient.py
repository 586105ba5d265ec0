"""Edge-class merging and tree contraction, giving the R-graph of the associated semigroup.

The hat graph merges edges of one block with equal partner sets. Vertices with a
single predecessor and a fully related incoming block then hang off their
predecessor through a single hat edge; contracting these tree edges onto their
roots yields the tilde graph.
"""
from dataclasses import dataclass

from .rgraph import EXCLUDE_SELF, RGraph, check_context_conditions, derived_sets, require_valid


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class QuotientData:
    source_graph: RGraph
    mode: str
    hat_graph: RGraph
    class_of_minus: dict
    class_of_plus: dict
    tree_minus: frozenset
    tree_plus: frozenset
    roots: tuple
    root_partition: dict
    tilde_graph: RGraph

    def classes(self):
        groups = {}
        for v in self.source_graph.vertices:
            groups.setdefault(self.root_partition[v], []).append(v)
        return [tuple(groups[r]) for r in self.roots]


def _class_id(members):
    return "|".join(sorted(members))


def hat_graph(g):
    """Merge edges of each block that have the same partner set.

    Returns (hat graph, minus id -> class id, plus id -> class id).
    """
    class_of_minus, class_of_plus = {}, {}
    minus_edges, plus_edges = [], []
    for key in sorted(g.blocks):
        block = g.relation_block(*key)
        for symbols, side, lookup, out, edges in (
            (block.minus, 0, g.minus_by_id, class_of_minus, minus_edges),
            (block.plus, 1, g.plus_by_id, class_of_plus, plus_edges),
        ):
            groups = {}
            for s in symbols:
                partners = frozenset(pair[1 - side] for pair in block.pairs if pair[side] == s)
                groups.setdefault(partners, []).append(s)
            for members in sorted(groups.values(), key=_class_id):
                cid = _class_id(members)
                for s in members:
                    out[s] = cid
                e = lookup[members[0]]
                edges.append((cid, e.source, e.target))
    relation = set()
    for m, p in g.relation:
        relation.add((class_of_minus[m], class_of_plus[p]))
    # Partner-set classes make the merged relation well defined; confirm it.
    for m in g.minus_by_id:
        for p in g.plus_by_id:
            if g.block_of(m) != g.block_of(p):
                continue
            if ((m, p) in g.relation) != ((class_of_minus[m], class_of_plus[p]) in relation):
                raise ValueError(f"merged relation is ill defined at {(m, p)}")
    hat = RGraph.make(g.vertices, minus_edges, plus_edges, sorted(relation))
    return hat, class_of_minus, class_of_plus


def build_quotient(g, mode=EXCLUDE_SELF):
    require_valid(g)
    failed = [r.condition for r in check_context_conditions(g, mode) if not r.holds]
    if failed:
        raise PreconditionError("quotient requires the context conditions; failed: " + ", ".join(failed))
    d = derived_sets(g, mode)
    roots = tuple(v for v in g.vertices if v not in d.p1_full)
    if not roots:
        raise PreconditionError(
            "every vertex has a single fully related predecessor block; the subshift is then "
            "a topological Markov shift and no quotient is computed"
        )
    hat, class_of_minus, class_of_plus = hat_graph(g)
    tree_minus = frozenset(e.id for e in hat.minus_edges if e.target in d.p1_full)
    tree_plus = frozenset(e.id for e in hat.plus_edges if e.source in d.p1_full)

    root_partition = {}
    for v in g.vertices:
        u, steps = v, 0
        while u in d.p1_full:
            u = d.eta[u]
            steps += 1
            if steps > len(g.vertices):
                raise PreconditionError(f"tree above {v!r} never reaches a root")
        root_partition[v] = u

    tilde_minus = [
        (e.id, root_partition[e.source], root_partition[e.target])
        for e in hat.minus_edges
        if e.id not in tree_minus
    ]
    tilde_plus = [
        (e.id, root_partition[e.source], root_partition[e.target])
        for e in hat.plus_edges
        if e.id not in tree_plus
    ]
    kept = {e[0] for e in tilde_minus} | {e[0] for e in tilde_plus}
    tilde_relation = [(m, p) for m, p in sorted(hat.relation) if m in kept and p in kept]
    tilde = RGraph.make(roots, tilde_minus, tilde_plus, tilde_relation)
    return QuotientData(
        g, mode, hat, class_of_minus, class_of_plus, tree_minus, tree_plus, roots, root_partition, tilde
    )


def associated_semigroup_graph(g, mode=EXCLUDE_SELF):
    return build_quotient(g, mode).tilde_graph


def neutral_classes(g, mode=EXCLUDE_SELF):
    return build_quotient(g, mode).classes()


def graphs_isomorphic(a, b):
    """Isomorphism of R-graphs by brute force over vertex bijections.

    Returns (vertex map, edge map) or None. Within each block the edges are
    matched by a relation isomorphism, so this is exact for the small graphs
    handled here.
    """
    from itertools import permutations

    from .relations import are_isomorphic

    if len(a.vertices) != len(b.vertices):
        return None
    if (len(a.minus_edges), len(a.plus_edges)) != (len(b.minus_edges), len(b.plus_edges)):
        return None
    for image in permutations(b.vertices):
        vmap = dict(zip(a.vertices, image))
        edge_map = {}
        for (q, r), (minus, plus) in a.blocks.items():
            target = (vmap[q], vmap[r])
            if target not in b.blocks:
                break
            iso = are_isomorphic(a.relation_block(q, r), b.relation_block(*target))
            if iso is None:
                break
            edge_map.update(iso[0])
            edge_map.update(iso[1])
        else:
            if len(edge_map) == len(a.minus_edges) + len(a.plus_edges) and len(a.blocks) == len(b.blocks):
                return vmap, edge_map
    return None
