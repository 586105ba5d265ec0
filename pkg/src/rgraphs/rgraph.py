"""Partitioned directed graphs with per-block relations, and their structural conditions.

Conventions used throughout the package:

* a minus edge with source q and target r lies in block (q, r);
* a plus edge lies in block (q, r) when its source is r and its target is q,
  so it runs against the minus edges of its block;
* the relation of block (q, r) pairs minus and plus edges of that block only.
"""
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

from .relations import Relation, full_rows_cols

INCLUDE_SELF = "include"
EXCLUDE_SELF = "exclude"
MODES = (INCLUDE_SELF, EXCLUDE_SELF)


class Edge(NamedTuple):
    id: str
    source: str
    target: str


@dataclass(frozen=True)
class RGraph:
    vertices: tuple
    minus_edges: tuple
    plus_edges: tuple
    relation: frozenset

    @classmethod
    def make(cls, vertices, minus_edges, plus_edges, relation):
        return cls(
            tuple(vertices),
            tuple(Edge(*e) for e in minus_edges),
            tuple(Edge(*e) for e in plus_edges),
            frozenset(tuple(p) for p in relation),
        )

    @cached_property
    def minus_by_id(self):
        return {e.id: e for e in self.minus_edges}

    @cached_property
    def plus_by_id(self):
        return {e.id: e for e in self.plus_edges}

    def block_of(self, edge_id):
        if edge_id in self.minus_by_id:
            e = self.minus_by_id[edge_id]
            return (e.source, e.target)
        e = self.plus_by_id[edge_id]
        return (e.target, e.source)

    @cached_property
    def blocks(self):
        """Map (q, r) -> (minus ids, plus ids) for every non-empty block."""
        out = {}
        for e in self.minus_edges:
            out.setdefault((e.source, e.target), ([], []))[0].append(e.id)
        for e in self.plus_edges:
            out.setdefault((e.target, e.source), ([], []))[1].append(e.id)
        return {k: (tuple(m), tuple(p)) for k, (m, p) in out.items()}

    @cached_property
    def _block_relations(self):
        grouped = {}
        for m, p in self.relation:
            grouped.setdefault(self.block_of(m), set()).add((m, p))
        return {
            key: Relation(minus, plus, frozenset(grouped.get(key, ())))
            for key, (minus, plus) in self.blocks.items()
        }

    def relation_block(self, q, r):
        return self._block_relations.get((q, r), Relation((), (), frozenset()))

    def related(self, minus_id, plus_id):
        return (minus_id, plus_id) in self.relation

    def is_one_vertex(self):
        return len(self.vertices) == 1


def one_vertex_graph(rel, vertex="p"):
    """One-vertex R-graph whose single block carries `rel` (symbols become edge ids)."""
    return RGraph.make(
        [vertex],
        [(str(m), vertex, vertex) for m in rel.minus],
        [(str(p), vertex, vertex) for p in rel.plus],
        [(str(m), str(p)) for m, p in rel.pairs],
    )


def dyck_graph(n):
    """One vertex with n matched bracket pairs a-/a+, b-/b+, ..."""
    names = [chr(ord("a") + i) if n <= 26 else f"x{i}" for i in range(n)]
    return RGraph.make(
        ["p"],
        [(f"{x}-", "p", "p") for x in names],
        [(f"{x}+", "p", "p") for x in names],
        [(f"{x}-", f"{x}+") for x in names],
    )


def _reachable(vertices, edges, start, forward=True):
    adjacency = {v: [] for v in vertices}
    for e in edges:
        a, b = (e.source, e.target) if forward else (e.target, e.source)
        adjacency[a].append(b)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adjacency[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def is_strongly_connected(vertices, edges):
    if not vertices:
        return False
    start = vertices[0]
    return (
        len(_reachable(vertices, edges, start)) == len(vertices)
        and len(_reachable(vertices, edges, start, forward=False)) == len(vertices)
    )


def validate(g):
    """List of invariant violations; empty means the graph is a valid R-graph."""
    violations = []
    vertex_set = set(g.vertices)
    if len(vertex_set) != len(g.vertices):
        violations.append("duplicate vertex id")
    if not g.vertices:
        violations.append("no vertices")
    ids = [e.id for e in g.minus_edges] + [e.id for e in g.plus_edges]
    seen = set()
    for i in ids:
        if i in seen or i in vertex_set:
            violations.append(f"id {i!r} is not unique among edges and vertices")
        seen.add(i)
    for kind, edges in (("minus", g.minus_edges), ("plus", g.plus_edges)):
        for e in edges:
            for end in (e.source, e.target):
                if end not in vertex_set:
                    violations.append(f"{kind} edge {e.id!r} references unknown vertex {end!r}")
    if violations:
        return violations
    for key, (minus, plus) in sorted(g.blocks.items()):
        if not minus or not plus:
            violations.append(f"block asymmetry at {key}: {len(minus)} minus vs {len(plus)} plus edges")
    for m, p in sorted(g.relation):
        if m not in g.minus_by_id or p not in g.plus_by_id:
            violations.append(f"relation pair {(m, p)} references an unknown edge")
        elif g.block_of(m) != g.block_of(p):
            violations.append(f"relation pair {(m, p)} crosses blocks {g.block_of(m)} and {g.block_of(p)}")
    if not is_strongly_connected(g.vertices, g.minus_edges):
        violations.append("not strongly connected: minus edges do not connect every pair of vertices")
    return violations


def require_valid(g):
    problems = validate(g)
    if problems:
        raise ValueError("invalid R-graph: " + "; ".join(problems))


@dataclass(frozen=True)
class DerivedSets:
    p1: frozenset
    eta: dict
    marked_minus: frozenset
    marked_plus: frozenset
    p1_full: frozenset
    mode: str

    @property
    def p1_partial(self):
        return self.p1 - self.p1_full


def derived_sets(g, mode=EXCLUDE_SELF):
    """Single-predecessor vertices, their predecessors, marked edges, and fully related vertices."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    predecessors = {v: set() for v in g.vertices}
    for e in g.minus_edges:
        predecessors[e.target].add(e.source)
    eta = {}
    for v in g.vertices:
        if len(predecessors[v]) == 1:
            (u,) = predecessors[v]
            if mode == EXCLUDE_SELF and u == v:
                continue
            eta[v] = u
    marked_minus, marked_plus, p1_full = set(), set(), set()
    for v, u in eta.items():
        block = g.relation_block(u, v)
        rows, cols = full_rows_cols(block)
        marked_minus |= rows
        marked_plus |= cols
        if len(block.pairs) == len(block.minus) * len(block.plus):
            p1_full.add(v)
    return DerivedSets(
        frozenset(eta), eta, frozenset(marked_minus), frozenset(marked_plus), frozenset(p1_full), mode
    )


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    holds: bool
    witness: object = None


def shortest_path(edges, source, target, required=None):
    """Shortest non-empty path from source to target along `edges` (s -> t).

    With `required`, the path must use at least one edge whose id is in it.
    Edges are explored in id order so the result is deterministic.
    """
    adjacency = {}
    for e in sorted(edges, key=lambda e: e.id):
        adjacency.setdefault(e.source, []).append(e)
    need = required is not None
    start = (source, not need)
    parent = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        v, ok = state
        for e in adjacency.get(v, ()):
            nxt = (e.target, ok or (need and e.id in required))
            if nxt == (target, True):
                path = [e.id]
                while state != start:
                    state, edge_id = parent[state]
                    path.append(edge_id)
                return path[::-1]
            if nxt not in parent:
                parent[nxt] = (state, e.id)
                queue.append(nxt)
    return None


def _shortest_cycle(edges, vertices, required=None):
    best = None
    for v in vertices:
        path = shortest_path(edges, v, v, required)
        if path is not None and (best is None or (len(path), path) < (len(best), best)):
            best = path
    return best


def _marked(g, derived):
    minus = [e for e in g.minus_edges if e.id in derived.marked_minus]
    plus = [e for e in g.plus_edges if e.id in derived.marked_plus]
    return minus, plus


def check_context_conditions(g, mode=EXCLUDE_SELF):
    """The single-predecessor, marked-cycle and marked-path conditions that decide
    whether the identity presentation has the context property."""
    require_valid(g)
    d = derived_sets(g, mode)
    partial = d.p1_partial
    reports = []

    witness = None
    for p in sorted(partial):
        rows, cols = full_rows_cols(g.relation_block(d.eta[p], p))
        if rows and cols:
            witness = {"vertex": p, "full_minus": sorted(rows)[0], "full_plus": sorted(cols)[0]}
            break
    reports.append(ConditionReport("single_predecessor_block_one_sided", witness is None, witness))

    marked_minus, marked_plus = _marked(g, d)
    bad_minus = {e.id for e in marked_minus if e.target in partial}
    bad_plus = {e.id for e in marked_plus if e.source in partial}
    cycle = _shortest_cycle(marked_minus, g.vertices, bad_minus)
    reports.append(ConditionReport("marked_minus_cycles", cycle is None, cycle and {"cycle": cycle}))
    cycle = _shortest_cycle(marked_plus, g.vertices, bad_plus)
    reports.append(ConditionReport("marked_plus_cycles", cycle is None, cycle and {"cycle": cycle}))

    witness = None
    for q in sorted(d.p1):
        for r in sorted(d.p1):
            if q == r or witness:
                continue
            plain_minus = shortest_path(marked_minus, q, r)
            plain_plus = shortest_path(marked_plus, q, r)
            if plain_minus is None or plain_plus is None:
                continue
            flagged_minus = shortest_path(marked_minus, q, r, bad_minus)
            flagged_plus = shortest_path(marked_plus, q, r, bad_plus)
            if flagged_minus is not None:
                witness = {"from": q, "to": r, "minus_path": flagged_minus, "plus_path": plain_plus}
            elif flagged_plus is not None:
                witness = {"from": q, "to": r, "minus_path": plain_minus, "plus_path": flagged_plus}
    reports.append(ConditionReport("marked_paths_exclusive", witness is None, witness))
    return reports


def check_local_conditions(g, mode=EXCLUDE_SELF):
    """Distinct partner sets, acyclic marked edges, one-sided blocks and no parallel
    marked paths: the conditions characterizing semigroups that arise as associated ones."""
    require_valid(g)
    d = derived_sets(g, mode)
    reports = []
    for name, side in (("distinct_minus_partner_sets", 0), ("distinct_plus_partner_sets", 1)):
        witness = None
        for key in sorted(g.blocks):
            block = g.relation_block(*key)
            seen = {}
            symbols = block.minus if side == 0 else block.plus
            for s in sorted(symbols):
                partners = frozenset(p if side == 0 else m for m, p in block.pairs if (m if side == 0 else p) == s)
                if partners in seen:
                    witness = {"block": list(key), "edges": [seen[partners], s]}
                    break
                seen[partners] = s
            if witness:
                break
        reports.append(ConditionReport(name, witness is None, witness))

    marked_minus, marked_plus = _marked(g, d)
    for name, edges in (("marked_minus_acyclic", marked_minus), ("marked_plus_acyclic", marked_plus)):
        cycle = _shortest_cycle(edges, g.vertices)
        reports.append(ConditionReport(name, cycle is None, cycle and {"cycle": cycle}))

    witness = None
    for p in sorted(d.p1):
        if d.eta[p] == p:
            continue
        rows, cols = full_rows_cols(g.relation_block(d.eta[p], p))
        if rows and cols:
            witness = {"vertex": p, "full_minus": sorted(rows)[0], "full_plus": sorted(cols)[0]}
            break
    reports.append(ConditionReport("one_sided_blocks", witness is None, witness))

    witness = None
    for q in sorted(d.p1):
        for r in sorted(d.p1):
            if q == r or witness:
                continue
            f_minus = shortest_path(marked_minus, q, r)
            f_plus = shortest_path(marked_plus, q, r)
            if f_minus is not None and f_plus is not None:
                witness = {"from": q, "to": r, "minus_path": f_minus, "plus_path": f_plus}
    reports.append(ConditionReport("no_parallel_marked_paths", witness is None, witness))
    return reports


def build_markov_dyck(adjacency, vertex_names=None):
    """R-graph of the graph inverse semigroup of a directed graph given by its adjacency matrix.

    Edge k from vertex q to r becomes minus edge "q.r.k-" and plus edge "q.r.k+",
    related to each other only.
    """
    n = len(adjacency)
    if any(len(row) != n for row in adjacency):
        raise ValueError("adjacency matrix must be square")
    if any(x < 0 for row in adjacency for x in row):
        raise ValueError("adjacency entries must be non-negative")
    names = list(vertex_names) if vertex_names else [f"p{i}" for i in range(n)]
    minus, plus, relation = [], [], []
    for i, q in enumerate(names):
        for j, r in enumerate(names):
            for k in range(adjacency[i][j]):
                base = f"{q}.{r}.{k}"
                minus.append((base + "-", q, r))
                plus.append((base + "+", r, q))
                relation.append((base + "-", base + "+"))
    if not is_strongly_connected(names, [Edge(*e) for e in minus]):
        raise ValueError("adjacency matrix is not strongly connected")
    return RGraph.make(names, minus, plus, relation)


def relabel(g, vertex_map, edge_map):
    """Copy of g with vertices and edge ids renamed."""
    return RGraph.make(
        [vertex_map[v] for v in g.vertices],
        [(edge_map[e.id], vertex_map[e.source], vertex_map[e.target]) for e in g.minus_edges],
        [(edge_map[e.id], vertex_map[e.source], vertex_map[e.target]) for e in g.plus_edges],
        [(edge_map[m], edge_map[p]) for m, p in g.relation],
    )
