"""Labeled presentations, admissibility, periodic orbits, links and bounded contexts.

A presentation is a strongly connected labeled graph whose labels are nonzero
pure elements (or idempotents) of an R-graph semigroup. Its admissible words are
the paths with nonzero label product.
"""
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import lcm

from .relations import Relation, is_primitive
from .rgraph import Edge, EXCLUDE_SELF, check_local_conditions, is_strongly_connected, require_valid
from .semigroup import ZERO, NormalForm, Reducer, reduce_word


@dataclass(frozen=True)
class Presentation:
    vertices: tuple
    symbols: tuple
    labels: dict = field(hash=False)
    base_graph: object = field(hash=False)

    def __post_init__(self):
        ids = [s.id for s in self.symbols]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate symbol id")
        vertex_set = set(self.vertices)
        for s in self.symbols:
            if s.source not in vertex_set or s.target not in vertex_set:
                raise ValueError(f"symbol {s.id!r} references an unknown vertex")
            label = self.labels.get(s.id)
            if not isinstance(label, NormalForm) or not label.is_pure():
                raise ValueError(f"symbol {s.id!r} needs a nonzero pure label")
        if not is_strongly_connected(self.vertices, self.symbols):
            raise ValueError("presentation graph is not strongly connected")

    @cached_property
    def by_id(self):
        return {s.id: s for s in self.symbols}

    @cached_property
    def order(self):
        return {s.id: i for i, s in enumerate(self.symbols)}

    @cached_property
    def outgoing(self):
        out = {v: [] for v in self.vertices}
        for s in self.symbols:
            out[s.source].append(s.id)
        return out

    @cached_property
    def incoming(self):
        inc = {v: [] for v in self.vertices}
        for s in self.symbols:
            inc[s.target].append(s.id)
        return inc

    def label_tokens(self, symbol):
        return self.labels[symbol].tokens()


def identity_presentation(g):
    """Each edge is a symbol labeled by itself; symbols run along the edges' own direction."""
    require_valid(g)
    symbols, labels = [], {}
    for e in g.minus_edges:
        symbols.append(Edge(e.id, e.source, e.target))
        labels[e.id] = NormalForm((), e.source, (e.id,))
    for e in g.plus_edges:
        symbols.append(Edge(e.id, e.source, e.target))
        labels[e.id] = NormalForm((e.id,), e.target, ())
    return Presentation(tuple(g.vertices), tuple(symbols), labels, g)


def _check_symbols(p, word):
    for s in word:
        if s not in p.by_id:
            raise ValueError(f"unknown symbol {s!r}")


def is_path(p, word):
    return all(p.by_id[a].target == p.by_id[b].source for a, b in zip(word, word[1:]))


def label_of(p, word):
    """Label product of a path (None for the empty word)."""
    reducer = Reducer(p.base_graph)
    for s in word:
        ok, _ = reducer.push_all(p.label_tokens(s))
        if not ok:
            return ZERO
    return reducer.value()


def admissible(p, word):
    word = list(word)
    _check_symbols(p, word)
    if not is_path(p, word):
        return False
    return label_of(p, word) is not ZERO


# ---------------------------------------------------------------- presentation checks

@dataclass(frozen=True)
class PresentationReport:
    vertex_classes: dict
    labels_pure: bool
    classes_nonempty: bool
    classes_partition: bool
    idempotent_compatible: bool
    realizes_elements: bool
    bounds: dict
    failures: tuple

    @property
    def holds(self):
        return not self.failures


def _reachable_labels(p, start, max_len):
    """(end vertex, label) pairs of nonempty paths from `start` with at most `max_len` symbols."""
    seen = set()
    frontier = [(start, ())]
    for _ in range(max_len):
        new_frontier = []
        for v, word in frontier:
            for s in p.outgoing[v]:
                w = word + (s,)
                value = label_of(p, w)
                if value is ZERO:
                    continue
                key = (p.by_id[s].target, value)
                if key not in seen:
                    seen.add(key)
                    new_frontier.append((p.by_id[s].target, w))
        frontier = new_frontier
    return seen


def check_presentation(p, cycle_bound=4, g5_bound=3):
    """Decide the structural presentation conditions, with bounded search where needed.

    Vertex classes come from cycles of at most `cycle_bound` symbols whose label
    is an idempotent; element realization is verified for normal forms with at
    most `g5_bound` generators and paths of at most `g5_bound + 2 * cycle_bound`
    symbols.
    """
    g = p.base_graph
    failures = []
    labels_pure = all(p.labels[s.id].is_pure() for s in p.symbols)
    if not labels_pure:
        failures.append("labels must be pure")

    classes = {v: set() for v in g.vertices}
    for v in p.vertices:
        for end, value in _reachable_labels(p, v, cycle_bound):
            if end == v and value.is_idempotent():
                classes[value.base].add(v)
    classes_nonempty = all(classes.values())
    if not classes_nonempty:
        failures.append("some semigroup vertex has no presentation vertex with an idempotent cycle")
    counts = Counter(v for members in classes.values() for v in members)
    classes_partition = classes_nonempty and all(counts[v] == 1 for v in p.vertices)
    if not classes_partition:
        failures.append("idempotent cycle classes do not partition the presentation vertices")

    compatible = True
    for q, members in classes.items():
        for v in members:
            for s in p.outgoing[v]:
                if reduce_word(g, [q] + p.label_tokens(s)) is ZERO:
                    compatible = False
            for s in p.incoming[v]:
                if reduce_word(g, p.label_tokens(s) + [q]) is ZERO:
                    compatible = False
    if not compatible:
        failures.append("an edge at a classed vertex is incompatible with the class idempotent")

    realizes = True
    if classes_partition:
        path_bound = g5_bound + 2 * cycle_bound
        reach = {v: _reachable_labels(p, v, path_bound) for v in p.vertices}
        for f in _normal_forms(g, g5_bound):
            q = _left_vertex(g, f)
            r = _right_vertex(g, f)
            for u in classes[q]:
                for w in classes[r]:
                    if (w, f) not in reach[u]:
                        realizes = False
                        failures.append(f"element {f} is not realized from {u} to {w} within the bound")
                        break
                if not realizes:
                    break
            if not realizes:
                break
    else:
        realizes = False
    return PresentationReport(
        {q: tuple(sorted(m)) for q, m in classes.items()},
        labels_pure,
        classes_nonempty,
        classes_partition,
        compatible,
        realizes,
        {"cycle_bound": cycle_bound, "g5_bound": g5_bound, "bounded": True},
        tuple(failures),
    )


def _left_vertex(g, f):
    if f.plus:
        return g.plus_by_id[f.plus[0]].source
    return f.base


def _right_vertex(g, f):
    if f.minus:
        return g.minus_by_id[f.minus[-1]].target
    return f.base


def _normal_forms(g, max_len):
    """All nonzero normal forms with at most `max_len` edges."""
    out = []
    for v in g.vertices:
        plus_paths = _paths_into(g, v, max_len)
        for plus in plus_paths:
            for minus in _paths_from(g, v, max_len - len(plus)):
                out.append(NormalForm(plus, v, minus))
    return out


def _paths_from(g, v, max_len):
    out = [()]
    frontier = [((), v)]
    for _ in range(max_len):
        nxt = []
        for path, end in frontier:
            for e in g.minus_edges:
                if e.source == end:
                    nxt.append((path + (e.id,), e.target))
        out.extend(p for p, _ in nxt)
        frontier = nxt
    return out


def _paths_into(g, v, max_len):
    out = [()]
    frontier = [((), v)]
    for _ in range(max_len):
        nxt = []
        for path, start in frontier:
            for e in g.plus_edges:
                if e.target == start:
                    nxt.append(((e.id,) + path, e.source))
        out.extend(p for p, _ in nxt)
        frontier = nxt
    return out


# ---------------------------------------------------------------- periodic orbits

NEUTRAL, NEGATIVE, POSITIVE = "neutral", "negative", "positive"


@dataclass(frozen=True)
class Orbit:
    word: tuple
    length: int
    kind: str
    multiplier: NormalForm
    vertex: str

    @property
    def name(self):
        return " ".join(self.word)


def default_power_bound(n):
    return 2 * n + 4


def _net_length(p, word):
    return sum(len(p.labels[s].minus) - len(p.labels[s].plus) for s in word)


def classify_periodic_word(p, word, power_bound=None):
    """Orbit of the periodic point ...www..., or None if that point is not in the shift.

    The point lies in the shift iff some rotation of w has a nonzero pure label:
    powers of a pure cycle never vanish, and every finite factor of the point
    is a factor of such a power. Arm lengths then fix the class; `power_bound`
    powers of every rotation are additionally checked to be nonzero.
    """
    word = tuple(word)
    if not word:
        raise ValueError("empty word")
    _check_symbols(p, word)
    if not is_primitive(word):
        raise ValueError("word is a proper power")
    n = len(word)
    if not is_path(p, word + word[:1]):
        return None
    witness = None
    for i in range(n):
        rotation = word[i:] + word[:i]
        value = label_of(p, rotation)
        if value is ZERO:
            return None
        if witness is None and value.is_pure():
            witness = value
    if witness is None:
        return None
    bound = default_power_bound(n) if power_bound is None else power_bound
    if bound > 1:
        for i in range(n):
            rotation = word[i:] + word[:i]
            if label_of(p, rotation * bound) is ZERO:
                return None
    net = _net_length(p, word)
    kind = NEUTRAL if net == 0 else (NEGATIVE if net > 0 else POSITIVE)
    return Orbit(word, n, kind, witness, witness.base)


@dataclass
class OrbitCensus:
    max_len: int
    orbits: dict
    refined: dict = field(default_factory=dict)

    def count(self, kind, n):
        return sum(1 for o in self.orbits.get(n, ()) if o.kind == kind)

    def I_minus(self, n):
        return self.count(NEGATIVE, n)

    def I_zero(self, n):
        return self.count(NEUTRAL, n)

    def I_plus(self, n):
        return self.count(POSITIVE, n)

    def of_kind(self, kind, n):
        return [o for o in self.orbits.get(n, ()) if o.kind == kind]

    def refined_count(self, n, key):
        return self.refined.get(n, Counter()).get(key, 0)

    def summary(self):
        return {
            n: {NEGATIVE: self.I_minus(n), NEUTRAL: self.I_zero(n), POSITIVE: self.I_plus(n)}
            for n in range(1, self.max_len + 1)
        }


def periodic_orbits(p, max_len, power_bound=None):
    """All periodic orbits of length at most `max_len`, as lists keyed by length.

    Words are enumerated as least rotations by depth-first search over paths
    whose label products stay nonzero; each orbit is then classified exactly.
    """
    out = {n: [] for n in range(1, max_len + 1)}
    order = p.order
    reducer = Reducer(p.base_graph)
    word = []

    def visit():
        n = len(word)
        if n and p.by_id[word[-1]].target == p.by_id[word[0]].source:
            w = tuple(word)
            if least_rotation_by(w, order) == w and is_primitive(w):
                orbit = classify_periodic_word(p, w, power_bound)
                if orbit is not None:
                    out[n].append(orbit)
        if n == max_len:
            return
        candidates = p.outgoing[p.by_id[word[-1]].target] if word else [s.id for s in p.symbols]
        for s in candidates:
            if word and order[s] < order[word[0]]:
                continue
            ok, count = reducer.push_all(p.label_tokens(s))
            if ok:
                word.append(s)
                visit()
                word.pop()
            reducer.pop_n(count)

    visit()
    for n in out:
        out[n].sort(key=lambda o: [order[s] for s in o.word])
    return out


def least_rotation_by(word, order):
    keyed = [order[s] for s in word]
    best = min(range(len(word)), key=lambda i: keyed[i:] + keyed[:i])
    return word[best:] + word[:best]


def census(p, max_len, power_bound=None, refine=None):
    """Orbit census up to `max_len`; `refine` maps an orbit to a key for refined counts."""
    if max_len < 1:
        raise ValueError("census length must be at least 1")
    orbits = periodic_orbits(p, max_len, power_bound)
    refined = {}
    if refine is not None:
        for n, items in orbits.items():
            refined[n] = Counter(k for k in (refine(o) for o in items) if k is not None)
    return OrbitCensus(max_len, orbits, refined)


# ---------------------------------------------------------------- links between orbits

def _require_acyclic_marks(p, mode):
    for report in check_local_conditions(p.base_graph, mode):
        if report.condition in ("marked_minus_acyclic", "marked_plus_acyclic") and not report.holds:
            raise ValueError(
                f"links need acyclic marked edges; {report.condition} fails with {report.witness}"
            )


def default_link_bound(p, k, l):
    return 2 * len(p.base_graph.vertices) * max(k, l)


def asymptotic_link(p, negative, positive, size_bound=None, mode=EXCLUDE_SELF, check=True):
    """Whether some point is left asymptotic to `negative` and right asymptotic to `positive`.

    Such a point reads g^m f h^m with nonzero label for every m, where g and h are
    the multipliers. The plus arm of f must cancel into the tail of g, the minus
    arm of f must absorb the head of h, and what is left of g's periodic tail must
    cancel against h's periodic head forever. The last condition is periodic, so it
    is enough to check one common period; arm lengths beyond one period of g (or h)
    only add constraints. The arms are capped at `size_bound` edges.
    """
    if negative.kind != NEGATIVE or positive.kind != POSITIVE:
        raise ValueError("need a negative and a positive orbit")
    if check:
        _require_acyclic_marks(p, mode)
    g = p.base_graph
    minus_cycle = negative.multiplier.minus
    plus_cycle = positive.multiplier.plus
    bound = default_link_bound(p, negative.length, positive.length) if size_bound is None else size_bound
    tail = [minus_cycle[-1 - (j % len(minus_cycle))] for j in range(len(minus_cycle) + lcm(len(minus_cycle), len(plus_cycle)))]
    head = [plus_cycle[j % len(plus_cycle)] for j in range(len(plus_cycle) + lcm(len(minus_cycle), len(plus_cycle)))]
    has_plus_partner = {m: any(pair[0] == m for pair in g.relation) for m in set(minus_cycle)}
    has_minus_partner = {q: any(pair[1] == q for pair in g.relation) for q in set(plus_cycle)}
    period = lcm(len(minus_cycle), len(plus_cycle))
    for s in range(min(len(minus_cycle), bound + 1)):
        if s and not has_plus_partner[tail[s - 1]]:
            break
        for t in range(min(len(plus_cycle), bound + 1)):
            if t and not has_minus_partner[head[t - 1]]:
                break
            if all(
                g.block_of(tail[s + i]) == g.block_of(head[t + i]) and (tail[s + i], head[t + i]) in g.relation
                for i in range(period)
            ):
                return True
    return False


@dataclass(frozen=True)
class LinkRelation:
    k: int
    l: int
    relation: Relation
    negative: tuple
    positive: tuple


def link_relation(p, k, l, size_bound=None, power_bound=None, mode=EXCLUDE_SELF, orbits=None):
    _require_acyclic_marks(p, mode)
    if orbits is None:
        orbits = periodic_orbits(p, max(k, l), power_bound)
    negative = [o for o in orbits[k] if o.kind == NEGATIVE]
    positive = [o for o in orbits[l] if o.kind == POSITIVE]
    pairs = [
        (a.name, b.name)
        for a in negative
        for b in positive
        if asymptotic_link(p, a, b, size_bound, mode, check=False)
    ]
    rel = Relation(tuple(o.name for o in negative), tuple(o.name for o in positive), frozenset(pairs))
    return LinkRelation(k, l, rel, tuple(negative), tuple(positive))


# ---------------------------------------------------------------- bounded contexts

@lru_cache(maxsize=32)
def _left_arms(p, horizon):
    """(end vertex, minus arm) of admissible words of length <= horizon.

    Only the minus arm of a left context can interact with what follows it.
    The empty context appears as (None, ()).
    """
    arms = {(None, ())}
    seen = set()
    frontier = []
    for s in p.symbols:
        value = label_of(p, (s.id,))
        key = (s.source, s.target, value)
        if key not in seen:
            seen.add(key)
            frontier.append(key)
    for depth in range(horizon):
        nxt = []
        for start, end, value in frontier:
            arms.add((end, value.minus))
            if depth + 1 == horizon:
                continue
            for sid in p.incoming[start]:
                new = reduce_word(p.base_graph, p.label_tokens(sid) + value.tokens())
                if new is ZERO:
                    continue
                key = (p.by_id[sid].source, end, new)
                if key not in seen:
                    seen.add(key)
                    nxt.append(key)
        frontier = nxt
    return frozenset(arms)


@lru_cache(maxsize=32)
def _right_arms(p, horizon):
    """(start vertex, plus arm) of admissible words of length <= horizon; empty as (None, ())."""
    arms = {(None, ())}
    seen = set()
    frontier = []
    for s in p.symbols:
        value = label_of(p, (s.id,))
        key = (s.source, s.target, value)
        if key not in seen:
            seen.add(key)
            frontier.append(key)
    for depth in range(horizon):
        nxt = []
        for start, end, value in frontier:
            arms.add((start, value.plus))
            if depth + 1 == horizon:
                continue
            for sid in p.outgoing[end]:
                new = reduce_word(p.base_graph, value.tokens() + p.label_tokens(sid))
                if new is ZERO:
                    continue
                key = (start, p.by_id[sid].target, new)
                if key not in seen:
                    seen.add(key)
                    nxt.append(key)
        frontier = nxt
    return frozenset(arms)


def _with_left(p, arm, start, value):
    """Minus arm left after multiplying a left arm into `value`, or None if zero."""
    end, minus = arm
    if end is not None and end != start:
        return None
    tokens = list(minus) + value.tokens() if minus else value.tokens()
    result = reduce_word(p.base_graph, tokens)
    return None if result is ZERO else result.minus


def _compatible(p, minus, plus_arm):
    g = p.base_graph
    for i in range(min(len(minus), len(plus_arm))):
        m, q = minus[-1 - i], plus_arm[i]
        if g.block_of(m) != g.block_of(q) or (m, q) not in g.relation:
            return False
    return True


@dataclass(frozen=True)
class ContextComparison:
    equal: bool
    left: tuple = None
    right: tuple = None
    horizon: int = 0


def contexts_equal_bounded(p, a, b, horizon):
    """Search left/right contexts of length <= horizon that admit exactly one of a, b.

    Contexts are compared through their interacting arms: a left context acts
    only through its minus arm and a right context only through its plus arm, so
    the returned witness is a pair of arms (with the vertex they attach to).
    """
    a, b = tuple(a), tuple(b)
    for w in (a, b):
        if not admissible(p, w):
            raise ValueError(f"word {w} is not admissible")
    value_a, value_b = label_of(p, a), label_of(p, b)
    start_a, start_b = p.by_id[a[0]].source, p.by_id[b[0]].source
    end_a, end_b = p.by_id[a[-1]].target, p.by_id[b[-1]].target
    left = sorted(_left_arms(p, horizon), key=repr)
    right = sorted(_right_arms(p, horizon), key=repr)
    for arm in left:
        rest_a = _with_left(p, arm, start_a, value_a)
        rest_b = _with_left(p, arm, start_b, value_b)
        if rest_a == rest_b and end_a == end_b:
            continue
        for start, plus_arm in right:
            ok_a = rest_a is not None and (start is None or start == end_a) and _compatible(p, rest_a, plus_arm)
            ok_b = rest_b is not None and (start is None or start == end_b) and _compatible(p, rest_b, plus_arm)
            if ok_a != ok_b:
                return ContextComparison(False, arm, (start, plus_arm), horizon)
    return ContextComparison(True, horizon=horizon)


def omega_plus_bounded(p, block, n, horizon):
    """Length-n right extensions admissible after `block` for every left context up to `horizon`."""
    block = tuple(block)
    if not admissible(p, block):
        raise ValueError("block is not admissible")
    start = p.by_id[block[0]].source
    value = label_of(p, block)
    rests = set()
    for arm in _left_arms(p, horizon):
        rest = _with_left(p, arm, start, value)
        if rest is not None:
            rests.add(rest)
    extensions = set()
    frontier = [()]
    for _ in range(n):
        frontier = [
            w + (s,)
            for w in frontier
            for s in p.outgoing[p.by_id[(w or block)[-1]].target]
        ]
    for ext in frontier:
        if not admissible(p, block + ext):
            continue
        ext_value = label_of(p, ext)
        if all(reduce_word(p.base_graph, list(rest) + ext_value.tokens()) is not ZERO if rest else True for rest in rests):
            extensions.add(ext)
    return extensions
