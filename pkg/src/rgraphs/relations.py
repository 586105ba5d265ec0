"""Finite bipartite relations between a minus-symbol set and a plus-symbol set.

Symbols are arbitrary hashable identifiers (strings, or tuples for products
and powers). Every operation is pure; a Relation is an immutable value.
"""
from collections import Counter
from dataclasses import dataclass
from functools import reduce
from itertools import product
from math import gcd


@dataclass(frozen=True)
class Relation:
    minus: tuple
    plus: tuple
    pairs: frozenset

    def __post_init__(self):
        if len(set(self.minus)) != len(self.minus):
            raise ValueError("duplicate minus symbol")
        if len(set(self.plus)) != len(self.plus):
            raise ValueError("duplicate plus symbol")
        minus_set, plus_set = set(self.minus), set(self.plus)
        for m, p in self.pairs:
            if m not in minus_set or p not in plus_set:
                raise ValueError(f"pair {(m, p)!r} references an unknown symbol")

    @classmethod
    def make(cls, minus, plus, pairs):
        return cls(tuple(minus), tuple(plus), frozenset((m, p) for m, p in pairs))

    def __len__(self):
        return len(self.pairs)

    def restrict(self, minus, plus):
        minus_set, plus_set = set(minus), set(plus)
        return Relation(
            tuple(m for m in self.minus if m in minus_set),
            tuple(p for p in self.plus if p in plus_set),
            frozenset((m, p) for m, p in self.pairs if m in minus_set and p in plus_set),
        )


def identity_relation(n, minus_prefix="a", plus_prefix="a"):
    minus = tuple(f"{minus_prefix}{i}-" for i in range(n))
    plus = tuple(f"{plus_prefix}{i}+" for i in range(n))
    return Relation(minus, plus, frozenset(zip(minus, plus)))


def full_relation(n_minus, n_plus, prefix="f"):
    minus = tuple(f"{prefix}{i}-" for i in range(n_minus))
    plus = tuple(f"{prefix}{i}+" for i in range(n_plus))
    return Relation(minus, plus, frozenset(product(minus, plus)))


def omega(rel, side, symbol):
    """Partners of `symbol`: plus partners for a minus symbol and vice versa."""
    if side == "minus":
        if symbol not in rel.minus:
            raise ValueError(f"unknown minus symbol {symbol!r}")
        return frozenset(p for m, p in rel.pairs if m == symbol)
    if side == "plus":
        if symbol not in rel.plus:
            raise ValueError(f"unknown plus symbol {symbol!r}")
        return frozenset(m for m, p in rel.pairs if p == symbol)
    raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")


def _partner_map(rel):
    minus_partners = {m: set() for m in rel.minus}
    plus_partners = {p: set() for p in rel.plus}
    for m, p in rel.pairs:
        minus_partners[m].add(p)
        plus_partners[p].add(m)
    return minus_partners, plus_partners


def full_rows_cols(rel):
    """Minus symbols related to every plus symbol, and plus symbols related to every minus symbol."""
    minus_partners, plus_partners = _partner_map(rel)
    rows = frozenset(m for m, ps in minus_partners.items() if len(ps) == len(rel.plus))
    cols = frozenset(p for p, ms in plus_partners.items() if len(ms) == len(rel.minus))
    return rows, cols


def _classes(symbols, partners):
    groups = {}
    for s in symbols:
        groups.setdefault(frozenset(partners[s]), []).append(s)
    return [tuple(g) for g in groups.values()]


@dataclass(frozen=True)
class ClassInvariants:
    classes_minus: tuple
    classes_plus: tuple
    D_minus: int
    D_plus: int


def class_invariants(rel):
    """Partitions of each side by equal partner sets, and the gcd of class sizes per side."""
    if not rel.minus or not rel.plus:
        raise ValueError("class gcd is undefined on an empty side")
    minus_partners, plus_partners = _partner_map(rel)
    classes_minus = tuple(_classes(rel.minus, minus_partners))
    classes_plus = tuple(_classes(rel.plus, plus_partners))
    return ClassInvariants(
        classes_minus,
        classes_plus,
        reduce(gcd, (len(c) for c in classes_minus)),
        reduce(gcd, (len(c) for c in classes_plus)),
    )


@dataclass(frozen=True)
class RhoFlags:
    triangle: bool
    circle: bool
    nabla: bool
    circle_nabla: bool


def rho_flags(rel):
    inv = class_invariants(rel)
    triangle = True
    for classes, d in ((inv.classes_minus, inv.D_minus), (inv.classes_plus, inv.D_plus)):
        sizes = [len(c) for c in classes]
        for i in range(len(sizes)):
            for j in range(i + 1, len(sizes)):
                if gcd(sizes[i], sizes[j]) != d:
                    triangle = False
    rows, cols = full_rows_cols(rel)
    circle = not rows and not cols
    nabla = triangle and inv.D_minus == 1 and inv.D_plus == 1
    return RhoFlags(triangle, circle, nabla, circle and triangle)


def decompose(rel):
    """Connected components of the relation as a bipartite graph.

    Symbols without partners come back as single-symbol pieces with no pairs.
    """
    minus_partners, plus_partners = _partner_map(rel)
    seen_minus, seen_plus = set(), set()
    pieces = []
    for start_side, symbols in (("minus", rel.minus), ("plus", rel.plus)):
        for start in symbols:
            if start in (seen_minus if start_side == "minus" else seen_plus):
                continue
            comp_minus, comp_plus = set(), set()
            stack = [(start_side, start)]
            while stack:
                side, s = stack.pop()
                if side == "minus":
                    if s in comp_minus:
                        continue
                    comp_minus.add(s)
                    stack.extend(("plus", p) for p in minus_partners[s])
                else:
                    if s in comp_plus:
                        continue
                    comp_plus.add(s)
                    stack.extend(("minus", m) for m in plus_partners[s])
            seen_minus |= comp_minus
            seen_plus |= comp_plus
            pieces.append(rel.restrict(comp_minus, comp_plus))
    return pieces


def kronecker_sum(*rels):
    """Disjoint union; symbols must already be distinct across the summands."""
    minus, plus, pairs = [], [], set()
    for r in rels:
        minus.extend(r.minus)
        plus.extend(r.plus)
        pairs |= r.pairs
    return Relation(tuple(minus), tuple(plus), frozenset(pairs))


def tagged(rel, tag):
    """Copy of `rel` with every symbol wrapped as (tag, symbol), to make sums disjoint."""
    return Relation(
        tuple((tag, m) for m in rel.minus),
        tuple((tag, p) for p in rel.plus),
        frozenset(((tag, m), (tag, p)) for m, p in rel.pairs),
    )


def complement(rel, sub):
    """Pairs of `rel` on the sides left after removing the sides of the subrelation `sub`."""
    minus_partners, plus_partners = _partner_map(rel)
    sub_minus, sub_plus = set(sub.minus), set(sub.plus)
    if not sub_minus <= set(rel.minus) or not sub_plus <= set(rel.plus):
        raise ValueError("subrelation sides are not contained in the relation")
    for m in sub_minus:
        if not minus_partners[m] <= sub_plus:
            raise ValueError(f"subrelation is not closed: {m!r} has partners outside it")
    for p in sub_plus:
        if not plus_partners[p] <= sub_minus:
            raise ValueError(f"subrelation is not closed: {p!r} has partners outside it")
    return rel.restrict(set(rel.minus) - sub_minus, set(rel.plus) - sub_plus)


def kronecker_product(a, b):
    return Relation(
        tuple(product(a.minus, b.minus)),
        tuple(product(a.plus, b.plus)),
        frozenset(((m1, m2), (p1, p2)) for m1, p1 in a.pairs for m2, p2 in b.pairs),
    )


def power_relation(rel, n):
    """Relation on length-n vectors: related iff some cyclic shift k matches every coordinate."""
    if n < 1:
        raise ValueError("power must be at least 1")
    minus_vectors = tuple(product(rel.minus, repeat=n))
    plus_vectors = tuple(product(rel.plus, repeat=n))
    pairs = set()
    for u in minus_vectors:
        for v in plus_vectors:
            for k in range(n):
                if all((u[i], v[(i + k) % n]) in rel.pairs for i in range(n)):
                    pairs.add((u, v))
                    break
    return Relation(minus_vectors, plus_vectors, frozenset(pairs))


def least_rotation(seq):
    seq = tuple(seq)
    return min(seq[i:] + seq[:i] for i in range(len(seq))) if seq else seq


def is_primitive(seq):
    n = len(seq)
    seq = tuple(seq)
    return all(seq[d:] + seq[:d] != seq for d in range(1, n) if n % d == 0)


def cyclic_power_relation(rel, n):
    """Power relation on primitive vectors taken up to rotation.

    The power relation is invariant under rotating either vector, so the
    quotient by rotation is well defined: two necklaces are related iff any
    (equivalently every) pair of representatives is.
    """
    power = power_relation(rel, n)
    minus = sorted({least_rotation(u) for u in power.minus if is_primitive(u)}, key=repr)
    plus = sorted({least_rotation(v) for v in power.plus if is_primitive(v)}, key=repr)
    minus_set, plus_set = set(minus), set(plus)
    pairs = {
        (least_rotation(u), least_rotation(v))
        for u, v in power.pairs
        if least_rotation(u) in minus_set and least_rotation(v) in plus_set
    }
    return Relation(tuple(minus), tuple(plus), frozenset(pairs))


# Canonical forms: merge symbols with equal partner sets into weighted classes,
# refine colours, then individualize until discrete and keep the least encoding.

def _twin_reduce(rel):
    minus_partners, plus_partners = _partner_map(rel)
    minus_classes = sorted(_classes(rel.minus, minus_partners), key=repr)
    plus_classes = sorted(_classes(rel.plus, plus_partners), key=repr)
    plus_index = {p: j for j, c in enumerate(plus_classes) for p in c}
    adjacency = []
    for c in minus_classes:
        adjacency.append(frozenset(plus_index[p] for p in minus_partners[c[0]]))
    return minus_classes, plus_classes, adjacency


def _refine(colours, neighbours):
    while True:
        signatures = [
            (colours[v], tuple(sorted(colours[u] for u in neighbours[v])))
            for v in range(len(colours))
        ]
        ranks = {s: i for i, s in enumerate(sorted(set(signatures)))}
        refined = [ranks[s] for s in signatures]
        if len(set(refined)) == len(set(colours)):
            return refined
        colours = refined


def _leaf_encoding(colours, n_minus, weights, adjacency):
    minus_order = sorted(range(n_minus), key=lambda v: colours[v])
    plus_order = sorted(range(n_minus, len(colours)), key=lambda v: colours[v])
    plus_pos = {v - n_minus: i for i, v in enumerate(plus_order)}
    rows = []
    for v in minus_order:
        bits = ["0"] * len(plus_order)
        for j in adjacency[v]:
            bits[plus_pos[j]] = "1"
        rows.append("".join(bits))
    encoding = "R({};{};{})".format(
        ",".join(str(weights[v]) for v in minus_order),
        ",".join(str(weights[v]) for v in plus_order),
        "/".join(rows),
    )
    return encoding, minus_order, [v - n_minus for v in plus_order]


def canonical_form(rel):
    """Return (encoding, minus_symbols_in_canonical_order, plus_symbols_in_canonical_order).

    Two relations are isomorphic (by side-respecting bijections) iff their
    encodings are equal; mapping the i-th listed symbol of one to the i-th of
    the other is then an isomorphism.
    """
    minus_classes, plus_classes, adjacency = _twin_reduce(rel)
    n_minus, n_plus = len(minus_classes), len(plus_classes)
    weights = [len(c) for c in minus_classes] + [len(c) for c in plus_classes]
    neighbours = [[n_minus + j for j in adjacency[i]] for i in range(n_minus)]
    neighbours += [[] for _ in range(n_plus)]
    for i in range(n_minus):
        for j in adjacency[i]:
            neighbours[n_minus + j].append(i)
    initial = [(0, weights[v]) if v < n_minus else (1, weights[v]) for v in range(n_minus + n_plus)]
    ranks = {c: i for i, c in enumerate(sorted(set(initial)))}
    start = _refine([ranks[c] for c in initial], neighbours)

    best = None
    stack = [start]
    while stack:
        colours = stack.pop()
        counts = Counter(colours)
        target = min((c for c, k in counts.items() if k > 1), default=None)
        if target is None:
            leaf = _leaf_encoding(colours, n_minus, weights, adjacency)
            if best is None or leaf[0] < best[0]:
                best = leaf
            continue
        for v in range(len(colours)):
            if colours[v] != target:
                continue
            split = [2 * c + (1 if c == target and u != v else 0) for u, c in enumerate(colours)]
            ranks = {c: i for i, c in enumerate(sorted(set(split)))}
            stack.append(_refine([ranks[c] for c in split], neighbours))

    if best is None:
        return "R(;;)", [], []
    encoding, minus_order, plus_order = best
    minus_symbols = [s for i in minus_order for s in sorted(minus_classes[i], key=repr)]
    plus_symbols = [s for j in plus_order for s in sorted(plus_classes[j], key=repr)]
    return encoding, minus_symbols, plus_symbols


def canonical_encoding(rel):
    return canonical_form(rel)[0]


def are_isomorphic(a, b):
    """Side-respecting bijections (as dicts) carrying a's pairs onto b's, or None."""
    if (len(a.minus), len(a.plus), len(a.pairs)) != (len(b.minus), len(b.plus), len(b.pairs)):
        return None
    by_code_a, by_code_b = {}, {}
    for piece in decompose(a):
        code, ms, ps = canonical_form(piece)
        by_code_a.setdefault(code, []).append((ms, ps))
    for piece in decompose(b):
        code, ms, ps = canonical_form(piece)
        by_code_b.setdefault(code, []).append((ms, ps))
    if {k: len(v) for k, v in by_code_a.items()} != {k: len(v) for k, v in by_code_b.items()}:
        return None
    minus_map, plus_map = {}, {}
    for code, pieces_a in by_code_a.items():
        for (ms_a, ps_a), (ms_b, ps_b) in zip(pieces_a, by_code_b[code]):
            minus_map.update(zip(ms_a, ms_b))
            plus_map.update(zip(ps_a, ps_b))
    return minus_map, plus_map


@dataclass(frozen=True)
class IsoClassVector:
    """Multiplicities of irreducible pieces, keyed by canonical encoding."""

    entries: tuple

    def as_dict(self):
        return dict(self.entries)

    def __add__(self, other):
        return IsoClassVector(_sorted_entries(Counter(self.as_dict()) + Counter(other.as_dict())))

    def scaled(self, factor):
        return IsoClassVector(_sorted_entries({k: v * factor for k, v in self.entries}))


def _sorted_entries(counts):
    return tuple(sorted((k, v) for k, v in counts.items() if v > 0))


def mu_vector(rel):
    return IsoClassVector(_sorted_entries(Counter(canonical_encoding(p) for p in decompose(rel))))
