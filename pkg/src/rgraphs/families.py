"""Small R-graph families with closed-form orbit invariants, conjugacy criteria and
three-vertex Markov-Dyck families over a two-vertex base graph.

Family kinds and their roles:

* ``one_vertex`` (p): one vertex whose loop relation has no full row or column;
* ``chain`` (p, q): p -> q fully related, q -> p balanced, no loops at q;
* ``chain_with_return`` (p, q, r): p -> q -> r fully related, returns q -> p and r -> p;
* ``cycle`` (p, q, r): p -> q -> r fully related, return r -> p only;
* ``petals`` (p, q0, q1): two fully related excursions from p with unequal sizes;
* ``balanced_petals`` (p, q0, q1): two fully related excursions of equal sizes.

Edges of block (q, r) are given as a Relation whose minus symbols are the ids
of the minus edges q -> r and whose plus symbols are the ids of the plus edges
r -> q.
"""
import random
from dataclasses import dataclass, field
from itertools import product

from .quotient import build_quotient, graphs_isomorphic
from .relations import (
    IsoClassVector,
    Relation,
    are_isomorphic,
    canonical_encoding,
    class_invariants,
    complement,
    cyclic_power_relation,
    decompose,
    kronecker_sum,
    mu_vector,
    power_relation,
    rho_flags,
)
from .rgraph import RGraph, build_markov_dyck, validate
from .semigroup import ZERO, Reducer, psi
from .shift import NEGATIVE, census, identity_presentation, link_relation, periodic_orbits

KIND_ROLES = {
    "one_vertex": ("p",),
    "chain": ("p", "q"),
    "chain_with_return": ("p", "q", "r"),
    "cycle": ("p", "q", "r"),
    "petals": ("p", "q0", "q1"),
    "balanced_petals": ("p", "q0", "q1"),
}

# Short names accepted as aliases for the descriptive kind names.
KIND_ALIASES = {
    "G_p": "one_vertex",
    "G_pq": "chain",
    "Gplus_pqr": "chain_with_return",
    "G0_pqr": "cycle",
    "Gplus_pq01": "petals",
    "G0_pq01": "balanced_petals",
}

ALLOWED_BLOCKS = {
    "one_vertex": {("p", "p")},
    "chain": {("p", "p"), ("p", "q"), ("q", "p")},
    "chain_with_return": {("p", "p"), ("p", "q"), ("q", "p"), ("q", "r"), ("r", "p")},
    "cycle": {("p", "p"), ("p", "q"), ("q", "r"), ("r", "p")},
    "petals": {("p", "p"), ("p", "q0"), ("p", "q1"), ("q0", "p"), ("q1", "p")},
    "balanced_petals": {("p", "p"), ("p", "q0"), ("p", "q1"), ("q0", "p"), ("q1", "p")},
}


class ScopeError(ValueError):
    """A formula or operation was requested outside the cases it is stated for."""


class FamilyError(ValueError):
    def __init__(self, kind, violations):
        self.kind = kind
        self.violations = tuple(violations)
        super().__init__(f"{kind} constraints violated: " + "; ".join(self.violations))


def normalize_kind(kind):
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in KIND_ROLES:
        raise ValueError(f"unknown family kind {kind!r}")
    return kind


@dataclass(frozen=True)
class FamilyInstance:
    kind: str
    graph: RGraph
    role_map: dict = field(hash=False)
    blocks: dict = field(hash=False)

    def block(self, q, r):
        """Relation of the block between two roles (empty when absent)."""
        return self.blocks.get((q, r), Relation((), (), frozenset()))

    def minus_count(self, q, r):
        return len(self.block(q, r).minus)

    def plus_count(self, q, r):
        return len(self.block(q, r).plus)

    def has_loops(self):
        return self.minus_count("p", "p") > 0


# ---------------------------------------------------------------- construction

def block_relation(q, r, n_minus, n_plus, pairs):
    """Relation for block (q, r) with generated edge ids; `pairs` index the two sides."""
    minus = tuple(f"{q}_{r}.{i}-" for i in range(n_minus))
    plus = tuple(f"{q}_{r}.{j}+" for j in range(n_plus))
    return Relation(minus, plus, frozenset((minus[i], plus[j]) for i, j in pairs))


def full_block(q, r, n_minus, n_plus):
    return block_relation(q, r, n_minus, n_plus, product(range(n_minus), range(n_plus)))


def _graph_from_blocks(blocks, role_map):
    vertices = list(role_map.values())
    minus, plus, relation = [], [], []
    for (q, r), rel in sorted(blocks.items()):
        vq, vr = role_map[q], role_map[r]
        minus.extend((str(m), vq, vr) for m in rel.minus)
        plus.extend((str(p), vr, vq) for p in rel.plus)
        relation.extend((str(m), str(p)) for m, p in rel.pairs)
    return RGraph.make(vertices, minus, plus, relation)


def _is_full(rel):
    return len(rel.pairs) == len(rel.minus) * len(rel.plus)


def _flags(rel):
    if not rel.minus or not rel.plus:
        return None
    return rho_flags(rel)


def _family_violations(kind, blocks):
    out = []

    def nonempty(key, name):
        if key not in blocks or not blocks[key].minus:
            out.append(name)
            return False
        return True

    def full(key, name):
        if key in blocks and blocks[key].minus and not _is_full(blocks[key]):
            out.append(name)

    def flag(key, attribute, name):
        flags = _flags(blocks[key]) if key in blocks else None
        if flags is None or not getattr(flags, attribute):
            out.append(name)

    loops = ("p", "p") in blocks and bool(blocks[("p", "p")].minus)
    if kind == "one_vertex":
        if nonempty(("p", "p"), "loop_block_nonempty"):
            flag(("p", "p"), "circle", "loop_relation_without_full_lines")
    elif kind == "chain":
        if nonempty(("p", "q"), "forward_block_nonempty"):
            full(("p", "q"), "forward_block_full")
        if nonempty(("q", "p"), "return_block_nonempty"):
            if loops:
                flag(("q", "p"), "nabla", "return_relation_balanced")
            else:
                flag(("q", "p"), "circle_nabla", "return_relation_balanced_without_full_lines")
    elif kind == "chain_with_return":
        if nonempty(("p", "q"), "forward_block_nonempty"):
            full(("p", "q"), "forward_block_full")
        if nonempty(("q", "r"), "second_block_nonempty"):
            full(("q", "r"), "second_block_full")
        if nonempty(("q", "p"), "return_block_nonempty"):
            flag(("q", "p"), "nabla", "return_relation_balanced")
        if nonempty(("r", "p"), "second_return_block_nonempty"):
            flag(("r", "p"), "nabla", "second_return_relation_balanced")
    elif kind == "cycle":
        if nonempty(("p", "q"), "forward_block_nonempty"):
            full(("p", "q"), "forward_block_full")
        if nonempty(("q", "r"), "second_block_nonempty"):
            full(("q", "r"), "second_block_full")
        if nonempty(("r", "p"), "closing_block_nonempty"):
            if loops:
                flag(("r", "p"), "nabla", "closing_relation_balanced")
            else:
                flag(("r", "p"), "circle_nabla", "closing_relation_balanced_without_full_lines")
    else:
        ok0 = nonempty(("p", "q0"), "first_petal_nonempty")
        ok1 = nonempty(("p", "q1"), "second_petal_nonempty")
        full(("p", "q0"), "first_petal_full")
        full(("p", "q1"), "second_petal_full")
        for q, name in (("q0", "first_return"), ("q1", "second_return")):
            if nonempty((q, "p"), name + "_nonempty"):
                flag((q, "p"), "nabla", name + "_balanced")
        if ok0 and ok1:
            minus_sizes = (len(blocks[("p", "q0")].minus), len(blocks[("p", "q1")].minus))
            plus_sizes = (len(blocks[("p", "q0")].plus), len(blocks[("p", "q1")].plus))
            if kind == "petals" and not minus_sizes > plus_sizes:
                out.append("minus_sizes_exceed_plus_sizes")
            if kind == "balanced_petals" and (
                minus_sizes[0] != minus_sizes[1] or plus_sizes[0] != plus_sizes[1]
            ):
                out.append("petal_sizes_equal")
    return out


def make_family(kind, blocks, role_map=None):
    """Validated family instance from per-block relations keyed by role pairs.

    Raises FamilyError listing every violated constraint by name.
    """
    kind = normalize_kind(kind)
    roles = KIND_ROLES[kind]
    role_map = dict(role_map) if role_map else {r: r for r in roles}
    if set(role_map) != set(roles):
        raise ValueError(f"{kind} needs roles {roles}, got {sorted(role_map)}")
    if len(set(role_map.values())) != len(roles):
        raise ValueError("roles must map to distinct vertices")
    blocks = {tuple(k): v for k, v in blocks.items() if v.minus or v.plus}
    violations = []
    for key, rel in sorted(blocks.items()):
        if key not in ALLOWED_BLOCKS[kind]:
            violations.append(f"block_not_allowed:{key[0]}->{key[1]}")
        if bool(rel.minus) != bool(rel.plus):
            violations.append(f"block_sides_both_nonempty:{key[0]}->{key[1]}")
    violations += _family_violations(kind, blocks)
    if violations:
        raise FamilyError(kind, violations)
    graph = _graph_from_blocks(blocks, role_map)
    problems = validate(graph)
    if problems:
        raise FamilyError(kind, problems)
    return FamilyInstance(kind, graph, role_map, blocks)


# ---------------------------------------------------------------- random instances

def random_relation(rng, q, r, n_minus, n_plus, require=None, tries=400):
    """Random block relation satisfying a rho flag ("circle", "nabla", "circle_nabla") or None."""
    cells = list(product(range(n_minus), range(n_plus)))
    for _ in range(tries):
        density = rng.uniform(0.2, 0.9)
        pairs = [c for c in cells if rng.random() < density]
        rel = block_relation(q, r, n_minus, n_plus, pairs)
        if require is None or getattr(rho_flags(rel), require):
            return rel
    raise ValueError(f"no {require} relation found for sizes {n_minus}x{n_plus}")


def _random_sizes(rng, max_block, minimum=1):
    return rng.randint(minimum, max_block), rng.randint(minimum, max_block)


def random_family(kind, rng=None, max_block=3, loops=None, tries=50):
    """Random valid instance of `kind` with every block side of size at most `max_block`."""
    kind = normalize_kind(kind)
    rng = rng or random.Random(0)
    for _ in range(tries):
        try:
            return make_family(kind, _random_blocks(kind, rng, max_block, loops))
        except (FamilyError, ValueError):
            continue
    raise ValueError(f"could not generate a {kind} instance")


def _random_blocks(kind, rng, max_block, loops):
    with_loops = rng.random() < 0.6 if loops is None else loops
    blocks = {}
    if kind == "one_vertex" or with_loops:
        n = rng.randint(2, max(2, max_block))
        blocks[("p", "p")] = random_relation(rng, "p", "p", n, rng.randint(2, max(2, max_block)), "circle")
    balanced = "nabla" if with_loops else "circle_nabla"
    if kind == "chain":
        blocks[("p", "q")] = full_block("p", "q", *_random_sizes(rng, max_block))
        a, b = _random_sizes(rng, max_block, 2 if not with_loops else 1)
        blocks[("q", "p")] = random_relation(rng, "q", "p", a, b, balanced)
    elif kind == "chain_with_return":
        blocks[("p", "q")] = full_block("p", "q", *_random_sizes(rng, max_block))
        blocks[("q", "r")] = full_block("q", "r", *_random_sizes(rng, max_block))
        blocks[("q", "p")] = random_relation(rng, "q", "p", *_random_sizes(rng, max_block), "nabla")
        blocks[("r", "p")] = random_relation(rng, "r", "p", *_random_sizes(rng, max_block), "nabla")
    elif kind == "cycle":
        blocks[("p", "q")] = full_block("p", "q", *_random_sizes(rng, max_block))
        blocks[("q", "r")] = full_block("q", "r", *_random_sizes(rng, max_block))
        a, b = _random_sizes(rng, max_block, 2 if not with_loops else 1)
        blocks[("r", "p")] = random_relation(rng, "r", "p", a, b, balanced)
    elif kind in ("petals", "balanced_petals"):
        if kind == "balanced_petals":
            a, b = _random_sizes(rng, max_block)
            sizes = ((a, b), (a, b))
        else:
            while True:
                sizes = (_random_sizes(rng, max_block), _random_sizes(rng, max_block))
                if (sizes[0][0], sizes[1][0]) > (sizes[0][1], sizes[1][1]):
                    break
        for q, (a, b) in zip(("q0", "q1"), sizes):
            blocks[("p", q)] = full_block("p", q, a, b)
            blocks[(q, "p")] = random_relation(rng, q, "p", *_random_sizes(rng, max_block), "nabla")
    return blocks


# ---------------------------------------------------------------- orbit subsets and Q relations

def _word_blocks(g, word):
    return [g.block_of(s) for s in word]


def _orbit_follows(g, orbit, pattern, side):
    """Whether some rotation of the orbit word runs through `pattern` blocks on one side."""
    edges = g.minus_by_id if side == "minus" else g.plus_by_id
    if not all(s in edges for s in orbit.word) or len(orbit.word) != len(pattern):
        return False
    blocks = _word_blocks(g, orbit.word)
    n = len(blocks)
    return any(blocks[i:] + blocks[:i] == pattern for i in range(n))


def _through_patterns(inst, n):
    """Minus-side and plus-side block sequences of the excursions defining Q_n."""
    m = inst.role_map
    if n == 2:
        if inst.kind in ("chain", "chain_with_return", "cycle"):
            petals = [("q",)]
        elif inst.kind in ("petals", "balanced_petals"):
            petals = [("q0",), ("q1",)]
        else:
            raise ScopeError(f"Q_2 is not defined for {inst.kind}")
        out = []
        for (q,) in petals:
            minus = [(m["p"], m[q]), (m[q], m["p"])]
            # Plus edges of block (q, p) run p -> q, then plus edges of block (p, q) run q -> p.
            plus = [(m[q], m["p"]), (m["p"], m[q])]
            out.append((minus, plus))
        return out
    if n == 3:
        if inst.kind not in ("chain_with_return", "cycle"):
            raise ScopeError(f"Q_3 is not defined for {inst.kind}")
        minus = [(m["p"], m["q"]), (m["q"], m["r"]), (m["r"], m["p"])]
        plus = [(m["r"], m["p"]), (m["q"], m["r"]), (m["p"], m["q"])]
        return [(minus, plus)]
    raise ScopeError("Q relations are defined for n = 2 and n = 3 only")


def _links_for(inst, k, l, links):
    if links is not None and (k, l) in links:
        return links[(k, l)]
    return link_relation(identity_presentation(inst.graph), k, l)


def family_Q(inst, n, links=None):
    """R_n restricted to the orbits that wind through the family's excursion blocks.

    `links` may map (k, l) to precomputed LinkRelation objects.
    """
    patterns = _through_patterns(inst, n)
    link = _links_for(inst, n, n, links)
    g = inst.graph
    minus = [
        o.name for o in link.negative
        if any(_orbit_follows(g, o, pm, "minus") for pm, _ in patterns)
    ]
    plus = [
        o.name for o in link.positive
        if any(_orbit_follows(g, o, pp, "plus") for _, pp in patterns)
    ]
    return link.relation.restrict(minus, plus)


def family_Q_parts(inst, links=None):
    """Q_2 split by excursion (one part per petal)."""
    link = _links_for(inst, 2, 2, links)
    g = inst.graph
    parts = []
    for pm, pp in _through_patterns(inst, 2):
        minus = [o.name for o in link.negative if _orbit_follows(g, o, pm, "minus")]
        plus = [o.name for o in link.positive if _orbit_follows(g, o, pp, "plus")]
        parts.append(link.relation.restrict(minus, plus))
    return parts


@dataclass(frozen=True)
class HalvingCheck:
    remainder: IsoClassVector
    doubled_remainder: IsoClassVector
    loop_power: IsoClassVector
    loop_necklaces: IsoClassVector
    literal_holds: bool
    necklace_holds: bool


def halving_check(inst, links=None):
    """Compare R_2 minus Q_2 against the second power of R_1.

    `literal_holds` tests twice the remainder against the power relation on all
    length-2 vectors; `necklace_holds` tests the remainder against the power
    relation taken on primitive vectors up to rotation.
    """
    links = dict(links or {})
    for key in ((1, 1), (2, 2)):
        if key not in links:
            links[key] = _links_for(inst, *key, None)
    r1 = links[(1, 1)].relation
    r2 = links[(2, 2)].relation
    q2 = family_Q(inst, 2, links)
    remainder = mu_vector(complement(r2, q2))
    power = mu_vector(power_relation(r1, 2)) if r1.minus or r1.plus else IsoClassVector(())
    necklaces = mu_vector(cyclic_power_relation(r1, 2)) if r1.minus or r1.plus else IsoClassVector(())
    doubled = remainder.scaled(2)
    return HalvingCheck(remainder, doubled, power, necklaces, doubled == power, remainder == necklaces)


# ---------------------------------------------------------------- invariant reports

@dataclass
class InvariantReport:
    subject: str
    predicted: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)
    matches: dict = field(default_factory=dict)
    assertions: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def all_match(self):
        return all(self.matches.values())

    def all_assertions_hold(self):
        return all(a["holds"] for a in self.assertions.values())

    def as_dict(self):
        return {
            "subject": self.subject,
            "predicted": dict(sorted(self.predicted.items())),
            "measured": dict(sorted(self.measured.items())),
            "matches": dict(sorted(self.matches.items())),
            "assertions": dict(sorted(self.assertions.items())),
            "notes": list(self.notes),
        }


def _card(rel):
    return len(rel.pairs)


def _family_predictions(inst):
    pred = {}
    n = inst.minus_count("p", "p")
    loops = inst.block("p", "p")
    pred["negative_fixed_points"] = n
    pred["neutral_fixed_points"] = 0
    if loops.minus:
        pred["loop_relation_class"] = canonical_encoding(loops)
    kind = inst.kind
    if kind in ("one_vertex", "cycle"):
        pred["negative_two_orbits"] = n * (n - 1)
    if kind == "one_vertex":
        pred["neutral_two_orbits"] = _card(loops)
    if kind == "chain":
        a_minus, a_plus = inst.minus_count("p", "q"), inst.plus_count("p", "q")
        pred["neutral_two_orbits"] = _card(loops) + _card(inst.block("q", "p")) + a_minus * a_plus
        pred["through_relation_balanced"] = True
        pred["through_relation_sides"] = [a_minus, a_plus]
    if kind == "chain_with_return":
        pred["through_relation_balanced"] = True
        pred["through_relation_sides"] = [inst.minus_count("p", "q"), inst.plus_count("p", "q")]
        if inst.has_loops():
            pred["linked_three_orbits"] = inst.minus_count("p", "q") * inst.plus_count("p", "q")
    if kind == "petals":
        pred["through_relation_balanced"] = False
    if kind == "balanced_petals":
        a_minus, a_plus = inst.minus_count("p", "q0"), inst.plus_count("p", "q0")
        pred["neutral_two_orbits"] = (
            _card(loops) + _card(inst.block("q0", "p")) + _card(inst.block("q1", "p")) + 2 * a_minus * a_plus
        )
        pred["through_relation_balanced"] = True
        pred["through_relation_sides"] = [a_minus, a_plus]
        if inst.has_loops():
            pred["linked_three_orbits"] = 2 * a_minus * a_plus
        else:
            pred["negative_three_orbits"] = 0
    return pred


@dataclass(frozen=True)
class SplitInstance:
    variant: str
    T: tuple
    delta_super: int
    delta_sub: int
    adjacency: tuple
    md_graph: RGraph = field(hash=False)
    vertex_names: tuple = ()
    roots: dict = field(default_factory=dict, hash=False)


SPLIT_VARIANTS = ("alpha", "beta")


def _variant(name):
    aliases = {"α": "alpha", "β": "beta", "a": "alpha", "b": "beta"}
    name = aliases.get(name, name)
    if name not in SPLIT_VARIANTS:
        raise ValueError(f"variant must be alpha or beta, got {name!r}")
    return name


def _check_T(T):
    T = tuple(tuple(int(x) for x in row) for row in T)
    if len(T) != 2 or any(len(row) != 2 for row in T) or any(x < 0 for row in T for x in row):
        raise ValueError("T must be a 2x2 non-negative integer matrix")
    (aa, ab), (ba, bb) = T
    if not (aa + ba > 1 and ab + bb > 1):
        raise ValueError("T violates the column sums: T_aa + T_ba > 1 and T_ab + T_bb > 1 are required")
    if not (aa > bb or (aa == bb and ab >= ba)):
        raise ValueError("T is not normalized: need T_aa > T_bb, or T_aa = T_bb and T_ab >= T_ba")
    return T


def split_adjacency(variant, T, delta_super, delta_sub):
    (aa, ab), (ba, bb) = T
    if variant == "alpha":
        return ((aa - delta_super, 1, delta_sub), (delta_super, 0, ab - delta_sub), (ba, 0, bb))
    return ((bb - delta_super, 1, delta_sub), (delta_super, 0, ba - delta_sub), (ab, 0, aa))


def split_make(variant, T, delta_super, delta_sub):
    """Three-vertex graph whose associated semigroup is the inverse semigroup of T.

    The alpha variant splits the base vertex alpha into a0 (keeping the loops
    not rerouted) and a1 (a single-entry vertex reached from a0); the beta
    variant does the same to beta.
    """
    variant = _variant(variant)
    T = _check_T(T)
    (aa, ab), (ba, bb) = T
    ds, dl = int(delta_super), int(delta_sub)
    own_loops, own_out = (aa, ab) if variant == "alpha" else (bb, ba)
    label = "alpha" if variant == "alpha" else "beta"
    if not 0 <= ds <= own_loops:
        raise ValueError(f"delta_super must satisfy 0 <= delta_super <= T_{label[0]}{label[0]} = {own_loops}")
    if not 0 <= dl <= own_out:
        other = "b" if variant == "alpha" else "a"
        raise ValueError(f"delta_sub must satisfy 0 <= delta_sub <= T_{label[0]}{other} = {own_out}")
    if not ds + own_out - dl > 0:
        other = "b" if variant == "alpha" else "a"
        raise ValueError(
            f"delta_super + T_{label[0]}{other} - delta_sub > 0 violated: {ds} + {own_out} - {dl} = {ds + own_out - dl}"
        )
    adjacency = split_adjacency(variant, T, ds, dl)
    names = ("a0", "a1", "b") if variant == "alpha" else ("b0", "b1", "a")
    graph = build_markov_dyck([list(row) for row in adjacency], names)
    roots = {"a0": "alpha", "b": "beta"} if variant == "alpha" else {"b0": "beta", "a": "alpha"}
    return SplitInstance(variant, T, ds, dl, adjacency, graph, names, roots)


def _split_predictions(inst):
    (aa, ab), (ba, bb) = inst.T
    ds, dl = inst.delta_super, inst.delta_sub
    pred = {}
    pred["negative_fixed_points"] = aa + bb - ds
    if inst.variant == "alpha":
        pred["negative_two_orbits"] = aa * (aa - 1) + bb * (bb - 1) + ds + dl * ba
        pred["alpha_loop_orbits_1"] = aa - ds
        pred["beta_loop_orbits_1"] = bb
    else:
        pred["negative_two_orbits"] = bb * (bb - 1) + aa * (aa - 1) + ds + ab * dl
        pred["alpha_loop_orbits_1"] = aa
        pred["beta_loop_orbits_1"] = bb - ds
    pred["neutral_two_orbits"] = aa + ab + ba + bb + 1
    if ds == 0:
        pred.update(_split_long_predictions(inst))
    return pred


def _split_long_predictions(inst):
    (aa, ab), (ba, bb) = inst.T
    d = inst.delta_sub
    if inst.variant == "alpha":
        s = aa + 1 + d
        return {
            "alpha_loop_orbits_3": aa * s,
            "beta_loop_orbits_3": bb * (bb + ba),
            "alpha_loop_orbits_5": aa * (s * s + aa * s + ab - d + d * (bb + ba)),
            "beta_loop_orbits_5": bb * ((bb + ba) ** 2 + bb * (bb + ba) + ba * (aa + d)),
        }
    s = bb + 1 + d
    return {
        "alpha_loop_orbits_3": aa * (aa + ab),
        "beta_loop_orbits_3": bb * s,
        "alpha_loop_orbits_5": aa * ((aa + ab) ** 2 + aa * (aa + ab) + ab * (bb + d)),
        "beta_loop_orbits_5": bb * (s * s + bb * s + ba - d + d * (aa + ab)),
    }


LONG_SPLIT_KEYS = ("alpha_loop_orbits_3", "beta_loop_orbits_3", "alpha_loop_orbits_5", "beta_loop_orbits_5")


def predicted_invariants(inst, keys=None):
    """Closed-form predictions; `keys` restricts the output and raises ScopeError when
    a requested formula does not apply to the instance."""
    if isinstance(inst, SplitInstance):
        pred = _split_predictions(inst)
        subject = f"split:{inst.variant}:T={[list(r) for r in inst.T]}:{inst.delta_super}:{inst.delta_sub}"
        out_of_scope = set(LONG_SPLIT_KEYS) - set(pred)
    elif isinstance(inst, FamilyInstance):
        pred = _family_predictions(inst)
        subject = f"family:{inst.kind}"
        out_of_scope = set()
    else:
        raise ValueError("expected a FamilyInstance or SplitInstance")
    if keys is not None:
        bad = [k for k in keys if k in out_of_scope]
        if bad:
            raise ScopeError(f"formulas {bad} are stated only for delta_super = 0")
        unknown = [k for k in keys if k not in pred]
        if unknown:
            raise ScopeError(f"formulas {unknown} do not apply to {subject}")
        pred = {k: pred[k] for k in keys}
    return InvariantReport(subject, predicted=pred)


def split_refiner(inst):
    """Map a negative orbit to "alpha"/"beta" when its multiplier's image in the base
    graph semigroup is a single loop at that vertex, else None."""
    quotient = build_quotient(inst.md_graph)
    g = inst.md_graph

    def refine(orbit):
        if orbit.kind != NEGATIVE:
            return None
        image = psi(g, quotient, orbit.multiplier)
        if image is ZERO or image.plus or len(image.minus) != 1:
            return None
        edge = quotient.tilde_graph.minus_by_id[image.minus[0]]
        if edge.source != edge.target:
            return None
        return inst.roots[edge.source]

    return refine


def split_census(inst, max_len=5, power_bound=None):
    p = identity_presentation(inst.md_graph)
    return census(p, max_len, power_bound, refine=split_refiner(inst))


def _measure_split(inst, cen):
    measured = {
        "negative_fixed_points": cen.I_minus(1),
        "negative_two_orbits": cen.I_minus(2),
        "neutral_two_orbits": cen.I_zero(2),
    }
    for k in (1, 3, 5):
        if k <= cen.max_len:
            for root in ("alpha", "beta"):
                measured[f"{root}_loop_orbits_{k}"] = cen.refined_count(k, root)
    return measured


def _assert(report, name, lhs, rhs, holds):
    report.assertions[name] = {"lhs": lhs, "rhs": rhs, "holds": bool(holds)}


def _measure_family(inst, cen, links, report):
    measured = {
        "negative_fixed_points": cen.I_minus(1),
        "neutral_fixed_points": cen.I_zero(1),
        "negative_two_orbits": cen.I_minus(2),
        "neutral_two_orbits": cen.I_zero(2),
    }
    if cen.max_len >= 3:
        measured["negative_three_orbits"] = cen.I_minus(3)
    r1 = links[(1, 1)].relation
    if r1.minus:
        measured["loop_relation_class"] = canonical_encoding(r1)
    i1, i2 = measured["negative_fixed_points"], measured["negative_two_orbits"]
    kind = inst.kind
    if kind != "one_vertex":
        q2 = family_Q(inst, 2, links)
        if q2.minus and q2.plus:
            inv = class_invariants(q2)
            measured["through_relation_balanced"] = rho_flags(q2).triangle
            measured["through_relation_sides"] = [inv.D_minus, inv.D_plus]
            rhs = _card(r1) + _card(q2) // (inv.D_minus * inv.D_plus) + inv.D_minus * inv.D_plus
            if kind == "balanced_petals":
                rhs += inv.D_minus * inv.D_plus
            if kind in ("chain", "balanced_petals"):
                _assert(report, "neutral_two_orbits_from_links", measured["neutral_two_orbits"], rhs,
                        measured["neutral_two_orbits"] == rhs)
            if kind == "chain_with_return":
                _assert(report, "neutral_two_orbits_exceed", measured["neutral_two_orbits"], rhs,
                        measured["neutral_two_orbits"] > rhs)
    if kind in ("chain", "chain_with_return", "petals", "balanced_petals"):
        _assert(report, "negative_two_orbits_exceed", i2, i1 * (i1 - 1), i2 > i1 * (i1 - 1))
    if kind == "cycle":
        _assert(report, "neutral_two_orbits_exceed_loop_pairs", measured["neutral_two_orbits"], _card(r1),
                measured["neutral_two_orbits"] > _card(r1))
    if kind in ("chain_with_return", "balanced_petals") and cen.max_len >= 3:
        i3 = measured["negative_three_orbits"]
        if inst.has_loops():
            linked = _links_for(inst, 3, 1, links)
            measured["linked_three_orbits"] = len(linked.relation.pairs)
            factor = 1 if kind == "chain_with_return" else 2
            first = "q" if kind == "chain_with_return" else "q0"
            a = inst.minus_count("p", first) * inst.plus_count("p", first)
            rhs = (i2 - (i1 - 1) ** 2) * i1 + factor * a * i1 + i1 * (i1 - 1) * (i1 - 2) // 3
            _assert(report, "negative_three_orbits_exceed", i3, rhs, i3 > rhs)
        elif kind == "chain_with_return":
            _assert(report, "negative_three_orbits_positive", i3, 0, i3 > 0)
    return measured


def check_invariants(inst, cen=None, links=None, max_len=None):
    """Fill measured values from an orbit census (and link relations for families),
    then set match flags and evaluate the inequality assertions."""
    report = predicted_invariants(inst)
    if isinstance(inst, SplitInstance):
        need = 5 if inst.delta_super == 0 else 2
        if cen is None:
            cen = split_census(inst, max_len or need)
        if cen.max_len < 2:
            raise ValueError("census depth must be at least 2")
        if cen.max_len < need:
            report.notes.append(f"census depth {cen.max_len} < {need}; longer formulas skipped")
        report.measured = _measure_split(inst, cen)
    else:
        need = 3 if inst.kind in ("chain_with_return", "balanced_petals") else 2
        p = identity_presentation(inst.graph)
        if cen is None:
            cen = census(p, max_len or need)
        if cen.max_len < 2:
            raise ValueError("census depth must be at least 2")
        links = dict(links or {})
        orbits = periodic_orbits(p, max(cen.max_len, 3 if need == 3 else 2))
        for key in ((1, 1), (2, 2)):
            if key not in links:
                links[key] = link_relation(p, *key, orbits=orbits)
        if need == 3 and inst.has_loops() and (3, 1) not in links:
            links[(3, 1)] = link_relation(p, 3, 1, orbits=orbits)
        report.measured = _measure_family(inst, cen, links, report)
    for key, value in report.predicted.items():
        if key in report.measured:
            report.matches[key] = report.measured[key] == value
    return report


# ---------------------------------------------------------------- sliding block recipes

@dataclass(frozen=True)
class RecipeStep:
    """Rewrite each visit to a pivot vertex (entering symbol, leaving symbol) through
    `pair_map` and every other symbol through `symbol_map`; unmapped items are kept."""

    source: RGraph = field(hash=False)
    target: RGraph = field(hash=False)
    pivots: frozenset
    pair_map: dict = field(hash=False)
    symbol_map: dict = field(hash=False)

    def apply(self, word):
        g = self.source
        out = []
        i = 0
        while i < len(word):
            s = word[i]
            if _target(g, s) in self.pivots and i + 1 < len(word):
                pair = self.pair_map.get((s, word[i + 1]), (s, word[i + 1]))
                out.extend(pair)
                i += 2
            else:
                out.append(self.symbol_map.get(s, s))
                i += 1
        return tuple(out)


def _target(g, s):
    e = g.minus_by_id.get(s) or g.plus_by_id.get(s)
    return e.target


def _source(g, s):
    e = g.minus_by_id.get(s) or g.plus_by_id.get(s)
    return e.source


@dataclass(frozen=True)
class WitnessRecipe:
    source: RGraph = field(hash=False)
    target: RGraph = field(hash=False)
    steps: tuple = ()
    boundary: frozenset = frozenset()
    intermediates: tuple = ()

    def apply(self, word):
        for step in self.steps:
            word = step.apply(word)
        return word

    def describe(self):
        return {
            "steps": [
                {
                    "pivots": sorted(step.pivots),
                    "pair_map": sorted([list(k), list(v)] for k, v in step.pair_map.items() if k != v),
                    "symbol_map": sorted([k, v] for k, v in step.symbol_map.items() if k != v),
                }
                for step in self.steps
            ],
            "boundary": sorted(self.boundary),
            "intermediate_graphs": len(self.intermediates),
        }


def admissible_words(g, length, avoid_ends=frozenset()):
    """Admissible words of exactly `length` symbols (identity presentation) whose first
    symbol does not start and last symbol does not end in `avoid_ends`."""
    symbols = [e.id for e in g.minus_edges] + [e.id for e in g.plus_edges]
    outgoing = {}
    for s in symbols:
        outgoing.setdefault(_source(g, s), []).append(s)
    reducer = Reducer(g)
    out, word = [], []

    def visit():
        if len(word) == length:
            if _target(g, word[-1]) not in avoid_ends:
                out.append(tuple(word))
            return
        candidates = outgoing.get(_target(g, word[-1]), []) if word else [
            s for s in symbols if _source(g, s) not in avoid_ends
        ]
        for s in candidates:
            if reducer.push(s):
                word.append(s)
                visit()
                word.pop()
            reducer.pop()

    visit()
    return out


@dataclass(frozen=True)
class RecipeCheck:
    holds: bool
    length: int
    source_words: int
    target_words: int
    failure: str = None


def verify_recipe(recipe, max_len=8):
    """Check the recipe maps admissible words bijectively, length by length.

    Words are taken with both ends away from the pivot vertices, so every pivot
    visit lies inside the word.
    """
    src, dst = recipe.source, recipe.target
    total_src = total_dst = 0
    for n in range(1, max_len + 1):
        words = admissible_words(src, n, recipe.boundary)
        targets = set(admissible_words(dst, n, recipe.boundary))
        total_src += len(words)
        total_dst += len(targets)
        images = set()
        for w in words:
            image = recipe.apply(w)
            if image not in targets:
                return RecipeCheck(False, n, total_src, total_dst, f"image of {list(w)} is not admissible: {list(image)}")
            if image in images:
                return RecipeCheck(False, n, total_src, total_dst, f"two words map to {list(image)}")
            images.add(image)
        if len(images) != len(targets):
            return RecipeCheck(False, n, total_src, total_dst, f"{len(targets) - len(images)} target words of length {n} are not reached")
    return RecipeCheck(True, max_len, total_src, total_dst)


# ---------------------------------------------------------------- conjugacy criteria

@dataclass(frozen=True)
class ConjugacyVerdict:
    verdict: str
    criterion: str = None
    recipe: WitnessRecipe = None
    details: dict = field(default_factory=dict, hash=False)


def _iso_or_none(a, b):
    if not a.minus and not b.minus:
        return {}, {}
    return are_isomorphic(a, b)


def _visits(inst, pivot_role):
    """(entering ids, leaving ids) at a pivot vertex, by block role pair."""
    g = inst.graph
    v = inst.role_map[pivot_role]
    entering = [e.id for e in g.minus_edges + g.plus_edges if e.target == v]
    leaving = [e.id for e in g.minus_edges + g.plus_edges if e.source == v]
    return entering, leaving


def _class_of(inst, edge_id):
    """(side, role block) of an edge."""
    g = inst.graph
    inverse = {v: k for k, v in inst.role_map.items()}
    q, r = g.block_of(edge_id)
    side = "minus" if edge_id in g.minus_by_id else "plus"
    return side, (inverse[q], inverse[r])


def _cycle_recipe(a, b, loop_iso, closing_iso):
    symbol_map = {}
    for iso in (loop_iso, closing_iso):
        symbol_map.update(iso[0])
        symbol_map.update(iso[1])
    entering_a, leaving_a = _visits(a, "q")
    entering_b, leaving_b = _visits(b, "q")
    pair_map = {}
    for ein_class, eout_class in product(
        [("minus", ("p", "q")), ("plus", ("q", "r"))], [("minus", ("q", "r")), ("plus", ("p", "q"))]
    ):
        pairs_a = sorted(
            (x, y) for x in entering_a for y in leaving_a
            if _class_of(a, x) == ein_class and _class_of(a, y) == eout_class
        )
        pairs_b = sorted(
            (x, y) for x in entering_b for y in leaving_b
            if _class_of(b, x) == ein_class and _class_of(b, y) == eout_class
        )
        if len(pairs_a) != len(pairs_b):
            return None
        pair_map.update(zip(pairs_a, pairs_b))
    step = RecipeStep(a.graph, b.graph, frozenset([a.role_map["q"]]), pair_map, symbol_map)
    return WitnessRecipe(a.graph, b.graph, (step,), frozenset([a.role_map["q"]]))


def _cycle_test(a, b):
    details = {}
    loop_iso = _iso_or_none(a.block("p", "p"), b.block("p", "p"))
    if loop_iso is None:
        return ConjugacyVerdict("not-conjugate", "loop_relation_isomorphic", None, details)
    closing_iso = are_isomorphic(a.block("r", "p"), b.block("r", "p"))
    if closing_iso is None:
        return ConjugacyVerdict("not-conjugate", "closing_relation_isomorphic", None, details)
    checks = (
        ("minus_path_product", lambda x: x.minus_count("p", "q") * x.minus_count("q", "r")),
        ("plus_path_product", lambda x: x.plus_count("q", "r") * x.plus_count("p", "q")),
        ("forward_block_product", lambda x: x.minus_count("p", "q") * x.plus_count("p", "q")),
    )
    for name, fn in checks:
        details[name] = [fn(a), fn(b)]
        if fn(a) != fn(b):
            return ConjugacyVerdict("not-conjugate", name, None, details)
    recipe = _cycle_recipe(a, b, loop_iso, closing_iso)
    return ConjugacyVerdict("conjugate", "cycle_criterion", recipe, details)


def _petal_multiplicities(inst):
    return mu_vector(inst.block("q0", "p")) + mu_vector(inst.block("q1", "p"))


def _concentrated(inst):
    """Move all but one least irreducible piece of the returns into the q1 return.

    Returns (new instance, forward RecipeStep) following the rewrite that sends
    an entry into q0 to q1 whenever the exit it pairs with has moved.
    """
    pieces = []
    for q in ("q0", "q1"):
        for piece in decompose(inst.block(q, "p")):
            pieces.append((canonical_encoding(piece), q, piece))
    pieces.sort(key=lambda t: (t[0], t[1]))
    kept_code = pieces[0][0]
    # Prefer a piece already at q0 so that nothing moves when possible.
    keep = next((t for t in pieces if t[0] == kept_code and t[1] == "q0"), pieces[0])
    keep_piece = keep[2]
    moved_minus = {m for _, q, piece in pieces if q == "q0" and piece is not keep_piece for m in piece.minus}
    moved_plus = {x for _, q, piece in pieces if q == "q0" and piece is not keep_piece for x in piece.plus}
    pulled_minus = set(keep_piece.minus) if keep[1] == "q1" else set()
    pulled_plus = set(keep_piece.plus) if keep[1] == "q1" else set()

    b0 = inst.block("q0", "p")
    b1 = inst.block("q1", "p")
    all_minus = list(b0.minus) + list(b1.minus)
    all_plus = list(b0.plus) + list(b1.plus)
    new0_minus = [m for m in all_minus if (m in b0.minus and m not in moved_minus) or m in pulled_minus]
    new0_plus = [x for x in all_plus if (x in b0.plus and x not in moved_plus) or x in pulled_plus]
    new1_minus = [m for m in all_minus if m not in new0_minus]
    new1_plus = [x for x in all_plus if x not in new0_plus]
    pairs = b0.pairs | b1.pairs
    blocks = dict(inst.blocks)
    blocks[("q0", "p")] = Relation(tuple(new0_minus), tuple(new0_plus), frozenset(
        (m, x) for m, x in pairs if m in new0_minus and x in new0_plus))
    blocks[("q1", "p")] = Relation(tuple(new1_minus), tuple(new1_plus), frozenset(
        (m, x) for m, x in pairs if m in new1_minus and x in new1_plus))
    hat = FamilyInstance(inst.kind, _graph_from_blocks(blocks, inst.role_map), inst.role_map, blocks)

    psi_minus = dict(zip(inst.block("p", "q0").minus, inst.block("p", "q1").minus))
    psi_plus = dict(zip(inst.block("p", "q0").plus, inst.block("p", "q1").plus))
    change_minus = moved_minus | pulled_minus
    change_plus = moved_plus | pulled_plus
    pair_map = {}
    for q, swap_minus, swap_plus in (("q0", psi_minus, psi_plus), ("q1", _inverse(psi_minus), _inverse(psi_plus))):
        entering, leaving = _visits(inst, q)
        for x in entering:
            for y in leaving:
                new_x, new_y = x, y
                if x in swap_minus and y in change_minus:
                    new_x = swap_minus[x]
                if y in swap_plus and x in change_plus:
                    new_y = swap_plus[y]
                pair_map[(x, y)] = (new_x, new_y)
    pivots = frozenset(inst.role_map[q] for q in ("q0", "q1"))
    return hat, RecipeStep(inst.graph, hat.graph, pivots, pair_map, {})


def _inverse(mapping):
    return {v: k for k, v in mapping.items()}


def _invert_step(step):
    inverse = {}
    for k, v in step.pair_map.items():
        inverse.setdefault(v, k)
    return RecipeStep(step.target, step.source, step.pivots, inverse, _inverse(step.symbol_map))


def _petal_relabel(a_hat, b_hat):
    """Symbol relabeling between two concentrated instances, or None."""
    symbol_map = {}
    for key in ALLOWED_BLOCKS["balanced_petals"]:
        ra, rb = a_hat.block(*key), b_hat.block(*key)
        if len(ra.minus) != len(rb.minus) or len(ra.plus) != len(rb.plus):
            return None
        if not ra.minus:
            continue
        iso = are_isomorphic(ra, rb)
        if iso is None:
            return None
        symbol_map.update(iso[0])
        symbol_map.update(iso[1])
    return symbol_map


def _petals_test(a, b):
    details = {}
    if _iso_or_none(a.block("p", "p"), b.block("p", "p")) is None:
        return ConjugacyVerdict("not-conjugate", "loop_relation_isomorphic", None, details)
    mu_a, mu_b = _petal_multiplicities(a), _petal_multiplicities(b)
    details["return_multiplicities"] = [mu_a.as_dict(), mu_b.as_dict()]
    if mu_a != mu_b:
        return ConjugacyVerdict("not-conjugate", "return_multiplicities", None, details)
    sides = lambda x: [x.minus_count("p", "q0"), x.plus_count("p", "q0")]
    details["petal_sizes"] = [sides(a), sides(b)]
    if sides(a) != sides(b):
        return ConjugacyVerdict("not-conjugate", "petal_sizes", None, details)
    a_hat, step_a = _concentrated(a)
    b_hat, step_b = _concentrated(b)
    relabel = _petal_relabel(a_hat, b_hat)
    if relabel is None:
        details["note"] = "concentrated forms are not isomorphic"
        return ConjugacyVerdict("conjugate", "petals_criterion", None, details)
    pivots = step_a.pivots
    middle = RecipeStep(a_hat.graph, b_hat.graph, frozenset(), {}, relabel)
    recipe = WitnessRecipe(
        a.graph, b.graph, (step_a, middle, _invert_step(step_b)), pivots, (a_hat.graph, b_hat.graph)
    )
    return ConjugacyVerdict("conjugate", "petals_criterion", recipe, details)


def conjugacy_test(a, b):
    """Apply the conjugacy criterion for the cycle and balanced-petal families.

    Conjugate verdicts carry a WitnessRecipe; other kinds are out of scope.
    """
    if a.kind != b.kind:
        raise ValueError(f"kind mismatch: {a.kind} vs {b.kind}")
    if a.kind == "cycle":
        return _cycle_test(a, b)
    if a.kind == "balanced_petals":
        return _petals_test(a, b)
    return ConjugacyVerdict("out-of-scope", None, None, {"kind": a.kind})


def relabeled_family(inst, rng):
    """Same instance with every block's edges shuffled and renamed."""
    blocks = {}
    for (q, r), rel in inst.blocks.items():
        minus = list(rel.minus)
        plus = list(rel.plus)
        rng.shuffle(minus)
        rng.shuffle(plus)
        new_minus = {m: f"{q}_{r}.x{i}-" for i, m in enumerate(minus)}
        new_plus = {x: f"{q}_{r}.x{i}+" for i, x in enumerate(plus)}
        blocks[(q, r)] = Relation(
            tuple(new_minus[m] for m in rel.minus),
            tuple(new_plus[x] for x in rel.plus),
            frozenset((new_minus[m], new_plus[x]) for m, x in rel.pairs),
        )
    return make_family(inst.kind, blocks, inst.role_map)


def _retag(rel, q, r, prefix):
    minus = {m: f"{q}_{r}.{prefix}{i}-" for i, m in enumerate(rel.minus)}
    plus = {x: f"{q}_{r}.{prefix}{i}+" for i, x in enumerate(rel.plus)}
    return Relation(
        tuple(minus.values()), tuple(plus.values()), frozenset((minus[m], plus[x]) for m, x in rel.pairs)
    )


CYCLE_CRITERIA = ("minus_path_product", "plus_path_product", "forward_block_product")


def _cycle_products(a, b, c, d):
    return {"minus_path_product": a * b, "plus_path_product": c * d, "forward_block_product": a * d}


def cycle_partner(inst, rng, perturb=None, max_size=4):
    """A second cycle instance with equal criterion data and fresh through-block sizes,
    or, with `perturb`, one whose first failing criterion is the named one."""
    sizes = (
        inst.minus_count("p", "q"), inst.minus_count("q", "r"), inst.plus_count("q", "r"), inst.plus_count("p", "q")
    )
    want = _cycle_products(*sizes)
    options = []
    for cand in product(range(1, max_size + 1), repeat=4):
        got = _cycle_products(*cand)
        if perturb in CYCLE_CRITERIA:
            position = CYCLE_CRITERIA.index(perturb)
            earlier = all(got[k] == want[k] for k in CYCLE_CRITERIA[:position])
            if earlier and got[perturb] != want[perturb]:
                options.append(cand)
        elif got == want:
            options.append(cand)
    if not options:
        raise ValueError(f"no through-block sizes up to {max_size} fit {perturb or 'equal criteria'}")
    na, nb, nc, nd = rng.choice(options)
    blocks = {
        ("p", "q"): full_block("p", "q", na, nd),
        ("q", "r"): full_block("q", "r", nb, nc),
        ("r", "p"): _retag(inst.block("r", "p"), "r", "p", "y"),
    }
    if inst.has_loops():
        blocks[("p", "p")] = _retag(inst.block("p", "p"), "p", "p", "y")
    if perturb == "loop_relation_isomorphic":
        if inst.has_loops():
            blocks[("p", "p")] = _other_class(inst.block("p", "p"), rng, "p", "p", "circle")
        else:
            blocks[("p", "p")] = random_relation(rng, "p", "p", 2, 2, "circle")
    elif perturb == "closing_relation_isomorphic":
        flag = "nabla" if inst.has_loops() else "circle_nabla"
        blocks[("r", "p")] = _other_class(inst.block("r", "p"), rng, "r", "p", flag)
    return make_family("cycle", blocks, inst.role_map)


def _other_class(rel, rng, q, r, flag):
    code = canonical_encoding(rel)
    for _ in range(200):
        n_minus = max(1, len(rel.minus) + rng.choice([-1, 0, 1]))
        n_plus = max(1, len(rel.plus) + rng.choice([-1, 0, 1]))
        try:
            candidate = random_relation(rng, q, r, n_minus, n_plus, flag, tries=50)
        except ValueError:
            continue
        if canonical_encoding(candidate) != code:
            return candidate
    raise ValueError("could not find a relation of a different class")


def petals_partner(inst, rng, perturb=None):
    """A second balanced-petal instance whose returns carry the same irreducible pieces,
    split between the two returns at random, or one perturbed in the named criterion."""
    pieces = decompose(inst.block("q0", "p")) + decompose(inst.block("q1", "p"))
    if perturb == "return_multiplicities":
        template = next(x for x in pieces if x.minus and x.plus)
        pieces = pieces + [_other_class(template, rng, "x", "y", "nabla")]
    for _ in range(200):
        rng.shuffle(pieces)
        cut = rng.randint(1, len(pieces) - 1) if len(pieces) > 1 else 1
        groups = (pieces[:cut], pieces[cut:])
        if not groups[1]:
            groups = (pieces, pieces[:1])
        rels = []
        for q, group in zip(("q0", "q1"), groups):
            rels.append(_retag(kronecker_sum(*[_retag(x, q, "p", f"g{i}_") for i, x in enumerate(group)]), q, "p", "z"))
        if all(r.minus and r.plus and rho_flags(r).nabla for r in rels):
            break
    else:
        raise ValueError("no balanced split of the return pieces")
    blocks = {k: v for k, v in inst.blocks.items()}
    blocks[("q0", "p")], blocks[("q1", "p")] = rels
    a, d = inst.minus_count("p", "q0"), inst.plus_count("p", "q0")
    if perturb == "petal_sizes":
        a += 1
    for q in ("q0", "q1"):
        blocks[("p", q)] = full_block("p", q, a, d)
    if inst.has_loops():
        blocks[("p", "p")] = _retag(inst.block("p", "p"), "p", "p", "y")
        if perturb == "loop_relation_isomorphic":
            blocks[("p", "p")] = _other_class(inst.block("p", "p"), rng, "p", "p", "circle")
    elif perturb == "loop_relation_isomorphic":
        blocks[("p", "p")] = random_relation(rng, "p", "p", 2, 2, "circle")
    return make_family("balanced_petals", blocks, inst.role_map)


# ---------------------------------------------------------------- the two-vertex base graph comparisons

@dataclass(frozen=True)
class DistinguishReport:
    verdict: str
    invariant: str = None
    values: dict = field(default_factory=dict, hash=False)


def _as_subject(x):
    if isinstance(x, SplitInstance):
        return x
    T = _check_T(x)
    return T


def _base_neutral_two_orbits(T, measure):
    if not measure:
        return sum(sum(row) for row in T)
    g = build_markov_dyck([list(r) for r in T])
    return census(identity_presentation(g), 2).I_zero(2)


def split_distinguish(a, b, measure=True):
    """Separate two split graphs over the same T (or the graph of T itself) by the
    orbit invariants; returns "conjugate", "not-conjugate" or "undecided"."""
    a, b = _as_subject(a), _as_subject(b)
    Ta = a.T if isinstance(a, SplitInstance) else a
    Tb = b.T if isinstance(b, SplitInstance) else b
    if Ta != Tb:
        raise ValueError("both subjects must share the same T")
    T = Ta
    if not isinstance(a, SplitInstance) and not isinstance(b, SplitInstance):
        return DistinguishReport("conjugate", "identical_graph")
    if not isinstance(a, SplitInstance) or not isinstance(b, SplitInstance):
        split = a if isinstance(a, SplitInstance) else b
        values = {
            "base_graph": _base_neutral_two_orbits(T, measure),
            "split_graph": _split_value(split, "neutral_two_orbits", measure),
        }
        if values["base_graph"] != values["split_graph"]:
            return DistinguishReport("not-conjugate", "neutral_two_orbits", values)
        return DistinguishReport("undecided", None, values)
    if (a.variant, a.delta_super, a.delta_sub) == (b.variant, b.delta_super, b.delta_sub):
        return DistinguishReport("conjugate", "identical_graph")
    symmetric = T[0][0] == T[1][1] and T[0][1] == T[1][0]
    if symmetric and (a.delta_super, a.delta_sub) == (b.delta_super, b.delta_sub):
        ga, gb = a.md_graph, b.md_graph
        if graphs_isomorphic(ga, gb) is not None:
            return DistinguishReport("conjugate", "graph_isomorphism")
    keys = ["negative_fixed_points", "negative_two_orbits", "neutral_two_orbits"]
    if not symmetric:
        keys += ["alpha_loop_orbits_1", "beta_loop_orbits_1"]
        if a.delta_super == 0 and b.delta_super == 0:
            keys += list(LONG_SPLIT_KEYS)
    values = {}
    for key in keys:
        va, vb = _split_value(a, key, measure), _split_value(b, key, measure)
        values[key] = [va, vb]
        if va != vb:
            return DistinguishReport("not-conjugate", key, values)
    return DistinguishReport("undecided", None, values)


_split_cache = {}


def _split_value(inst, key, measure):
    if not measure:
        return predicted_invariants(inst).predicted[key]
    depth = 5 if key in LONG_SPLIT_KEYS else 2
    cache_key = (inst.variant, inst.T, inst.delta_super, inst.delta_sub, depth)
    if cache_key not in _split_cache:
        _split_cache[cache_key] = _measure_split(inst, split_census(inst, depth))
    return _split_cache[cache_key][key]


def split_instances(T, supers=(0, 1), subs=(0, 1)):
    """Every valid split instance over T with the given parameter ranges."""
    out = []
    for variant in SPLIT_VARIANTS:
        for ds in supers:
            for dl in subs:
                try:
                    out.append(split_make(variant, T, ds, dl))
                except ValueError:
                    continue
    return out


def tilde_matches_base(inst):
    """Whether the contracted graph of a split instance is isomorphic to the graph of T."""
    tilde = build_quotient(inst.md_graph).tilde_graph
    return graphs_isomorphic(tilde, build_markov_dyck([list(r) for r in inst.T])) is not None
