"""Acceptance criteria 1-8.

Each criterion records one PASS/FAIL line (printed in the pytest terminal
summary, or directly when this file is run as a script). A criterion passes
only when every check holds exactly and the run stays inside its time budget.
"""
import itertools
import random
import time

from rgraphs import families as fam
from rgraphs.quotient import build_quotient, graphs_isomorphic
from rgraphs.relations import Relation, are_isomorphic, class_invariants, identity_relation, rho_flags
from rgraphs.rgraph import RGraph, build_markov_dyck, check_local_conditions, dyck_graph, one_vertex_graph
from rgraphs.semigroup import ZERO, idempotent, multiply, reduce_word
from rgraphs.shift import (
    admissible,
    census,
    contexts_equal_bounded,
    identity_presentation,
    label_of,
    link_relation,
    omega_plus_bounded,
)

import invariant_checks as checks
from conftest import SPLIT_ADJACENCY, SPLIT_NAMES, example_one_relation, off_diagonal_relation

RESULTS = {}
T_MATRICES = ([[1, 1], [1, 1]], [[2, 1], [1, 1]])


class Criterion:
    """Collects failures for one criterion and records a single summary line."""

    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.failures = []
        self.notes = []

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def check(self, ok, message):
        if not ok:
            self.failures.append(message)
        return ok

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc is not None:
            self.failures.append(f"raised {exc_type.__name__}: {exc}")
        if elapsed > self.budget:
            self.failures.append(f"took {elapsed:.1f} s, budget {self.budget} s")
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures[:4] + self.notes)
        more = f" (+{len(self.failures) - 4} more)" if len(self.failures) > 4 else ""
        RESULTS[self.number] = f"criterion {self.number} {status} [{elapsed:.1f} s] {self.title}" + (
            f": {detail}{more}" if detail else ""
        )
        return False

    def conclude(self):
        assert not self.failures, RESULTS[self.number]


# ---------------------------------------------------------------- 1

def test_criterion_1_dyck_fixture():
    with Criterion(1, "Dyck D2 fixture", 1.0) as c:
        g = dyck_graph(2)
        tokens = [e.id for e in g.minus_edges] + [e.id for e in g.plus_edges]
        nonzero = sum(1 for w in itertools.product(tokens, repeat=2) if reduce_word(g, list(w)) is not ZERO)
        c.check(nonzero == 14, f"admissible two-letter words {nonzero}, expected 14")
        p = identity_presentation(g)
        cen = census(p, 2)
        for name, got, want in (
            ("I-(1)", cen.I_minus(1), 2),
            ("I-(2)", cen.I_minus(2), 2),
            ("I0(2)", cen.I_zero(2), 2),
        ):
            c.check(got == want, f"{name} = {got}, expected {want}")
        r1 = link_relation(p, 1, 1).relation
        c.check(are_isomorphic(r1, identity_relation(2)) is not None, "R1 is not the identity on 2+2")
    c.conclude()


# ---------------------------------------------------------------- 2

def test_criterion_2_one_vertex_examples():
    with Criterion(2, "one-vertex examples and duplicated rows", 1.0) as c:
        for name, rel in (("first", example_one_relation()), ("second", off_diagonal_relation())):
            reports = check_local_conditions(one_vertex_graph(rel))
            failed = [r.condition for r in reports if not r.holds]
            c.check(not failed, f"{name} example fails {failed}")
        base = example_one_relation()
        duplicated = Relation.make(
            list(base.minus) + ["c-"], base.plus, list(base.pairs) + [("c-", p) for m, p in base.pairs if m == "a-"]
        )
        reports = {r.condition: r for r in check_local_conditions(one_vertex_graph(duplicated))}
        dup = reports["distinct_minus_partner_sets"]
        c.check(not dup.holds, "duplicated minus rows were not detected")
        c.check(bool(dup.witness) and set(dup.witness.get("edges", ())) == {"a-", "c-"},
                f"witness {dup.witness} does not name the duplicated rows")
    c.conclude()


# ---------------------------------------------------------------- 3

def test_criterion_3_split_suite():
    with Criterion(3, "split-graph census suite", 60.0) as c:
        count = 0
        for T in T_MATRICES:
            for inst in fam.split_instances(T):
                count += 1
                report = fam.check_invariants(inst)
                for key, ok in sorted(report.matches.items()):
                    c.check(ok, f"{inst.variant} T={T} ({inst.delta_super},{inst.delta_sub}) {key}: "
                                f"predicted {report.predicted[key]}, measured {report.measured[key]}")
                if inst.delta_super == 0:
                    c.check(any(k.endswith("_5") for k in report.matches), f"no length-5 formulas checked for {T}")
        c.notes.append(f"{count} instances")
    c.conclude()


# ---------------------------------------------------------------- 4

def test_criterion_4_quotient_correctness():
    with Criterion(4, "quotient correctness", 5.0) as c:
        for T in T_MATRICES:
            for inst in fam.split_instances(T):
                c.check(fam.tilde_matches_base(inst),
                        f"tilde graph of {inst.variant} T={T} ({inst.delta_super},{inst.delta_sub}) differs")
        rng = random.Random(41)
        relations = [identity_relation(2), identity_relation(3), off_diagonal_relation()]
        while len(relations) < 16:
            rel = checks.random_relation(rng)
            if rel.pairs and rho_flags(rel).circle:
                relations.append(rel)
        identity = distinct = distinct_identity = 0
        for rel in relations:
            g = one_vertex_graph(rel)
            quotient = build_quotient(g)
            c.check(not quotient.tree_minus and not quotient.tree_plus, f"one-vertex graph {rel} has tree edges")
            same = graphs_isomorphic(quotient.tilde_graph, g) is not None
            identity += same
            inv = class_invariants(rel)
            if len(inv.classes_minus) == len(rel.minus) and len(inv.classes_plus) == len(rel.plus):
                distinct += 1
                distinct_identity += same
            c.check(same, f"quotient of one-vertex graph with pairs {sorted(rel.pairs)} is not the identity")
        c.notes.append(f"identity on {identity}/{len(relations)} circle-class graphs; "
                       f"on {distinct_identity}/{distinct} with distinct partner sets")
    c.conclude()


# ---------------------------------------------------------------- 5

def test_criterion_5_halving_identity():
    with Criterion(5, "halving identity on family instances", 60.0) as c:
        rng = random.Random(5)
        total = literal = necklace = 0
        for kind in ("chain", "chain_with_return", "cycle", "balanced_petals"):
            for _ in range(8):
                inst = fam.random_family(kind, rng, max_block=3)
                result = fam.halving_check(inst)
                total += 1
                literal += result.literal_holds
                necklace += result.necklace_holds
                c.check(result.literal_holds, f"{kind}: 2*mu(R2 - Q2) != mu(R1<2>)")
        c.notes.append(f"literal form held on {literal}/{total}, necklace form on {necklace}/{total}")
    c.conclude()


# ---------------------------------------------------------------- 6

def test_criterion_6_conjugacy_criteria():
    with Criterion(6, "conjugacy criteria and witness recipes", 120.0) as c:
        rng = random.Random(6)
        verified = 0
        for kind, partner in (("cycle", fam.cycle_partner), ("balanced_petals", fam.petals_partner)):
            for _ in range(10):
                a = fam.random_family(kind, rng, max_block=2)
                b = partner(a, rng)
                verdict = fam.conjugacy_test(a, b)
                if not c.check(verdict.verdict == "conjugate", f"{kind}: equal invariants judged {verdict.verdict}"):
                    continue
                check = fam.verify_recipe(verdict.recipe, 8)
                verified += check.holds
                c.check(check.holds, f"{kind}: recipe fails at length {check.length}: {check.failure}")
        separated = 0
        perturbations = [("cycle", fam.cycle_partner, crit) for crit in fam.CYCLE_CRITERIA]
        perturbations += [("balanced_petals", fam.petals_partner, crit)
                          for crit in ("return_multiplicities", "petal_sizes", "loop_relation_isomorphic")]
        for i in range(20):
            kind, partner, crit = perturbations[i % len(perturbations)]
            a = fam.random_family(kind, rng, max_block=2, loops=True if crit == "loop_relation_isomorphic" else None)
            b = partner(a, rng, crit)
            verdict = fam.conjugacy_test(a, b)
            ok = verdict.verdict == "not-conjugate" and verdict.criterion == crit
            separated += ok
            c.check(ok, f"{kind} perturbed in {crit}: {verdict.verdict} citing {verdict.criterion}")
        c.notes.append(f"recipes verified {verified}/20, perturbed pairs separated {separated}/20")
    c.conclude()


# ---------------------------------------------------------------- 7

def test_criterion_7_property_suites():
    with Criterion(7, "property suites", 300.0) as c:
        rng = random.Random(7)
        graphs = [dyck_graph(2), build_markov_dyck(SPLIT_ADJACENCY, SPLIT_NAMES), build_markov_dyck([[1, 1], [2, 0]])]

        def record(name, outcome):
            count, problems = outcome
            c.notes.append(f"{name}: {count} cases" + (", violations" if problems else ", no violations"))
            for problem in problems:
                c.check(False, f"{name}: {problem}")

        words = [(g, checks.random_word(g, rng, 10), rng) for g in graphs for _ in range(3334)]
        record("confluence", checks.run_many(checks.check_confluence, words))
        triples = [(g, *(checks.random_word(g, rng, 4) for _ in range(3))) for g in graphs for _ in range(3334)]
        record("associativity", checks.run_many(checks.check_associativity, triples))
        quotients = checks.quotient_fixtures()
        pairs = [(g, q, checks.random_word(g, rng, 5), checks.random_word(g, rng, 5))
                 for g, q in quotients for _ in range(334)]
        record("psi", checks.run_many(checks.check_psi_homomorphism, pairs))
        failing = [(g, a, b) for g, q, a, b in pairs if checks.check_psi_homomorphism(g, q, a, b)]
        zero_upstairs = sum(1 for g, a, b in failing if multiply(g, reduce_word(g, a), reduce_word(g, b)) is ZERO)
        c.notes.append(f"psi violations {len(failing)}/{len(pairs)}, of which {zero_upstairs} have a zero product upstairs")
        rels = [(checks.random_relation(rng),) for _ in range(1000)]
        record("decompose", checks.run_many(checks.check_decompose_round_trip, rels))
        record("isomorphism", checks.run_many(checks.check_isomorphism_laws, [(r, rng) for (r,) in rels]))
        record("power", checks.run_many(checks.check_power_invariance,
                                        [(checks.random_relation(rng, 2), rng, 2 + i % 2) for i in range(1000)]))
        relabel_cases = [(g, rng) for g in graphs] + [(checks.random_markov_dyck(rng), rng) for _ in range(20)]
        record("relabeling", checks.run_many(checks.check_relabel_invariance, relabel_cases))
    c.conclude()


# ---------------------------------------------------------------- 8

def single_predecessor_violation():
    """q has the single predecessor p, and block (p, q) is related but not full."""
    return RGraph.make(
        ["p", "q"],
        [("e1-", "p", "q"), ("e2-", "p", "q"), ("f-", "q", "p")],
        [("e1+", "q", "p"), ("e2+", "q", "p"), ("f+", "p", "q")],
        [("e1-", "e1+"), ("e1-", "e2+"), ("e2-", "e1+"), ("f-", "f+")],
    )


def _forced(p, word, depth, horizon):
    """Every symbol is a right extension of the preceding block under every bounded left context."""
    for i in range(1, len(word)):
        if (word[i],) not in omega_plus_bounded(p, word[max(0, i - depth):i], 1, horizon):
            return False
    return True


def _cycles(p, v, length):
    out = []
    for word in itertools.product(p.symbols, repeat=length):
        ids = tuple(s.id for s in word)
        if word[0].source == v and word[-1].target == v and admissible(p, ids):
            out.append(ids)
    return out


def central_block_pairs(p, m=2, depth=4, horizon=6):
    """(b^m c b^m, b^2m) for idempotent two-cycles b and net-zero two-cycles c at each vertex,
    keeping pairs whose long word passes the bounded forcing check."""
    for v in p.vertices:
        cycles = _cycles(p, v, 2)
        for b in (w for w in cycles if label_of(p, w) == idempotent(v)):
            for c in cycles:
                value = label_of(p, c)
                if len(value.plus) != len(value.minus):
                    continue
                long_word = b * m + c + b * m
                if _forced(p, long_word, depth, horizon):
                    yield long_word, b * (2 * m)


def test_criterion_8_context_evidence():
    with Criterion(8, "bounded context evidence", 30.0) as c:
        g = single_predecessor_violation()
        p = identity_presentation(g)
        b = ("f-", "f+")
        proof_pair = (b * 2 + ("e1+", "e1-") + b * 2, b * 4)
        c.check(_forced(p, proof_pair[0], 4, 6), "the proof's long word fails the forcing check")
        result = contexts_equal_bounded(p, *proof_pair, 12)
        c.check(not result.equal, "the proof's pair is not distinguished within horizon 12")
        md = build_markov_dyck(SPLIT_ADJACENCY, SPLIT_NAMES)
        q = identity_presentation(md)
        compared = 0
        for long_word, short_word in central_block_pairs(q):
            compared += 1
            result = contexts_equal_bounded(q, long_word, short_word, 12)
            c.check(result.equal, f"MD(A) pair {long_word} distinguished by {result.left} / {result.right}")
        c.check(compared > 0, "no matched pairs were compared on MD(A)")
        c.notes.append(f"{compared} MD(A) pairs compared")
    c.conclude()


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    for number in sorted(RESULTS):
        print(RESULTS[number])
