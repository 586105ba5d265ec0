"""Command-line front end: `rgraphs <command> ...`.

Exit codes: 0 success or the checked property holds, 1 the property fails (the
report explains why), 2 malformed input.
"""
import argparse
import json
import sys
from dataclasses import dataclass

from . import families
from .quotient import PreconditionError, build_quotient
from .relations import canonical_encoding
from .rgraph import EXCLUDE_SELF, INCLUDE_SELF, RGraph, check_context_conditions, check_local_conditions, validate
from .semigroup import ZERO, reduce_word
from .shift import admissible, census, identity_presentation, link_relation

SCHEMA = 1
# Alternate names kept for compatibility with the published command interface.
SET_ALIASES = {"thm23": "context", "abcd": "local"}
COMMAND_ALIASES = {"split": ["section5"]}


class InputError(ValueError):
    """Malformed command input; reported with exit code 2."""


# ---------------------------------------------------------------- graph documents

def _require(obj, key, where, kind):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise InputError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _edges(doc, key):
    out = []
    for i, item in enumerate(_require(doc, key, "$", list)):
        where = f"$.{key}[{i}]"
        out.append(tuple(_require(item, field, where, str) for field in ("id", "from", "to")))
    return out


def parse_graph(doc):
    """RGraph from a GraphDocument dict; raises InputError naming the offending location."""
    if not isinstance(doc, dict):
        raise InputError("$: expected a JSON object")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise InputError(f"$.schema: unsupported schema {doc.get('schema')!r}")
    vertices = _require(doc, "vertices", "$", list)
    for i, v in enumerate(vertices):
        if not isinstance(v, str):
            raise InputError(f"$.vertices[{i}]: expected a string")
    minus = _edges(doc, "minus_edges")
    plus = _edges(doc, "plus_edges")
    relation = []
    for i, pair in enumerate(_require(doc, "relation", "$", list)):
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, str) for x in pair)):
            raise InputError(f"$.relation[{i}]: expected [minus-id, plus-id]")
        relation.append(tuple(pair))
    vertex_set = set(vertices)
    for key, edges in (("minus_edges", minus), ("plus_edges", plus)):
        for i, (eid, src, dst) in enumerate(edges):
            for field, v in (("from", src), ("to", dst)):
                if v not in vertex_set:
                    raise InputError(f"$.{key}[{i}].{field}: unknown vertex {v!r}")
    g = RGraph.make(vertices, minus, plus, relation)
    minus_ids, plus_ids = set(g.minus_by_id), set(g.plus_by_id)
    for i, (m, p) in enumerate(relation):
        if m not in minus_ids:
            raise InputError(f"$.relation[{i}][0]: unknown minus edge {m!r}")
        if p not in plus_ids:
            raise InputError(f"$.relation[{i}][1]: unknown plus edge {p!r}")
    problems = validate(g)
    if problems:
        raise InputError("$: invalid R-graph: " + "; ".join(problems))
    return g


def emit_graph(g):
    """GraphDocument dict; edges and relation pairs are sorted by id."""
    def edges(items):
        return [{"id": e.id, "from": e.source, "to": e.target} for e in sorted(items, key=lambda e: e.id)]

    return {
        "schema": SCHEMA,
        "vertices": list(g.vertices),
        "minus_edges": edges(g.minus_edges),
        "plus_edges": edges(g.plus_edges),
        "relation": [list(p) for p in sorted(g.relation)],
    }


def normalized(g):
    """The graph as parse_graph(emit_graph(g)) returns it."""
    return RGraph.make(
        g.vertices,
        sorted(g.minus_edges, key=lambda e: e.id),
        sorted(g.plus_edges, key=lambda e: e.id),
        g.relation,
    )


def _load_json(path):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def load_graph(path):
    try:
        return parse_graph(_load_json(path))
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


# ---------------------------------------------------------------- family documents

def parse_family(doc):
    """FamilyInstance from {"kind": ..., "blocks": [{"from", "to", "minus", "plus", "pairs"}]}.

    "minus"/"plus" are edge counts; "pairs" is "full" or a list of [i, j] index pairs.
    """
    kind = _require(doc, "kind", "$", str)
    blocks = {}
    for i, item in enumerate(_require(doc, "blocks", "$", list)):
        where = f"$.blocks[{i}]"
        q, r = _require(item, "from", where, str), _require(item, "to", where, str)
        n_minus, n_plus = _require(item, "minus", where, int), _require(item, "plus", where, int)
        pairs = item.get("pairs", "full")
        if pairs == "full":
            rel = families.full_block(q, r, n_minus, n_plus)
        elif isinstance(pairs, list) and all(
            isinstance(p, list) and len(p) == 2 and 0 <= p[0] < n_minus and 0 <= p[1] < n_plus for p in pairs
        ):
            rel = families.block_relation(q, r, n_minus, n_plus, [tuple(p) for p in pairs])
        else:
            raise InputError(f"{where}.pairs: expected \"full\" or [[i, j], ...] within the block sizes")
        blocks[(q, r)] = rel
    try:
        return families.make_family(kind, blocks, doc.get("role_map"))
    except families.FamilyError:
        raise
    except ValueError as exc:
        raise InputError(f"$: {exc}") from exc


def emit_family(inst):
    out = []
    for (q, r), rel in sorted(inst.blocks.items()):
        index_minus = {m: i for i, m in enumerate(rel.minus)}
        index_plus = {p: j for j, p in enumerate(rel.plus)}
        pairs = sorted([index_minus[m], index_plus[p]] for m, p in rel.pairs)
        out.append({"from": q, "to": r, "minus": len(rel.minus), "plus": len(rel.plus), "pairs": pairs})
    return {"kind": inst.kind, "role_map": dict(sorted(inst.role_map.items())), "blocks": out}


def load_family(path):
    try:
        return parse_family(_load_json(path))
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


# ---------------------------------------------------------------- reports

@dataclass
class Outcome:
    code: int
    results: dict
    witnesses: object = None


def _mode(args):
    return INCLUDE_SELF if args.p1_self_loops == "include" else EXCLUDE_SELF


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (frozenset, set)):
        return sorted(_jsonable(v) for v in x)
    return x


def render(report, as_json):
    if as_json:
        return json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False)
    lines = [f"command: {report['command']}", f"mode: {report['mode']}"]
    for key, value in sorted(report["bounds"].items()):
        if value is not None:
            lines.append(f"{key}: {value}")
    for key, value in sorted(report["results"].items()):
        lines.append(f"{key}: {json.dumps(_jsonable(value), sort_keys=True, ensure_ascii=False)}")
    if report.get("witnesses"):
        lines.append(f"witnesses: {json.dumps(_jsonable(report['witnesses']), sort_keys=True, ensure_ascii=False)}")
    return "\n".join(lines)


# ---------------------------------------------------------------- commands

def cmd_validate(args):
    g = load_graph_unchecked(args.file)
    problems = validate(g)
    return Outcome(0 if not problems else 1, {"valid": not problems, "problems": problems})


def load_graph_unchecked(path):
    """Structural parse that leaves R-graph validity to the caller."""
    doc = _load_json(path)
    try:
        return parse_graph(doc)
    except InputError as exc:
        if "invalid R-graph" not in str(exc):
            raise InputError(f"{path}: {exc}") from None
    return RGraph.make(
        doc["vertices"],
        [(e["id"], e["from"], e["to"]) for e in doc["minus_edges"]],
        [(e["id"], e["from"], e["to"]) for e in doc["plus_edges"]],
        [tuple(p) for p in doc["relation"]],
    )


def cmd_conditions(args):
    g = load_graph(args.file)
    which = SET_ALIASES.get(args.set, args.set)
    check = check_context_conditions if which == "context" else check_local_conditions
    reports = check(g, _mode(args))
    results = {"set": which, "conditions": {r.condition: r.holds for r in reports}}
    witnesses = {r.condition: r.witness for r in reports if not r.holds}
    return Outcome(0 if all(r.holds for r in reports) else 1, results, witnesses)


def cmd_quotient(args):
    g = load_graph(args.file)
    try:
        q = build_quotient(g, _mode(args))
    except PreconditionError as exc:
        return Outcome(1, {"error": str(exc)})
    if args.emit == "hat":
        payload = emit_graph(q.hat_graph)
    elif args.emit == "tilde":
        payload = emit_graph(q.tilde_graph)
    else:
        payload = {"classes": [list(c) for c in q.classes()], "roots": list(q.roots)}
    return Outcome(0, {args.emit: payload})


def _word(text):
    word = [t.strip() for t in text.split(",") if t.strip()]
    if not word:
        raise InputError("--word: empty word")
    return word


def cmd_reduce(args):
    g = load_graph(args.file)
    try:
        value = reduce_word(g, _word(args.word))
    except ValueError as exc:
        raise InputError(f"--word: {exc}") from exc
    return Outcome(1 if value is ZERO else 0, {"value": str(value)})


def cmd_admissible(args):
    g = load_graph(args.file)
    word = _word(args.word)
    p = identity_presentation(g)
    try:
        ok = admissible(p, word)
    except ValueError as exc:
        raise InputError(f"--word: {exc}") from exc
    return Outcome(0 if ok else 1, {"admissible": ok})


def cmd_census(args):
    g = load_graph(args.file)
    if args.max_len < 1:
        raise InputError("--max-len must be at least 1")
    cen = census(identity_presentation(g), args.max_len, args.power_bound)
    counts = {
        str(n): {"I_minus": row["negative"], "I_zero": row["neutral"], "I_plus": row["positive"]}
        for n, row in cen.summary().items()
    }
    return Outcome(0, {"counts": counts})


def cmd_link(args):
    g = load_graph(args.file)
    if args.k < 1 or args.l < 1:
        raise InputError("-k and -l must be at least 1")
    p = identity_presentation(g)
    try:
        link = link_relation(p, args.k, args.l, args.link_bound, args.power_bound, _mode(args))
    except ValueError as exc:
        return Outcome(1, {"error": str(exc)})
    rel = link.relation
    results = {
        "negative_orbits": sorted(rel.minus),
        "positive_orbits": sorted(rel.plus),
        "pairs": sorted(list(pair) for pair in rel.pairs),
        "cardinality": len(rel.pairs),
    }
    if rel.minus and rel.plus:
        results["class"] = canonical_encoding(rel)
    return Outcome(0, results)


def cmd_family(args):
    if args.action == "conjugacy":
        if len(args.files) != 2:
            raise InputError("family conjugacy needs two family documents")
        a, b = (load_family(f) for f in args.files)
        try:
            verdict = families.conjugacy_test(a, b)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        results = {"verdict": verdict.verdict, "criterion": verdict.criterion, "details": verdict.details}
        witnesses = None
        if verdict.recipe is not None:
            witnesses = verdict.recipe.describe()
            if args.verify_len:
                check = families.verify_recipe(verdict.recipe, args.verify_len)
                results["recipe_check"] = {
                    "holds": check.holds, "length": check.length, "failure": check.failure,
                    "source_words": check.source_words, "target_words": check.target_words,
                }
        code = 0 if verdict.verdict == "conjugate" else 1
        if results.get("recipe_check") and not results["recipe_check"]["holds"]:
            code = 1
        return Outcome(code, results, witnesses)
    if len(args.files) != 1:
        raise InputError(f"family {args.action} needs one family document")
    inst = load_family(args.files[0])
    if args.action == "make":
        return Outcome(0, {"graph": emit_graph(inst.graph), "family": emit_family(inst)})
    if args.action == "predict":
        return Outcome(0, families.predicted_invariants(inst).as_dict())
    p = identity_presentation(inst.graph)
    cen = census(p, args.max_len or 3, args.power_bound)
    report = families.check_invariants(inst, cen)
    ok = report.all_match() and report.all_assertions_hold()
    return Outcome(0 if ok else 1, report.as_dict())


def _matrix(text):
    try:
        values = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise InputError(f"--T: expected four comma-separated integers, got {text!r}") from exc
    if len(values) != 4:
        raise InputError(f"--T: expected four comma-separated integers, got {text!r}")
    return [values[:2], values[2:]]


def _split_subject(text, T):
    """"base" for the graph of T, or "variant:delta_super:delta_sub"."""
    if text == "base":
        return T
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"expected base or variant:delta_super:delta_sub, got {text!r}")
    try:
        return families.split_make(parts[0], T, int(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_split(args):
    T = _matrix(args.T)
    if args.action == "distinguish":
        a, b = _split_subject(args.a, T), _split_subject(args.b, T)
        try:
            report = families.split_distinguish(a, b, measure=not args.predicted)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        return Outcome(0, {"verdict": report.verdict, "invariant": report.invariant, "values": report.values})
    if args.variant is None:
        raise InputError(f"split {args.action} needs --variant")
    try:
        inst = families.split_make(args.variant, T, args.delta_super, args.delta_sub)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.action == "make":
        return Outcome(0, {"adjacency": [list(r) for r in inst.adjacency], "graph": emit_graph(inst.md_graph)})
    if args.action == "predict":
        return Outcome(0, families.predicted_invariants(inst).as_dict())
    depth = args.max_len or (5 if inst.delta_super == 0 else 2)
    report = families.check_invariants(inst, families.split_census(inst, depth, args.power_bound))
    return Outcome(0 if report.all_match() else 1, report.as_dict())


# ---------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(prog="rgraphs", description="R-graph semigroups and their subshifts")
    parser.add_argument("--p1-self-loops", choices=("include", "exclude"), default="exclude")
    parser.add_argument("--link-bound", type=int, default=None)
    parser.add_argument("--power-bound", type=int, default=None)
    parser.add_argument("--json", action="store_true", help="emit the report as JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check R-graph invariants")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("conditions", help="check a condition set")
    p.add_argument("file")
    p.add_argument("--set", required=True, choices=("context", "local", *SET_ALIASES))
    p.set_defaults(func=cmd_conditions)

    p = sub.add_parser("quotient", help="hat graph, tilde graph or vertex partition")
    p.add_argument("file")
    p.add_argument("--emit", choices=("hat", "tilde", "partition"), default="tilde")
    p.set_defaults(func=cmd_quotient)

    for name, func in (("reduce", cmd_reduce), ("admissible", cmd_admissible)):
        p = sub.add_parser(name)
        p.add_argument("file")
        p.add_argument("--word", required=True, help="comma-separated edge or vertex ids")
        p.set_defaults(func=func)

    p = sub.add_parser("census", help="periodic orbit counts")
    p.add_argument("file")
    p.add_argument("--max-len", type=int, required=True)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("link", help="link relation between negative k-orbits and positive l-orbits")
    p.add_argument("file")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-l", type=int, required=True)
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("family", help="small families with closed-form invariants")
    p.add_argument("action", choices=("make", "predict", "check", "conjugacy"))
    p.add_argument("files", nargs="+")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--verify-len", type=int, default=0, help="verify conjugacy recipes up to this word length")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("split", aliases=COMMAND_ALIASES["split"], help="three-vertex splits over a two-vertex graph")
    p.add_argument("action", choices=("make", "predict", "check", "distinguish"))
    p.add_argument("--T", required=True, help="T_aa,T_ab,T_ba,T_bb")
    p.add_argument("--variant", choices=("alpha", "beta"))
    p.add_argument("--delta-super", type=int, default=0)
    p.add_argument("--delta-sub", type=int, default=0)
    p.add_argument("--a", default=None, help="base or variant:delta_super:delta_sub")
    p.add_argument("--b", default=None)
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--predicted", action="store_true", help="compare formula values instead of censuses")
    p.set_defaults(func=cmd_split)
    return parser


def _canonical_command(name):
    for canonical, aliases in COMMAND_ALIASES.items():
        if name in aliases:
            return canonical
    return name


def _inputs(args):
    skip = {"func", "json", "p1_self_loops", "link_bound", "power_bound", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.func is cmd_split and args.action == "distinguish" and (args.a is None or args.b is None):
        print("rgraphs: error: split distinguish needs --a and --b", file=stderr)
        return 2
    try:
        outcome = args.func(args)
    except families.FamilyError as exc:
        outcome = Outcome(1, {"kind": exc.kind, "violations": list(exc.violations)})
    except InputError as exc:
        print(f"rgraphs: error: {exc}", file=stderr)
        return 2
    report = {
        "schema": SCHEMA,
        "command": _canonical_command(args.command),
        "inputs": _inputs(args),
        "mode": _mode(args),
        "bounds": {"link_bound": args.link_bound, "power_bound": args.power_bound},
        "results": outcome.results,
        "witnesses": outcome.witnesses,
        "exit_code": outcome.code,
    }
    print(render(report, args.json), file=stdout)
    return outcome.code


def main():
    sys.exit(run())
