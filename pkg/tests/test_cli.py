import io
import json

import pytest

from rgraphs.cli import emit_graph, normalized, parse_graph, run
from rgraphs.quotient import associated_semigroup_graph, graphs_isomorphic
from rgraphs.rgraph import build_markov_dyck, dyck_graph, one_vertex_graph

from conftest import SPLIT_ADJACENCY, SPLIT_NAMES, example_one_relation


def invoke(*argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


@pytest.fixture
def dyck_file(tmp_path):
    return write(tmp_path, "dyck2.json", emit_graph(dyck_graph(2)))


def test_emit_markov_dyck_of_two():
    doc = emit_graph(build_markov_dyck([[2]]))
    assert (len(doc["minus_edges"]), len(doc["plus_edges"]), len(doc["relation"])) == (2, 2, 2)
    assert doc["schema"] == 1


def test_emit_tilde_of_split_graph():
    tilde = associated_semigroup_graph(build_markov_dyck(SPLIT_ADJACENCY, SPLIT_NAMES))
    doc = emit_graph(tilde)
    assert len(doc["vertices"]) == 2
    assert (len(doc["minus_edges"]), len(doc["plus_edges"])) == (4, 4)


@pytest.mark.parametrize("g", [
    dyck_graph(2),
    dyck_graph(3),
    build_markov_dyck(SPLIT_ADJACENCY, SPLIT_NAMES),
    one_vertex_graph(example_one_relation()),
    build_markov_dyck([[1, 1], [1, 1]]),
])
def test_round_trip(g):
    doc = emit_graph(g)
    parsed = parse_graph(json.loads(json.dumps(doc)))
    assert parsed == normalized(g)
    assert emit_graph(parsed) == doc
    assert graphs_isomorphic(parsed, g) is not None


def test_census_on_dyck(dyck_file):
    code, out, _ = invoke("--json", "census", dyck_file, "--max-len", "2")
    report = json.loads(out)
    assert code == 0
    counts = report["results"]["counts"]
    assert counts["1"]["I_minus"] == 2
    assert counts["2"]["I_zero"] == 2
    # Orbit counting: the two-letter negative words a-a- and b-b- are powers, leaving one orbit.
    assert counts["2"]["I_minus"] == 1
    assert report["mode"] == "exclude" and "bounds" in report


def test_reduce_to_zero_exits_one(dyck_file):
    code, out, _ = invoke("reduce", dyck_file, "--word", "a-,b+")
    assert code == 1
    assert "value: \"0\"" in out
    code, out, _ = invoke("reduce", dyck_file, "--word", "a-,a+")
    assert code == 0


def test_admissible(dyck_file):
    assert invoke("admissible", dyck_file, "--word", "a+,b-")[0] == 0
    assert invoke("admissible", dyck_file, "--word", "b-,a+")[0] == 1


def test_conditions_on_one_vertex_example(tmp_path):
    path = write(tmp_path, "ex1.json", emit_graph(one_vertex_graph(example_one_relation())))
    for name in ("abcd", "local", "thm23", "context"):
        assert invoke("conditions", path, "--set", name)[0] == 0


def test_conditions_failure_reports_witness(tmp_path):
    doc = {
        "vertices": ["p"],
        "minus_edges": [{"id": "a-", "from": "p", "to": "p"}, {"id": "b-", "from": "p", "to": "p"}],
        "plus_edges": [{"id": "a+", "from": "p", "to": "p"}, {"id": "b+", "from": "p", "to": "p"}],
        "relation": [["a-", "a+"], ["b-", "a+"]],
    }
    code, out, _ = invoke("--json", "conditions", write(tmp_path, "bad.json", doc), "--set", "abcd")
    assert code == 1
    assert json.loads(out)["witnesses"]


def test_quotient_emits_partition(tmp_path):
    path = write(tmp_path, "split.json", emit_graph(build_markov_dyck(SPLIT_ADJACENCY, SPLIT_NAMES)))
    code, out, _ = invoke("--json", "quotient", path, "--emit", "partition")
    assert code == 0
    results = json.loads(out)["results"]["partition"]
    assert sorted(map(sorted, results["classes"])) == [["a0", "a1"], ["b"]]
    code, out, _ = invoke("--json", "quotient", path, "--emit", "tilde")
    tilde = parse_graph(json.loads(out)["results"]["tilde"])
    assert graphs_isomorphic(tilde, build_markov_dyck([[1, 1], [1, 1]])) is not None


def test_validate_exit_codes(tmp_path, dyck_file):
    assert invoke("validate", dyck_file)[0] == 0
    doc = emit_graph(dyck_graph(2))
    doc["vertices"].append("q")
    doc["minus_edges"].append({"id": "c-", "from": "p", "to": "q"})
    doc["minus_edges"].append({"id": "d-", "from": "q", "to": "p"})
    doc["plus_edges"].append({"id": "d+", "from": "p", "to": "q"})
    code, out, _ = invoke("--json", "validate", write(tmp_path, "v.json", doc))
    assert code == 1
    assert any("block asymmetry at ('p', 'q')" in msg for msg in json.loads(out)["results"]["problems"])


def test_malformed_document_has_location(tmp_path):
    doc = emit_graph(dyck_graph(2))
    doc["minus_edges"][1]["to"] = "nowhere"
    code, _, err = invoke("census", write(tmp_path, "bad.json", doc), "--max-len", "1")
    assert code == 2
    assert "$.minus_edges[1].to" in err
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    code, _, err = invoke("validate", str(path))
    assert code == 2 and "broken.json:1:" in err


def test_unknown_command_is_input_error(dyck_file):
    assert invoke("frobnicate", dyck_file)[0] == 2


def test_stdin_input(monkeypatch):
    doc = json.dumps(emit_graph(dyck_graph(2)))
    code, out, _ = invoke("--json", "census", "-", "--max-len", "1", stdin=doc, monkeypatch=monkeypatch)
    assert code == 0
    assert json.loads(out)["results"]["counts"]["1"]["I_minus"] == 2


def test_reports_are_byte_identical(dyck_file, tmp_path):
    family = {"kind": "G0_pqr", "blocks": [
        {"from": "p", "to": "p", "minus": 2, "plus": 2, "pairs": [[0, 0], [1, 1]]},
        {"from": "p", "to": "q", "minus": 1, "plus": 1, "pairs": "full"},
        {"from": "q", "to": "r", "minus": 1, "plus": 1, "pairs": "full"},
        {"from": "r", "to": "p", "minus": 1, "plus": 1, "pairs": "full"},
    ]}
    fam_file = write(tmp_path, "fam.json", family)
    for argv in (
        ("--json", "census", dyck_file, "--max-len", "4"),
        ("census", dyck_file, "--max-len", "3"),
        ("--json", "link", dyck_file, "-k", "1", "-l", "1"),
        ("--json", "family", "check", fam_file, "--max-len", "3"),
        ("--json", "split", "make", "--T", "1,1,1,1", "--variant", "alpha", "--delta-super", "1"),
    ):
        first, second = invoke(*argv), invoke(*argv)
        assert first == second
        assert first[0] in (0, 1)


def test_family_commands(tmp_path):
    family = {"kind": "G0_pqr", "blocks": [
        {"from": "p", "to": "q", "minus": 1, "plus": 1, "pairs": "full"},
        {"from": "q", "to": "r", "minus": 1, "plus": 1, "pairs": "full"},
        {"from": "r", "to": "p", "minus": 2, "plus": 2, "pairs": "full"},
    ]}
    code, out, _ = invoke("--json", "family", "make", write(tmp_path, "f.json", family))
    assert code == 1
    assert "closing_relation_balanced_without_full_lines" in json.loads(out)["results"]["violations"]


def test_family_conjugacy_with_verification(tmp_path):
    def doc(loop_pairs):
        return {"kind": "cycle", "blocks": [
            {"from": "p", "to": "p", "minus": 2, "plus": 2, "pairs": loop_pairs},
            {"from": "p", "to": "q", "minus": 1, "plus": 1, "pairs": "full"},
            {"from": "q", "to": "r", "minus": 1, "plus": 1, "pairs": "full"},
            {"from": "r", "to": "p", "minus": 1, "plus": 1, "pairs": "full"},
        ]}
    a = write(tmp_path, "a.json", doc([[0, 0], [1, 1]]))
    b = write(tmp_path, "b.json", doc([[0, 1], [1, 0]]))
    code, out, _ = invoke("--json", "family", "conjugacy", a, b, "--verify-len", "4")
    assert code == 0
    assert json.loads(out)["results"]["verdict"] == "conjugate"


def test_split_distinguish():
    code, out, _ = invoke("--json", "split", "distinguish", "--T", "1,1,1,1", "--a", "base", "--b", "alpha:1:0")
    assert code == 0
    results = json.loads(out)["results"]
    assert results["verdict"] == "not-conjugate"
    assert results["invariant"] == "neutral_two_orbits"
    assert invoke("split", "distinguish", "--T", "1,1,1,1")[0] == 2


def test_split_constraint_violation_is_input_error():
    code, _, err = invoke("split", "make", "--T", "1,1,1,1", "--variant", "alpha", "--delta-sub", "1")
    assert code == 2 and "delta_super + T_ab - delta_sub > 0" in err


def test_command_and_set_aliases(dyck_file):
    alias = invoke("--json", "section5", "make", "--T", "1,1,1,1", "--variant", "alpha", "--delta-super", "1")
    canonical = invoke("--json", "split", "make", "--T", "1,1,1,1", "--variant", "alpha", "--delta-super", "1")
    assert alias == canonical
    assert json.loads(alias[1])["command"] == "split"
    assert invoke("conditions", dyck_file, "--set", "thm23")[1] == invoke("conditions", dyck_file, "--set", "context")[1]
