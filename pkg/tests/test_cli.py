import json

import pytest

from semigeneric.cli import parse_u, parse_v, run, UsageError

from conftest import FIG_LEFT


@pytest.fixture
def graph_file(tmp_path):
    def write(edges, vertices=range(4), name="g.json"):
        path = tmp_path / name
        path.write_text(json.dumps({"vertices": list(vertices), "edges": edges}))
        return str(path)

    return write


def call(capsys, *argv):
    code = run(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_validate_good(graph_file, capsys, tmp_path):
    dot = tmp_path / "g.dot"
    code, out = call(capsys, "validate", graph_file(FIG_LEFT), "--dot", str(dot))
    assert code == 0 and out["valid"] is True
    assert out["columns"] == [[0, 1], [2, 3]]
    assert dot.read_text().startswith("digraph")


def test_validate_parity_odd(graph_file, capsys):
    code, out = call(capsys, "validate", graph_file([[0, 2], [0, 3], [1, 2], [3, 1]]))
    assert code == 1
    assert out == {"valid": False, "violation": {"kind": "parity", "witness": [0, 1, 2, 3]}}


def test_validate_malformed(graph_file, capsys):
    code, out = call(capsys, "validate", graph_file([[0, 0]]))
    assert code == 1 and out["valid"] is False and "SelfLoop" in out["error"]


def test_usage_errors(graph_file, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    for argv in (
        ["validate", str(bad)],
        ["validate", str(tmp_path / "missing.json")],
        ["generate", "--steps", "5"],
        ["measure", graph_file(FIG_LEFT), "--mc", "10"],
        ["measure", graph_file(FIG_LEFT), "--u", "0,x"],
        ["measure", graph_file(FIG_LEFT), "--u", "0,1;eps=1"],
        ["validate", graph_file(FIG_LEFT), "--max-vertices", "2"],
        ["expand", graph_file(FIG_LEFT)],
        ["bogus"],
    ):
        with pytest.raises(SystemExit) as info:
            run(argv)
        assert info.value.code == 2, argv
    err = capsys.readouterr().err
    assert "--seed" in err and "--u" in err and "--max-vertices" in err


def test_generate_is_reproducible(capsys, tmp_path):
    outputs = []
    for _ in range(2):
        assert run(["generate", "--steps", "500", "--demand-size", "2", "--seed", "7"]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    payload = json.loads(outputs[0])
    assert payload["saturated"] is True and payload["missing_demands"] == []
    out = tmp_path / "gen.json"
    assert run(["generate", "--steps", "500", "--seed", "7", "--out", str(out)]) == 0
    assert json.loads(out.read_text()) == payload["graph"]
    assert json.loads(capsys.readouterr().out)["saturated"] is True


def test_generate_reports_missing(capsys):
    code, out = call(capsys, "generate", "--steps", "12", "--seed", "7")
    assert code == 0 and out["saturated"] is False and out["missing_demands"]


def test_expand_modes(graph_file, capsys, tmp_path):
    g = graph_file(FIG_LEFT)
    assert call(capsys, "expand", g, "--count")[1] == {"count": 16}
    code, out = call(capsys, "expand", g, "--enumerate")
    assert code == 0 and out["count"] == 16 == len(out["expansions"])
    code, again = call(capsys, "expand", g, "--enumerate", "--jobs", "2")
    assert again == out
    exp = tmp_path / "e.json"
    exp.write_text(json.dumps(out["expansions"][5]))
    assert call(capsys, "expand", g, "--check", str(exp)) == (0, {"valid": True})
    broken = dict(out["expansions"][5])
    broken["choices"] = [dict(broken["choices"][0], **{"class": [0]})]
    exp.write_text(json.dumps(broken))
    code, verdict = call(capsys, "expand", g, "--check", str(exp))
    assert code == 1 and verdict["valid"] is False and verdict["condition"] == "3b"


def test_measure_exact_and_mc(graph_file, capsys):
    g = graph_file(FIG_LEFT)
    assert call(capsys, "measure", g, "--u", "0,2;eps=1", "--exact") == (0, {"exact": "1/4", "mu0": "1/4"})
    assert call(capsys, "measure", g, "--v", "1,0")[1] == {"exact": "1/2", "mu0": "1/2"}
    assert call(capsys, "measure", g, "--u", "2,1;eps=0", "--v", "0,1")[1]["exact"] == "1/8"
    code, a = call(capsys, "measure", g, "--u", "0,2;eps=1", "--mc", "3000", "--seed", "4")
    _, b = call(capsys, "measure", g, "--u", "0,2;eps=1", "--mc", "3000", "--seed", "4", "--jobs", "2")
    assert code == 0 and a == b and a["n"] == 3000
    assert a["ci"][0] <= 0.25 <= a["ci"][1]


def test_selfcheck_small(capsys, monkeypatch):
    monkeypatch.setenv("SEMIGEN_LOG", "INFO")
    code = run(["selfcheck", "--max-vertices", "3", "--draws", "2000"])
    captured = capsys.readouterr()
    out = json.loads(captured.out)
    assert code == 0 and out["passed"] is True
    assert "u_cylinder_measure: pass" in captured.err
    assert {"u_cylinder_measure", "v_cylinder_measure", "product_identity", "partition", "rebase",
            "isomorphism_invariance", "intersect_U", "sampler_chi2"} <= set(out["identities"])


def test_parse_helpers():
    assert parse_u("3,0;eps=1").eps == (1,)
    assert parse_u("3,0,5;eps=101").eps == (1, 0, 1)
    assert parse_u("3").points == (3,)
    assert parse_v("1,2;4,5").tuples == ((1, 2), (4, 5))
    with pytest.raises(UsageError):
        parse_u("1,2;eps=2")
    with pytest.raises(UsageError):
        parse_u("1,2;foo=1")
