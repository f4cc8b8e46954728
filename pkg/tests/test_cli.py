"""Command line surface: outputs, exit codes, determinism."""
from __future__ import annotations

import json

import pytest

import epcouple.cli as cli
from epcouple.cli import main
from epcouple.fixtures import fixture_text


@pytest.fixture
def files(tmp_path):
    def write(name, text=None):
        path = tmp_path / name
        path.write_text(text if text is not None else fixture_text(name.removesuffix(".json")))
        return str(path)
    return write


def broken_line() -> str:
    data = json.loads(fixture_text("line"))
    data["core"]["edges"] = [{"id": "bad", "tail": "c", "head": "ghost"}]
    return json.dumps(data)


def test_validate_ok(files, capsys):
    assert main(["validate", files("line.json")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("ok: period 1; 2 ends in 2 orbits")


def test_validate_broken_names_the_edge(files, capsys):
    path = files("broken.json", broken_line())
    assert main(["validate", path]) == 2
    diag = json.loads(capsys.readouterr().err)
    assert diag["error"] == "InvalidPresentation"
    assert "'bad'" in diag["detail"]
    assert diag["exit"] == 2


def test_missing_file_is_invalid_input(capsys):
    assert main(["validate", "nosuch.json"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "FileNotFoundError"


def test_unroll_writes_dot(files, tmp_path, capsys):
    dot = tmp_path / "t.dot"
    assert main(["unroll", files("line.json"), "-n", "3", "--dot", str(dot)]) == 0
    assert "7 vertices, 6 edges" in capsys.readouterr().out
    assert dot.read_text().startswith("digraph truncation {")


def test_boundary_summary_is_frozen(files, capsys):
    assert main(["boundary", files("fig1.json"), "--sign", "-"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "1 component; 1 joining edge; subdivision 2"
    assert lines[1] == "  E1: chi -2; joining e_; subgraph a_ b_ c_ d_ f_"


def test_positive_boundary_has_two_components(files, capsys):
    assert main(["boundary", files("fig1.json"), "--sign", "+"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "2 components; 3 joining edges; subdivisions 2, 2, 1"


def test_inspect_blocks_lists_seven_blocks(files, capsys):
    assert main(["inspect", files("line.json"), "blocks", "-n", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 7
    assert lines[3] == "B0 (core): 1 vertices, 0 edges"


def test_inspect_tree_reports_invariance(files, capsys):
    assert main(["inspect", files("fig1.json"), "tree"]) == 0
    out = capsys.readouterr().out
    assert "critical +E3: C1" in out
    assert "shift invariant: yes" in out


def test_inspect_folds_ends_with_the_verdict(files, capsys):
    assert main(["inspect", files("fig1.json"), "folds"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "verdict: HE"


def test_fold_json_report(files, capsys):
    assert main(["fold", files("fig1.json"), "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] is True
    assert report["failure"] is None
    assert report["terminal_kind"] == "homeomorphism"
    assert len(report["steps"]) == 22
    assert all(st["kind"] == "type1" for st in report["steps"])


def test_fold_finite_type2_exits_3(files, capsys):
    graph = {"vertices": ["u", "v"],
             "edges": [{"id": "a", "tail": "u", "head": "v"},
                       {"id": "b", "tail": "u", "head": "v"}]}
    path = files("squash.json", json.dumps(
        {"domain": graph, "codomain": graph,
         "vertices": {"u": "u", "v": "v"},
         "edges": {"a": ["a"], "b": ["a"]}}))
    assert main(["fold", "--finite", path]) == 3
    out = capsys.readouterr().out
    assert "type2 a ~ b" in out
    assert out.splitlines()[-1].startswith("verdict: NOT-HE")


def test_fold_without_input_errors(capsys):
    with pytest.raises(SystemExit):
        main(["fold"])


def test_invert_emits_a_valid_presentation(files, tmp_path, capsys):
    out = tmp_path / "inv.json"
    assert main(["invert", files("line.json"), "-o", str(out)]) == 0
    assert "basepoint c" in capsys.readouterr().out
    assert main(["validate", str(out)]) == 0


def test_collapse_emits_a_valid_presentation(files, tmp_path):
    out = tmp_path / "coll.json"
    assert main(["collapse", files("fig1.json"), "-o", str(out)]) == 0
    assert main(["validate", str(out)]) == 0


def test_couple_present_oracle_chain(files, tmp_path, capsys):
    line = files("line.json")
    inv = tmp_path / "inv.json"
    theta = tmp_path / "theta.json"
    assert main(["invert", line, "-o", str(inv)]) == 0
    assert main(["couple", line, str(inv), "--canonical",
                 "-m", "2", "-o", str(theta)]) == 0
    capsys.readouterr()

    assert main(["present", str(theta)]) == 0
    assert capsys.readouterr().out == (
        "rank: 1\n"
        "monodromy:\n"
        "  x1 -> x1\n"
        "certificates: constituents=HE, f=HE, boundary=INJ(k<=8), oracle=OK\n"
    )

    assert main(["oracle-check", str(theta)]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "agreement: 10/10"


def test_couple_needs_a_gluing_choice(files, tmp_path):
    with pytest.raises(SystemExit):
        main(["couple", files("line.json"), files("line.json"),
              "-o", str(tmp_path / "x.json")])


def test_couple_cutoff_too_small_exits_4(files, tmp_path, capsys):
    line = files("line.json")
    inv = tmp_path / "inv.json"
    assert main(["invert", line, "-o", str(inv)]) == 0
    rc = main(["couple", line, str(inv), "--canonical", "-m", "1",
               "-o", str(tmp_path / "x.json")])
    assert rc == 4
    assert json.loads(capsys.readouterr().err)["error"] == "CutoffTooSmall"


def test_couple_from_h_file_matches_canonical(files, tmp_path, capsys):
    from epcouple.coupling import canonical_h
    from epcouple.fixtures import load_fixture
    from epcouple.homotopy import homotopy_inverse

    line = files("line.json")
    pres = load_fixture("line")
    inv = homotopy_inverse(pres)
    inv_path = tmp_path / "inv.json"
    inv_path.write_text(inv.presentation.to_json())
    h_path = tmp_path / "h.json"
    h_path.write_text(canonical_h(pres, inv).to_json())

    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["couple", line, str(inv_path), "--canonical",
                 "-m", "2", "-o", str(a)]) == 0
    assert main(["couple", line, str(inv_path), "--h", str(h_path),
                 "-m", "2", "-o", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_embed_line_is_deterministic(files, tmp_path, capsys):
    line = files("line.json")
    assert main(["embed", line, "-o", str(tmp_path / "a")]) == 0
    first = capsys.readouterr().out
    assert first.startswith("rank: 1\nmonodromy:\n  x1 -> x1\n")
    assert main(["embed", line, "-o", str(tmp_path / "b")]) == 0
    for name in ("line.theta.json", "line.presentation.txt",
                 "line.certificates.json"):
        assert ((tmp_path / "a" / name).read_text()
                == (tmp_path / "b" / name).read_text())
    certs = json.loads((tmp_path / "a" / "line.certificates.json").read_text())
    assert certs["rank"] == 1
    assert certs["constituents"] == [True, True]
    assert certs["first_return"] is True
    assert certs["oracle"] is True
    assert all(certs["boundary"].values())


def test_embed_fig1_certifies(files, tmp_path, capsys):
    assert main(["embed", files("fig1.json"), "-o", str(tmp_path / "out")]) == 0
    out = capsys.readouterr().out
    assert "rank: 44" in out
    assert "certificates: constituents=HE, f=HE, boundary=INJ(k<=8), oracle=OK" in out


def test_embed_broken_exits_2(files, capsys):
    path = files("broken.json", broken_line())
    assert main(["embed", path]) == 2
    assert "'bad'" in json.loads(capsys.readouterr().err)["detail"]


def test_oracle_disagreement_exits_5(files, tmp_path, capsys, monkeypatch):
    line = files("line.json")
    inv = tmp_path / "inv.json"
    theta = tmp_path / "theta.json"
    assert main(["invert", line, "-o", str(inv)]) == 0
    assert main(["couple", line, str(inv), "--canonical",
                 "-m", "2", "-o", str(theta)]) == 0

    class Stub:
        def agreed(self):
            return False

        def describe(self):
            return "agreement: 9/10\n"

    monkeypatch.setattr(cli, "first_return_oracle", lambda t, depth=None: Stub())
    assert main(["oracle-check", str(theta)]) == 5


def test_seed_env_var_keeps_the_verdict(files, capsys, monkeypatch):
    monkeypatch.setenv("EPCOUPLE_SEED", "7")
    assert main(["fold", files("fig1.json")]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "verdict: HE"
