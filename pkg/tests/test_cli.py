import io
import json
import subprocess
import sys

import pytest

from hxtab.cli import main

MERGE = "<a><@2 b (2)? =c b (q & 3)?>"
CROSS_CLASH = "<a (1 & p)? =c b> & <c @1 (!p)? =c b> & !<b !=c @1>"
SELF_LOOP = "<@0 a (0)? =c (p)?>"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_sat_prints_model():
    code, text = run("sat", "p")
    assert code == 10
    assert text.splitlines()[:3] == ["SAT", "nodes: 0", "p: 0"]


def test_pspace_cross_clash():
    code, text = run("sat", "-e", "pspace", "--metrics", CROSS_CLASH)
    assert code == 20
    lines = text.splitlines()
    assert lines[0] == "UNSAT"
    assert json.loads(lines[1])["max_recursion_depth"] == 2


def test_tree_self_loop():
    assert run("sat", "--frame", "tree", SELF_LOOP)[0] == 20
    assert run("sat", SELF_LOOP)[0] == 10


def test_json_output():
    code, text = run("sat", "--format", "json", "p & !p")
    doc = json.loads(text)
    assert code == 20
    assert doc["verdict"] == "UNSAT"
    assert doc["clash"] == "PropClash {0:p, 0:!p}"


def test_dot_output():
    code, text = run("sat", "--format", "dot", SELF_LOOP)
    assert code == 10
    assert '"0" -> "0" [label="a"];' in text
    assert "style=dashed" in text


def test_model_then_check(tmp_path):
    path = tmp_path / "m.json"
    assert run("model", MERGE, "-o", str(path))[0] == 10
    doc = json.loads(path.read_text())
    assert doc["nodes"] == ["2", "3", "4", "5"]
    assert doc["data"] == {"c": [["2", "3"]]}
    assert doc["naming"]["7"] == "3" and doc["naming"]["6"] == "2"
    assert run("check", str(path), MERGE) == (0, "true\n")
    assert run("check", str(path), "<a>q")[0] == 2


def test_trace_stream():
    code, text = run("trace", "p & !p")
    lines = [json.loads(x) for x in text.splitlines()]
    assert code == 20
    assert lines[-1] == {"verdict": "UNSAT"}
    assert any(e.get("rule") == "∧" for e in lines)


def test_oracle():
    assert run("oracle", "p & !p", "--bound", "3") == (20, "NO MODEL up to 3 nodes\n")
    code, text = run("oracle", SELF_LOOP, "--bound", "2")
    assert code == 10 and text.startswith("WITNESS at node 0")


def test_formula_file(tmp_path):
    f = tmp_path / "phi.txt"
    f.write_text("# two lines, conjoined\np\n!p\n")
    assert run("sat", str(f))[0] == 20


def test_axioms_flag(tmp_path):
    ax = tmp_path / "du.ax"
    ax.write_text("<@$i =c @$j> -> $i:$j\n")
    phi = "<@1 =c @2> & 1:!2"
    assert run("sat", phi)[0] == 10
    assert run("sat", "--axioms", str(ax), phi)[0] == 20
    assert run("sat", "-e", "pspace", "--axioms", str(ax), phi)[0] == 20


def test_budget_gives_unknown(tmp_path):
    rules = tmp_path / "fresh.ax"
    rules.write_text("forall $i exists $k . <@$i !=c @$k>\n")
    code, text = run("sat", "--node-rules", str(rules), "--node-rule-budget", "3", "p")
    assert code == 30
    assert text.startswith("UNKNOWN: ")


def test_parse_error(capsys):
    assert run("sat", "<a>p & (")[0] == 1
    assert "parse error at 1:9" in capsys.readouterr().err


def test_env_default(monkeypatch):
    monkeypatch.setenv("HXTAB_FRAME", "forest")
    assert run("sat", SELF_LOOP)[0] == 20
    assert run("sat", "--frame", "all", SELF_LOOP)[0] == 10


@pytest.mark.parametrize("engine", ["naive", "pspace"])
def test_console_script_exit_code(engine):
    proc = subprocess.run([sys.executable, "-m", "hxtab.cli", "sat", "-e", engine, "p"],
                          capture_output=True, text=True)
    assert proc.returncode == 10
    assert proc.stdout.startswith("SAT")
