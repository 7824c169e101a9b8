import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
import random

from corpus import NARROW, WIDE, FormulaGen
from hxtab.semantics import check_node, frame_of
from hxtab.syntax import At, Nom, parse_node
from hxtab.tableau import (FrameClass, NaiveEngine, Options, Sat, Tracer, Unknown,
                           Unsat, analyticity_violations, applicable_instances, apply,
                           generated_edges, init, maxsize, root_label, saturate,
                           termination_violations, urfather)

MERGE = parse_node("<a><@2 b (2)? =c b (q & 3)?>")
SELF_LOOP = parse_node("<@0 a (0)? =c (p)?>")


def test_root_label_uses_next_nominal():
    assert root_label(MERGE) == At(4, MERGE)
    assert root_label(parse_node("p")).nom == 0


def test_merged_model():
    r = saturate(MERGE)
    assert isinstance(r, Sat)
    m = r.model
    assert sorted(m.nodes) == [2, 3, 4, 5]
    assert m.edges == {"a": {(4, 5)}, "b": {(5, 3), (2, 2)}}
    assert [c for c in m.data["c"] if len(c) > 1] == [{2, 3}]
    assert m.valuation == {"q": {3}}
    assert urfather(r.branch, 7) == 3 and urfather(r.branch, 6) == 2
    assert check_node(m, m.named(4), MERGE)


def test_first_steps():
    b = init(parse_node("p & !p"))
    rules = sorted(i.rule for i in applicable_instances(b))
    assert rules == ["and", "ref"]
    [inst] = [i for i in applicable_instances(b) if i.rule == "and"]
    [nb] = apply(b, inst)
    assert nb.clash
    assert not b.clash


def test_propositional_clash():
    r = saturate(parse_node("<a>p & [a]!p"))
    assert isinstance(r, Unsat)
    assert r.clashes[-1].describe() == "PropClash {1:p, 1:!p}"


@pytest.mark.parametrize("text, verdict", [
    ("p", "SAT"),
    ("p & !p", "UNSAT"),
    ("0 & 1 & 0:p & 1:!p", "UNSAT"),
    ("<a>0 & <b>0 & 0:p", "SAT"),
    ("<a =c b> & [a !=c b]", "UNSAT"),
    ("<@0 =c @1> & <@1 =c @2> & <@0 !=c @2>", "UNSAT"),
    ("<a (p)? =c a (!p)?> & [a]<@1 !=c @1>", "UNSAT"),
])
def test_small_verdicts(text, verdict):
    assert saturate(parse_node(text)).name == verdict


def test_self_loop_by_frame():
    r = saturate(SELF_LOOP)
    assert isinstance(r, Sat)
    node = r.model.named(0)
    assert (node, node) in r.model.edges["a"]
    for frame in (FrameClass.FOREST, FrameClass.TREE):
        r = saturate(SELF_LOOP, frame=frame)
        assert isinstance(r, Unsat)
        assert r.clashes[-1].describe() == "LoopClash {0:<+>0}"


def test_two_parents_under_forest():
    phi = parse_node("<a>0 & 1:<a>0 & !1")
    assert saturate(phi).name == "SAT"
    assert saturate(phi, frame=FrameClass.FOREST).name == "UNSAT"


def test_tree_needs_connection():
    phi = parse_node("1:<a>2 & !<a>1")
    assert saturate(phi, frame=FrameClass.FOREST).name == "SAT"
    r = saturate(phi, frame=FrameClass.TREE)
    if isinstance(r, Sat):
        assert frame_of(r.model).is_tree


def test_step_budget():
    r = saturate(parse_node("<a>p"), max_steps=2)
    assert isinstance(r, Unknown)
    assert "budget" in r.reason


def test_maxsize_decreases_along_generated_edges():
    r = saturate(parse_node("<a><a>p"))
    assert generated_edges(r.branch) == [(0, 1), (1, 2)]
    assert [maxsize(r.branch, i) for i in range(3)] == [3, 2, 1]
    assert termination_violations(r.branch) == []
    assert analyticity_violations(r.branch) == []


def test_tracer_records_rules():
    tr = Tracer()
    NaiveEngine(Options(), tr).saturate(parse_node("p & !p"))
    rules = [e["rule"] for e in tr.events]
    assert "∧" in rules
    assert tr.events[-1]["clash"]
    assert len(tr.lines()) == len(tr.events)


def test_strict_two_parent_mode_runs():
    eng = NaiveEngine(Options(frame=FrameClass.FOREST, strict_two_parent=True))
    assert eng.saturate(SELF_LOOP).name == "UNSAT"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([WIDE, NARROW]),
       st.sampled_from(list(FrameClass)))
def test_sat_models_satisfy_formula(seed, sig, frame):
    phi = FormulaGen(random.Random(seed), **sig).formula(10)
    r = saturate(phi, frame=frame)
    assert not isinstance(r, Unknown)
    if isinstance(r, Sat):
        m = r.model
        assert check_node(m, m.named(r.branch.root_nominal), phi)
        info = frame_of(m)
        if frame is FrameClass.FOREST:
            assert info.is_forest
        if frame is FrameClass.TREE:
            assert info.is_tree
        assert termination_violations(r.branch) == []
        assert analyticity_violations(r.branch) == []
