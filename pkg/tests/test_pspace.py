import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import NARROW, WIDE, FormulaGen
from hxtab import pspace
from hxtab.frames import Extensions, NodeCreatingRule
from hxtab.pspace import (TYPE1, TYPE2, TYPE3, PspaceEngine, classify, root_literals,
                          rooted_boxes, sat_rec, strip_diamonds)
from hxtab.syntax import parse_node, size
from hxtab.tableau import FrameClass, Tracer, saturate

CROSS_CLASH = parse_node("<a (1 & p)? =c b> & <c @1 (!p)? =c b> & !<b !=c @1>")


def test_classify():
    assert classify("and") == TYPE1
    assert classify("notand") == TYPE2
    assert classify("dia") == TYPE3
    assert classify("◇") == TYPE3
    assert classify("child") == TYPE3
    with pytest.raises(KeyError):
        classify("nope")


def test_label_shapes():
    labels = [parse_node(s) for s in ("0:<a>p", "0:p", "0:!<a>q", "1:q")]
    assert [str(e) for e in strip_diamonds(labels)] == ["0:p", "0:!<a>q", "1:q"]
    assert [str(e) for e in root_literals(labels, [0])] == ["0:p"]
    assert [str(e) for e in rooted_boxes(labels, [0])] == ["0:!<a>q"]


def test_single_call():
    assert sat_rec([parse_node("0:(p & !p)")], 1) is False
    assert sat_rec([parse_node("0:<a>p")], 1) is True


def test_recursion_structure():
    tr = Tracer()
    eng = PspaceEngine(tracer=tr)
    assert eng.sat(CROSS_CLASH) is False
    assert eng.nominal_sequence == [2, 3, 4, 5]
    assert [str(w) for w in eng.clashes[-1].witnesses] == ["1:p", "1:!p"]
    calls = [(e["depth"], e["nominal"]) for e in tr.events if e["event"] == "call"]
    assert calls == [(0, 2), (1, 3), (2, 4), (1, 5)]
    # the first recursion merges its fresh nominal into 1
    copies = [e for e in tr.events if e["event"] == "rule" and e["depth"] == 1
              and e["rule"] == "copy₀"]
    assert copies[0]["conclusions"] == ["2:<a>1"]
    m = eng.metrics
    assert m.max_recursion_depth == 2
    assert m.rule_fires_by_type[TYPE3] == 3
    assert m.max_branch_len <= 4 * size(CROSS_CLASH) ** 2


def test_node_rules_are_rejected():
    rule = NodeCreatingRule.parse("forall $i exists $k . $i:<a>$k")
    with pytest.raises(NotImplementedError):
        PspaceEngine(extensions=Extensions(node_rules=[rule])).sat(parse_node("p"))


@pytest.mark.parametrize("frame", list(FrameClass))
def test_self_loop(frame):
    ok, _ = pspace.sat(parse_node("<@0 a (0)? =c (p)?>"), frame=frame)
    assert ok is (frame is FrameClass.ALL)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([WIDE, NARROW]),
       st.sampled_from(list(FrameClass)))
def test_agrees_with_naive_engine(seed, sig, frame):
    phi = FormulaGen(random.Random(seed), **sig).formula(12)
    ok, metrics = pspace.sat(phi, frame=frame)
    assert ok == (saturate(phi, frame=frame).name == "SAT")
    assert metrics.max_recursion_depth <= size(phi)
    assert metrics.max_branch_len <= 4 * size(phi) ** 2
