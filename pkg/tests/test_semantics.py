import json

import pytest

from hxtab.semantics import (DataModel, EvaluationError, check_node, check_path,
                             frame_of, load_model, validate_model)
from hxtab.syntax import parse_node, parse_path


@pytest.fixture
def merged_model():
    # the model extracted for MERGE; node ids are urfathers
    return DataModel(
        nodes=[2, 3, 4, 5],
        edges={"a": {(4, 5)}, "b": {(5, 3), (2, 2)}},
        data={"c": [{2, 3}]},
        valuation={"q": {3}},
        naming={2: 2, 3: 3, 4: 4, 5: 5, 6: 2, 7: 3})


def test_merge_formula_holds_at_root(merged_model):
    phi = parse_node("<a><@2 b (2)? =c b (q & 3)?>")
    assert check_node(merged_model, 4, phi)
    assert not check_node(merged_model, 5, phi)


def test_paths(merged_model):
    assert check_path(merged_model, 4, 5, parse_path("a"))
    assert check_path(merged_model, 4, 2, parse_path("a @2 b"))
    assert not check_path(merged_model, 4, 3, parse_path("a (p)? b"))
    assert check_path(merged_model, 5, 3, parse_path("(a U b) (q)?"))


def test_missing_class_entries_are_singletons(merged_model):
    assert check_node(merged_model, 4, parse_node("<a !=c @3>"))
    assert check_node(merged_model, 2, parse_node("<@2 =c @3>"))
    assert not check_node(merged_model, 2, parse_node("<@2 =d @3>"))


def test_unnamed_nominal_is_an_error(merged_model):
    with pytest.raises(EvaluationError):
        check_node(merged_model, 4, parse_node("9"))


def test_json_round_trip(tmp_path, merged_model):
    path = tmp_path / "m.json"
    path.write_text(json.dumps(merged_model.to_json()))
    back = load_model(str(path))
    phi = parse_node("<a><@2 b (2)? =c b (q & 3)?>")
    assert check_node(back, back.named(4), phi)
    assert validate_model(back) == []


def test_validate_model_reports_problems():
    m = DataModel(nodes=[0, 1], edges={"a": {(0, 2)}}, data={"c": [{0, 1}, {1}]},
                  naming={0: 5})
    problems = validate_model(m)
    assert any("edges[a]" in p for p in problems)
    assert any("two classes" in p for p in problems)
    assert any("naming[0]" in p for p in problems)


def test_frame_of():
    chain = DataModel(nodes=[0, 1, 2], edges={"a": {(0, 1)}, "b": {(1, 2)}})
    info = frame_of(chain)
    assert info.is_forest and info.is_tree and info.tree_root == 0

    two_roots = DataModel(nodes=[0, 1, 2], edges={"a": {(0, 1)}})
    info = frame_of(two_roots)
    assert info.is_forest and not info.is_tree

    loop = DataModel(nodes=[0], edges={"a": {(0, 0)}})
    assert not frame_of(loop).is_forest

    shared_child = DataModel(nodes=[0, 1, 2], edges={"a": {(0, 2), (1, 2)}})
    assert not frame_of(shared_child).is_forest

    # parents are counted as nodes over the union of the relations
    double = DataModel(nodes=[0, 1], edges={"a": {(0, 1)}, "b": {(0, 1)}})
    assert frame_of(double).is_tree
