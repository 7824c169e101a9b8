import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hxtab.syntax import (And, At, Axis, Concat, DataCmp, Diamond, Jump, Neg, Nom,
                          ParseError, Prop, Union, concat, parse_file,
                          parse_node, parse_path, print_node, print_path, rename,
                          signature_of, size, subcomponents)
from hxtab.syntax import Test as Check

MERGE = "<a><@2 b (2)? =c b (q & 3)?>"


def test_merge_formula_parses_to_expected_tree():
    e = parse_node(MERGE)
    assert isinstance(e, Diamond) and e.rel == "a"
    cmp = e.body
    assert isinstance(cmp, DataCmp) and cmp.eq and cmp.cmp == "c"
    assert cmp.left == Concat((Jump(2), Axis("b"), Check(Nom(2))))
    assert cmp.right == Concat((Axis("b"), Check(And(Prop("q"), Nom(3)))))


def test_sizes():
    assert size(parse_node(MERGE)) == 15
    assert size(parse_node("!<a !=c @1>")) == 8
    assert size(parse_path("a (p)? @1")) == 4
    assert size(Prop("p")) == 1


def test_signature():
    sig = signature_of(parse_node(MERGE))
    assert sig.props == {"q"}
    assert sig.rels == ("a", "b")
    assert sig.cmps == ("c",)
    assert sig.noms == {2, 3}


@pytest.mark.parametrize("text, shown", [
    ("p -> q", "!(p & !q)"),
    ("p | q", "!(!p & !q)"),
    ("[a]p", "!<a>!p"),
    ("[a =c b]", "!<a !=c b>"),
    ("1:(p & !q)", "1:(p & !q)"),
    ("<e =price e e>", "<e =price e e>"),
])
def test_sugar(text, shown):
    assert print_node(parse_node(text)) == shown


def test_plain_diamond_over_composite_path_is_a_comparison():
    e = parse_node("<a U b>p")
    assert isinstance(e, DataCmp)
    assert e.left == e.right == concat(Union(Axis("a"), Axis("b")), Check(Prop("p")))


@pytest.mark.parametrize("text, where", [
    ("p &", "1:4"),
    ("<a +>p", "1:4"),
    ("p # q", "1:3"),
    ("U", "1:1"),
])
def test_parse_errors_carry_location(text, where):
    with pytest.raises(ParseError) as info:
        parse_node(text)
    assert str(info.value).startswith(where)


def test_parse_file_skips_comments_and_blanks():
    assert parse_file("# c\np\n\nq & r\n") == [Prop("p"), And(Prop("q"), Prop("r"))]


def test_rename():
    assert rename(parse_node("1:<a>2"), {1: 5}) == At(5, Diamond("a", Nom(2)))


def test_subcomponents_include_root():
    e = parse_node(MERGE)
    subs = subcomponents(e)
    assert e in subs
    assert len(subs) == 10


# -- round trip -----------------------------------------------------------------

props = st.sampled_from(["p", "q", "r"])
noms = st.integers(0, 4)
rels = st.sampled_from(["a", "b"])
cmps = st.sampled_from(["c", "d"])


def _paths(nodes):
    base = st.one_of(rels.map(Axis), noms.map(Jump), nodes.map(Check))
    return st.recursive(base, lambda ps: st.one_of(
        st.builds(Union, ps, ps),
        st.builds(concat, ps, ps)), max_leaves=4)


nodes = st.recursive(
    st.one_of(props.map(Prop), noms.map(Nom)),
    lambda ns: st.one_of(
        st.builds(Neg, ns),
        st.builds(And, ns, ns),
        st.builds(At, noms, ns),
        st.builds(Diamond, rels, ns),
        st.builds(DataCmp, _paths(ns), st.booleans(), cmps, _paths(ns))),
    max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(nodes)
def test_print_parse_round_trip(e):
    assert parse_node(print_node(e)) == e


@settings(max_examples=200, deadline=None)
@given(_paths(nodes))
def test_path_round_trip(p):
    assert parse_path(print_path(p)) == p
