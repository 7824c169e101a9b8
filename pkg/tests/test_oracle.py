import random
from math import comb

import pytest

from corpus import NARROW, FormulaGen
from hxtab.oracle import (Bound, NoModelUpTo, TimedOut, Witness, bounded_sat,
                          count_structures, cross_check, default_bound,
                          restricted_growth)
from hxtab.semantics import check_node
from hxtab.syntax import parse_node, size_node
from hxtab.tableau import FrameClass, saturate

SELF_LOOP = parse_node("<@0 a (0)? =c (p)?>")


def bell(n):
    # recurrence B(n+1) = sum C(n, k) B(k), independent of the enumerator
    b = [1]
    for m in range(n):
        b.append(sum(comb(m, k) * b[k] for k in range(m + 1)))
    return b[n]


def test_contradiction():
    assert bounded_sat(parse_node("p & !p"), 3) == NoModelUpTo(3)


def test_self_loop_witness():
    ans = bounded_sat(SELF_LOOP, Bound(2))
    assert isinstance(ans, Witness)
    m = ans.model
    assert m.nodes == [0]
    assert m.edges == {"a": {(0, 0)}}
    assert m.valuation == {"p": {0}}
    assert m.naming == {0: 0}


@pytest.mark.parametrize("frame", [FrameClass.FOREST, FrameClass.TREE])
def test_self_loop_has_no_forest_model(frame):
    assert bounded_sat(SELF_LOOP, 3, frame=frame) == NoModelUpTo(3)


def test_price_chain():
    phi = parse_node("<e =price e e>")
    assert isinstance(bounded_sat(phi, 4), Witness)
    ans = bounded_sat(phi, 4, frame=FrameClass.FOREST)
    assert ans.model.edges == {"e": {(0, 1), (1, 2)}}
    assert check_node(ans.model, 0, phi)


def test_deterministic():
    phi = parse_node("<a>(p & <b>q) & 0:<b>!p")
    assert bounded_sat(phi, 3) == bounded_sat(phi, 3)


def test_timeout():
    ans = bounded_sat(parse_node("<a>p & [a]!p & <b>q"), 6, max_seconds=0.05)
    assert isinstance(ans, TimedOut)
    assert ans.nodes_done < 6


def test_bound_validation():
    with pytest.raises(ValueError):
        Bound(0)
    with pytest.raises(ValueError):
        bounded_sat(parse_node("p"), 0)


def test_default_bound():
    assert default_bound(parse_node("p")) == 3
    assert default_bound(parse_node("0:<a><a><a>1")) == 5


@pytest.mark.parametrize("n", range(6))
def test_partitions_count_bell_numbers(n):
    assert sum(1 for _ in restricted_growth(n)) == bell(n)


@pytest.mark.parametrize("n, rels, cmps", [(1, 1, 1), (2, 1, 1), (2, 2, 1), (2, 1, 2)])
def test_structure_count_closed_form(n, rels, cmps):
    assert count_structures(n, rels, cmps) == 2 ** (rels * n * n) * bell(n) ** cmps


def test_cross_check():
    phi = parse_node("p & !p")
    assert cross_check(phi, saturate(phi))["consistent"]
    phi = parse_node("p")
    report = cross_check(phi, saturate(phi))
    assert report["consistent"]
    assert "satisfies" in report["detail"]


def test_cross_check_sweep():
    rng = random.Random(99)
    gen = FormulaGen(rng, **NARROW)
    bad, done = [], 0
    while done < 500:
        phi = gen.formula(rng.randint(3, 12))
        if size_node(phi) > 12:
            continue
        done += 1
        report = cross_check(phi, saturate(phi), Bound(3))
        if not report["consistent"]:
            bad.append((str(phi), report["detail"]))
    assert bad == []
