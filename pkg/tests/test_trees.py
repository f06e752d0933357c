import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cklax.claims import otter_counts
from cklax.trees import (
    CHERRY,
    DOT,
    LADDER2,
    LADDER3,
    Forest,
    HopfElement,
    RootedTree,
    antipode,
    coproduct,
    counit,
    enumerate_forests,
    enumerate_trees,
    flipped_coproduct,
    grading_Y,
    hopf_axiom_failures,
    tree_coproduct,
)


# -- brute-force oracles, independent of the recursive code ----------------------------------------

def _canonical(children, node):
    return "[" + "".join(sorted(_canonical(children, c) for c in children[node])) + "]"


def _brute_force_counts(n_max):
    # every recursive labelling (parent[i] < i) reaches every unlabelled tree
    counts = []
    for n in range(1, n_max + 1):
        seen = set()
        for parents in itertools.product(*[range(i) for i in range(1, n)]):
            children = {i: [] for i in range(n)}
            for i, p in enumerate(parents, 1):
                children[p].append(i)
            seen.add(_canonical(children, 0))
        counts.append(len(seen))
    return counts


def _nodes(tree):
    # flatten to (children lists); node 0 is the root
    children = {}

    def walk(t):
        idx = len(children)
        children[idx] = []
        for c in t.children:
            children[idx].append(walk(c))
        return idx

    walk(tree)
    return children


def _admissible_cut_coproduct(tree):
    children = _nodes(tree)
    parent = {c: p for p, cs in children.items() for c in cs}

    def ancestors(v):
        while v in parent:
            v = parent[v]
            yield v

    out = {(Forest([tree]), Forest()): 1}
    edges = sorted(parent)
    for r in range(len(edges) + 1):
        for cut in itertools.combinations(edges, r):
            cutset = set(cut)
            if any(a in cutset for v in cut for a in ancestors(v)):
                continue
            pruned = Forest(RootedTree.parse(_canonical(children, v)) for v in cut)

            def trunk(v):
                return "[" + "".join(sorted(trunk(c) for c in children[v] if c not in cutset)) + "]"

            key = (pruned, Forest([RootedTree.parse(trunk(0))]))
            out[key] = out.get(key, 0) + 1
    return out


# -- enumeration ---------------------------------------------------------------------------------------

def test_tree_counts_three_ways():
    enumerated = [sum(1 for t in enumerate_trees(7) if t.degree == d) for d in range(1, 8)]
    assert enumerated == otter_counts(7) == _brute_force_counts(7)
    assert enumerated == [1, 1, 2, 4, 9, 20, 48]


def test_enumeration_is_sorted_and_canonical():
    ts = enumerate_trees(5)
    assert ts == sorted(ts, key=RootedTree.sort_key)
    assert len({t.code for t in ts}) == len(ts)
    for t in ts:
        assert RootedTree.parse(t.code) == t


def test_enumerate_rejects_bad_degree():
    with pytest.raises(ValueError):
        enumerate_trees(0)


def test_children_order_does_not_matter():
    assert RootedTree.parse("[[][[]]]") == RootedTree.parse("[[[]][]]")
    assert Forest.parse("[],[[]]") == Forest.parse("[[]],[]")
    assert str(Forest()) == "1"


@pytest.mark.parametrize("bad", ["", "[", "[]]", "[x]", "[][]"])
def test_parse_rejects_malformed(bad):
    with pytest.raises(ValueError):
        RootedTree.parse(bad)


# -- coproduct ------------------------------------------------------------------------------------------

def test_coproduct_matches_admissible_cuts_up_to_degree_six():
    for t in enumerate_trees(6):
        got = {k: int(v) for k, v in tree_coproduct(t).items()}
        assert got == _admissible_cut_coproduct(t), t.code


def test_small_coproducts():
    assert tree_coproduct(LADDER3) == {
        (Forest([LADDER3]), Forest()): 1,
        (Forest(), Forest([LADDER3])): 1,
        (Forest([DOT]), Forest([LADDER2])): 1,
        (Forest([LADDER2]), Forest([DOT])): 1,
    }
    cherry = tree_coproduct(CHERRY)
    assert cherry[(Forest([DOT]), Forest([LADDER2]))] == 2
    assert cherry[(Forest([DOT, DOT]), Forest([DOT]))] == 1


def test_right_factor_is_a_single_tree():
    for t in enumerate_trees(6):
        for _, right in tree_coproduct(t):
            assert len(right) <= 1


def test_small_antipodes():
    one = lambda *items: HopfElement.of(*items)  # noqa: E731
    assert antipode(one(DOT)) == -one(DOT)
    assert antipode(one(LADDER2)) == -one(LADDER2) + one(Forest([DOT, DOT]))
    expected = -one(CHERRY) + one(Forest([DOT, LADDER2])) * 2 - one(Forest([DOT, DOT, DOT]))
    assert antipode(one(CHERRY)) == expected
    expected = -one(LADDER3) + one(Forest([DOT, LADDER2])) * 2 - one(Forest([DOT, DOT, DOT]))
    assert antipode(one(LADDER3)) == expected


def test_hopf_axioms_degree_six():
    forests = enumerate_forests(6)
    pairs = [(a, b) for a in forests for b in forests if a and b and a.degree + b.degree <= 6]
    assert hopf_axiom_failures(6, pairs) == []


def test_flipped_orientation_is_still_a_hopf_algebra():
    # the flip is only visible through the Lie brackets, not the axioms
    with flipped_coproduct():
        assert hopf_axiom_failures(5) == []
        assert tree_coproduct(CHERRY)[(Forest([LADDER2]), Forest([DOT]))] == 2
    assert (Forest([DOT]), Forest([LADDER2])) in tree_coproduct(CHERRY)


forests5 = st.sampled_from([f for f in enumerate_forests(5) if f])


@settings(max_examples=40, deadline=None)
@given(forests5, forests5)
def test_coproduct_is_multiplicative(a, b):
    x, y = HopfElement.of(a), HopfElement.of(b)
    assert coproduct(x * y) == coproduct(x) * coproduct(y)


@settings(max_examples=40, deadline=None)
@given(forests5, forests5)
def test_grading_is_a_derivation_and_antipode_antimultiplicative(a, b):
    x, y = HopfElement.of(a), HopfElement.of(b)
    assert grading_Y(x * y) == grading_Y(x) * y + x * grading_Y(y)
    assert antipode(x * y) == antipode(x) * antipode(y)


@settings(max_examples=40, deadline=None)
@given(forests5)
def test_counit_and_antipode_laws(a):
    x = HopfElement.of(a)
    d = coproduct(x)
    assert d.map_left(antipode).multiply() == HopfElement.one() * counit(x)
    assert d.map_right(antipode).multiply() == HopfElement.one() * counit(x)
    assert counit(x) == 0
    assert counit(HopfElement.one()) == 1
