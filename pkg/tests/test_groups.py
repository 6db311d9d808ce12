from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from conftest import group
from oracles import subgroups_by_pairs

from fusionlink.errors import InvalidPermutation
from fusionlink.groups import (Permutation, all_subgroups, centralizer, enumerate_group, is_sylow, normalizer,
                               op_residual, subgroup_from_elements, sylow_subgroup, transporter)


def test_enumeration_orders():
    d8 = enumerate_group([Permutation.from_cycles(4, [(1, 2, 3, 4)], base=1),
                          Permutation.from_cycles(4, [(1, 3)], base=1)])
    s4 = enumerate_group([Permutation.from_cycles(4, [(1, 2, 3, 4)], base=1),
                          Permutation.from_cycles(4, [(1, 2)], base=1)])
    assert d8.order == 8
    assert s4.order == 24
    assert enumerate_group([], degree=3).order == 1


def test_identity_first_and_composition():
    G = group("s4")
    assert G.permutation(0).images == (0, 1, 2, 3)
    for a in range(G.order):
        for b in range(G.order):
            pa, pb = G.permutation(a).images, G.permutation(b).images
            assert G.permutation(G.mul(a, b)).images == tuple(pa[pb[x]] for x in range(4))


def test_invalid_permutation():
    with pytest.raises(InvalidPermutation):
        Permutation((0, 0, 1))


@pytest.mark.parametrize("name,count", [("d8", 10), ("c2", 2), ("v4", 5)])
def test_subgroup_counts(name, count):
    G = group(name)
    subs = all_subgroups(G.whole())
    assert len(subs) == count
    assert {H.element_set for H in subs} == subgroups_by_pairs(G, range(G.order))


def test_transporters():
    G = group("s4")
    S = sylow_subgroup(G, 2)
    c4 = next(H for H in all_subgroups(S) if H.order == 4 and any(G.element_order(x) == 4 for x in H.elements))
    T = transporter(G.whole(), c4, c4)
    assert len(T) == 8
    assert set(T) == normalizer(G.whole(), c4).element_set
    V = subgroup_from_elements(G, [x for x in range(G.order) if G.element_order(x) <= 2
                                   and G.permutation(x).images in {(0, 1, 2, 3), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0)}])
    assert set(transporter(G.whole(), V, V)) == set(range(G.order))
    klein = [H for H in all_subgroups(S) if H.order == 4 and H != c4]
    V2 = next(H for H in klein if H != V)
    assert transporter(S, V2, V) == ()


def test_centralizer_and_residual():
    G = group("s4")
    V = next(H for H in all_subgroups(sylow_subgroup(G, 2)) if H.order == 4 and all(
        G.permutation(x).images in {(0, 1, 2, 3), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0)} for x in H.elements))
    C = centralizer(G.whole(), V)
    assert C == V
    assert op_residual(C, 2).order == 1
    A = group("a4")
    V4 = sylow_subgroup(A, 2)
    assert op_residual(centralizer(A.whole(), V4), 2).order == 1


def test_sylow():
    for name, p, order in [("s4", 2, 8), ("s4", 3, 3), ("a4", 2, 4), ("a4", 3, 3), ("d8", 2, 8)]:
        G = group(name)
        S = sylow_subgroup(G, p)
        assert S.order == order
        assert is_sylow(G, S, p)


perms = st.integers(2, 5).flatmap(lambda n: st.lists(st.permutations(list(range(n))), min_size=0, max_size=3)
                                  .map(lambda gs: (n, gs)))


@settings(max_examples=40, deadline=None)
@given(perms)
def test_enumeration_is_a_group(data):
    n, gens = data
    G = enumerate_group([list(g) for g in gens], degree=n)
    elems = {G.permutation(i).images for i in range(G.order)}
    assert len(elems) == G.order
    for i in range(G.order):
        assert G.mul(i, G.inv(i)) == 0
        for g in gens:
            assert tuple(g[x] for x in G.permutation(i).images) in elems
    if G.order <= 24:
        for H in all_subgroups(G.whole()):
            assert G.order % H.order == 0
