from __future__ import annotations

import pytest
from conftest import fusion, linking

from fusionlink.errors import NotSubgroup
from fusionlink.fusion import FusionSystem, alperin_factorize, fusion_predicates
from fusionlink.groups import centralizer, normalizer, sylow_subgroup

KLEIN = {(0, 1, 2, 3), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0)}


def _normal_klein(F):
    G = F.G
    return next(P for P in F.subgroups if P.order == 4 and all(G.permutation(x).images in KLEIN for x in P.elements))


def _other_klein(F):
    G = F.G
    return next(P for P in F.subgroups if P.order == 4 and P != _normal_klein(F)
                and all(G.element_order(x) <= 2 for x in P.elements))


def test_aut_of_sylow_contains_inner():
    F = fusion("s4")
    S = F.S
    auts = F.aut(S)
    assert len(auts) == normalizer(F.G.whole(), S).order // centralizer(F.G.whole(), S).order
    inner = {tuple(F.G.conj(s, x) for x in S.elements) for s in S.elements}
    assert inner <= {f.table for f in auts}


def test_aut_of_normal_klein():
    F = fusion("s4")
    assert len(F.aut(_normal_klein(F))) == 6
    assert F.hom(_other_klein(F), _normal_klein(F)) == ()


def test_centrics():
    F = fusion("s4")
    orders = sorted(P.order for P in F.centric_objects)
    assert orders == [4, 4, 4, 8]
    assert all(P.order >= 4 for P in F.centric_objects)
    A = fusion("a4")
    assert [P.order for P in A.centric_objects] == [4]
    assert A.centric_objects[0] == A.S


def test_centric_oracle():
    # C_S(Q) <= Q for every F-conjugate Q, checked straight from the transporter definition
    for name in ("s4", "a4", "d8"):
        F = fusion(name)
        G = F.G
        for P in F.subgroups:
            conj = {frozenset(G.conj(g, x) for x in P.elements) for g in range(G.order)
                    if all(G.conj(g, x) in F.S.element_set for x in P.elements)}
            expect = all({s for s in F.S.elements if all(G.mul(s, y) == G.mul(y, s) for y in Q)} <= Q for Q in conj)
            assert F.is_centric(P) == expect


def test_predicates():
    F = fusion("s4")
    pred = fusion_predicates(F)
    assert pred.op_normal == _normal_klein(F)
    assert pred.constrained
    assert sorted(P.order for P in pred.weakly_closed) == [1, 4, 4, 4, 8]
    assert _normal_klein(F) in pred.weakly_closed
    A = fusion("a4")
    pa = fusion_predicates(A)
    assert pa.op_normal == A.S and pa.constrained


def test_not_sylow():
    F = fusion("s4")
    with pytest.raises(NotSubgroup):
        FusionSystem(F.G, _normal_klein(F), 2)


def test_alperin_trivial_cases():
    F, L = fusion("s4"), linking("s4")
    S = F.S
    incl = next(f for f in F.hom(S, S) if f.is_identity())
    assert alperin_factorize(F, L, incl).steps == ()
    for f in F.hom(S, S):
        dec = alperin_factorize(F, L, f)
        assert len(dec.steps) <= 1
        assert dec.recompose(L) == f.table


@pytest.mark.parametrize("reverse", [False, True])
def test_alperin_all_morphisms(reverse):
    F, L = fusion("s4"), linking("s4")
    centric = {P.element_set for P in F.centric_objects}
    noninner = 0
    for P in F.subgroups:
        for f in F.hom(P, F.S):
            dec = alperin_factorize(F, L, f, reverse=reverse)
            assert dec.recompose(L) == f.table
            for st in dec.steps:
                assert st.centric.element_set in centric
                assert st.source <= st.centric
            if f.witness not in F.S.element_set and f.table not in {
                    tuple(F.G.conj(s, x) for x in P.elements) for s in F.S.elements}:
                noninner += 1
                assert any(st.centric == _normal_klein(F) or st.centric.order == 4 for st in dec.steps)
    assert noninner > 0


def test_sylow_subgroup_used_is_canonical():
    F = fusion("s4")
    assert F.canonical(sylow_subgroup(F.G, 2)) == F.S
