from __future__ import annotations

import numpy as np
import pytest
from conftest import fusion, linking
from oracles import hom_to_cyclic_count

from fusionlink.cohomology import BarComplex
from fusionlink.errors import AxiomViolation, RelationViolated
from fusionlink.groups import centralizer, transporter
from fusionlink.linking import (LocalSystem, NerveComplex, build_linking_system, h1, h1_characters,
                                make_local_system, pi1_presentation, trivial_local_system, unipotent_local_system)

ORDER3 = np.array([[0, 1], [1, 1]])


def test_a4_single_object():
    L = linking("a4")
    assert len(L.objects) == 1
    assert len(L) == 12
    assert h1(L) == [3]


def test_s4_morphism_count():
    F = fusion("s4")
    L = linking("s4")
    assert len(L.objects) == 4
    total = sum(len(transporter(F.G.whole(), P, Q)) for P in L.objects for Q in L.objects)
    assert len(L) == total == 88
    pairs = sum(1 for P in L.objects for Q in L.objects if transporter(F.G.whole(), P, Q))
    assert pairs == 7


@pytest.mark.parametrize("name", ["s4", "a4", "d8"])
def test_axioms_and_projection_fibres(name):
    L = linking(name)
    assert L.check_axioms() == {"associativity": True, "A": True, "B": True, "C": True}
    G = L.G
    for i, P in enumerate(L.objects):
        z = centralizer(L.S, P).order
        for j, Q in enumerate(L.objects):
            fibres = {}
            for m in L.morphisms:
                if (m.source, m.target) == (i, j):
                    table = tuple(G.conj(m.rep, x) for x in P.elements)
                    fibres[table] = fibres.get(table, 0) + 1
            assert set(fibres.values()) <= {z}
            assert set(fibres) == {f.table for f in L.F.hom(P, Q)}


def test_objects_must_contain_sylow():
    F = fusion("s4")
    with pytest.raises(AxiomViolation):
        build_linking_system(F, objects=[F.centric_objects[0]])


def test_trivial_fusion_d8_h1_surjects_on_abelianization():
    L = linking("d8")
    assert len(L) == 56
    assert h1(L) == [2, 2]
    # delta_S composed with abelianization hits every character of D8
    orders, coords = h1_characters(L)
    s = L.obj(L.S)
    images = {tuple(int(c) % d for c, d in zip(coords[L.delta(s, s, x)], orders)) for x in L.S.elements}
    assert len(images) == hom_to_cyclic_count(L.G, 2)


def test_one_object_sylow():
    F = fusion("a4")
    B = build_linking_system(F, objects=[F.S])
    assert len(B) == 12 and h1(B) == [3]
    Fd = fusion("d8")
    Bd = build_linking_system(Fd, objects=[Fd.S])
    assert len(Bd) == 8 and h1(Bd) == [2, 2]


def test_relations_hold_for_local_systems():
    L = linking("d8")
    rho = unipotent_local_system(L, 2)
    assert not rho.is_trivial()
    pres = pi1_presentation(L)
    for g, f, h in pres.relations:
        assert np.array_equal(rho.rho[g] @ rho.rho[f] % 2, rho.rho[h])
    for t in pres.tree:
        assert np.array_equal(rho.rho[t], np.eye(2))


def test_order_three_local_system_on_a4():
    L = linking("a4")
    gen = next(k for k in L.aut_generators(L.S) if L.G.element_order(L.morphisms[k].rep) == 3)
    others = {k: np.eye(2, dtype=np.int64) for k in L.aut_generators(L.S) if k != gen}
    rho = make_local_system(L, 2, 1, 2, {gen: ORDER3, **others})
    assert all(np.array_equal(rho.rho[k], np.eye(2)) for k in range(len(L))
               if L.G.element_order(L.morphisms[k].rep) <= 2)
    with pytest.raises(RelationViolated):
        make_local_system(L, 2, 1, 2, {gen: np.array([[1, 1], [0, 1]]), **others})


def test_local_system_rejects_non_functor():
    L = linking("a4")
    rho = [np.array([[1, 1], [0, 1]])] * len(L)
    with pytest.raises(RelationViolated):
        LocalSystem(L, 2, 1, 2, rho)


def test_nerve_of_one_object_is_group_cohomology():
    F = fusion("d8")
    B = build_linking_system(F, objects=[F.S])
    for rho in (trivial_local_system(B, 2), unipotent_local_system(B, 2), trivial_local_system(B, 2, e=2)):
        nc = NerveComplex(rho, 4)
        cx = BarComplex(F.S, rho.module, 4)
        assert nc.check_d_squared()
        for k in range(4):
            assert nc.cohomology(k).invariant_factors == cx.cohomology(k).invariant_factors


def test_nerve_trivial_coefficients():
    L = linking("s4")
    nc = NerveComplex(trivial_local_system(L, 2), 2)
    assert nc.check_d_squared()
    assert nc.cohomology(0).invariant_factors == [2]
    dim1 = len(nc.cohomology(1).invariant_factors)
    assert 2**dim1 == hom_to_cyclic_count(L.G, 2)
    na = NerveComplex(trivial_local_system(linking("a4"), 2), 2)
    assert na.cohomology(1).invariant_factors == []


def test_to_json_roundtrip_shape():
    L = linking("a4")
    d = L.to_json()
    assert len(d["morphisms"]) == 12
    assert d["objects"] == [list(L.S.elements)]
