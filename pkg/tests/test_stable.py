from __future__ import annotations

import numpy as np
import pytest
from conftest import fusion, linking
from oracles import hom_to_cyclic_count

from fusionlink.biset import Biset, biset_class, characteristic_from_group
from fusionlink.errors import NonUnitScalar, NotNilpotent
from fusionlink.linking import (LocalSystem, build_linking_system, make_local_system, trivial_local_system,
                                unipotent_local_system)
from fusionlink.stable import (LocalSES, Workspace, biset_action, characteristic_idempotent, explore_conjecture,
                               idempotent_report, is_nilpotent, nilpotent_filtration, omega_endomorphism,
                               stable_elements, unipotent_ses, verify_delta_functor, verify_main)


def _omega(name):
    F = fusion(name)
    return characteristic_from_group(F.G, F.S)


def _order3(L):
    gen = next(k for k in L.aut_generators(L.S) if L.G.element_order(L.morphisms[k].rep) == 3)
    rest = {k: np.eye(2, dtype=np.int64) for k in L.aut_generators(L.S) if k != gen}
    return make_local_system(L, 2, 1, 2, {gen: np.array([[0, 1], [1, 1]]), **rest})


def test_stable_degree_one_matches_hom():
    for name in ("s4", "a4"):
        L = linking(name)
        ws = Workspace(trivial_local_system(L, 2), 3)
        st = stable_elements(ws, 1)
        assert 2 ** len(st.invariant_factors) == hom_to_cyclic_count(L.G, 2)
    ws = Workspace(trivial_local_system(linking("a4"), 2), 3)
    assert stable_elements(ws, 1).invariant_factors == []


@pytest.mark.parametrize("e", [1, 2])
def test_stable_modes_agree(e):
    ws = Workspace(trivial_local_system(linking("s4"), 2, e), 3)
    for k in range(3):
        subs = [stable_elements(ws, k, mode).submodule for mode in ("generators", "automorphisms", "all")]
        assert subs[0] == subs[1] == subs[2]


@pytest.mark.parametrize("e", [1, 2])
def test_omega_is_biset_action_for_trivial_coefficients(e):
    ws = Workspace(trivial_local_system(linking("s4"), 2, e), 3)
    Om = _omega("s4")
    for k in range(3):
        H = ws.HS(k)
        om = omega_endomorphism(Om, ws, k)
        assert np.array_equal(H.group.normalize(om.matrix), biset_action(Om, ws, k))


@pytest.mark.parametrize("twisted", [False, True])
def test_omega_on_stable_elements_is_ratio(twisted):
    L = linking("s4")
    rho = unipotent_local_system(L, 2) if twisted else trivial_local_system(L, 2, 2)
    ws = Workspace(rho, 3)
    Om = _omega("s4")
    for k in range(3):
        H = ws.HS(k)
        om = omega_endomorphism(Om, ws, k)
        sg = stable_elements(ws, k).generators
        assert om.ratio == 3
        assert np.array_equal(H.group.normalize(om.matrix @ sg), H.group.normalize(3 * sg))
        assert np.array_equal(H.group.normalize(om.normalized @ sg), H.group.normalize(sg))


def test_trivial_idempotent_has_exponent_one():
    ws = Workspace(trivial_local_system(linking("s4"), 2), 3)
    Om = _omega("s4")
    for k in range(3):
        ci = characteristic_idempotent(omega_endomorphism(Om, ws, k))
        assert ci.exponent == 1
        assert ci.image == stable_elements(ws, k).submodule


def test_identity_biset_gives_identity():
    F = fusion("d8")
    B = build_linking_system(F, objects=[F.S])
    ws = Workspace(unipotent_local_system(B, 2), 3)
    Om = Biset.of(biset_class(F.S, F.S, F.S, list(F.S.elements)))
    for k in range(3):
        om = omega_endomorphism(Om, ws, k)
        assert np.array_equal(om.normalized, np.eye(ws.HS(k).dimension, dtype=np.int64))
        ci = characteristic_idempotent(om)
        assert ci.exponent == 1 and np.array_equal(ci.matrix, om.normalized)


def test_non_unit_scalar():
    ws = Workspace(trivial_local_system(linking("s4"), 2), 2)
    with pytest.raises(NonUnitScalar):
        omega_endomorphism(2 * _omega("s4"), ws, 1)


@pytest.mark.parametrize("kind", ["f2", "z4", "unipotent"])
def test_idempotent_report_s4(kind):
    L = linking("s4")
    rho = {"f2": trivial_local_system(L, 2), "z4": trivial_local_system(L, 2, 2),
           "unipotent": unipotent_local_system(L, 2)}[kind]
    rep = idempotent_report(rho, _omega("s4"), 2)
    assert rep["pass"], rep


def test_nilpotent_filtrations():
    assert nilpotent_filtration(trivial_local_system(linking("s4"), 2)).length == 1
    filt = nilpotent_filtration(unipotent_local_system(linking("d8"), 2))
    assert filt.length == 2
    assert filt.stages[1].order() == 2
    assert filt.stages[1].contains(np.array([1, 0]))
    with pytest.raises(NotNilpotent) as exc:
        nilpotent_filtration(_order3(linking("a4")))
    assert exc.value.stage == 0
    assert not is_nilpotent(_order3(linking("a4")))


def test_verify_main_small_cases():
    F = fusion("d8")
    B = build_linking_system(F, objects=[F.S])
    assert verify_main(unipotent_local_system(B, 2), 2)["pass"]
    rep = verify_main(trivial_local_system(linking("a4"), 2), 2)
    assert rep["pass"]
    assert rep["degrees"][1]["nerve"] == []


def test_delta_suite_split_and_unipotent():
    L = linking("d8")
    one = [np.eye(1, dtype=np.int64)] * len(L)
    two = [np.eye(2, dtype=np.int64)] * len(L)
    split = LocalSES(LocalSystem(L, 2, 1, 1, one), LocalSystem(L, 2, 1, 2, two), LocalSystem(L, 2, 1, 1, one),
                     np.array([[1], [0]]), np.array([[0, 1]]))
    rep = verify_delta_functor(split, _omega("d8"), 1)
    assert rep["pass"]
    assert not any(rep["connecting_nonzero"].values())
    rep_u = verify_delta_functor(unipotent_ses(unipotent_local_system(L, 2)), _omega("d8"), 1)
    assert all(rep_u["squares_commute"].values())


def test_conjecture_data_on_order_three_twist():
    rho = _order3(linking("a4"))
    rep = explore_conjecture(rho, _omega("a4"), 2)
    assert rep["nilpotent"] is False
    assert len(rep["degrees"]) == 3
