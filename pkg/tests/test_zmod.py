from __future__ import annotations

import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix
from sympy.matrices.normalforms import invariant_factors as sympy_invariants

from fusionlink import zmod


def _span(rows, q, n):
    """All vectors in the span of ``rows`` over ``Z/q`` (brute force)."""
    out = {tuple([0] * n)}
    for r in rows:
        r = np.asarray(r) % q
        out = {tuple((np.array(v) + c * r) % q) for v in out for c in range(q)}
    return out


matrices = st.integers(1, 3).flatmap(lambda m: st.integers(1, 3).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 7), min_size=n, max_size=n), min_size=m, max_size=m)))


@settings(max_examples=60, deadline=None)
@given(matrices, st.sampled_from([(2, 1), (2, 2), (2, 3), (3, 1)]))
def test_howell_span_and_kernel(rows, pe):
    p, e = pe
    q = p**e
    A = np.array(rows, dtype=np.int64) % q
    n = A.shape[1]
    H = zmod.row_space(A, p, e)
    span = _span(A, q, n)
    assert H.order() == len(span)
    for v in itertools.product(range(q), repeat=n):
        assert H.contains(np.array(v)) == (v in span)
    K = zmod.kernel(A, p, e)
    brute = [v for v in itertools.product(range(q), repeat=n) if not (A @ np.array(v) % q).any()]
    assert K.order() == len(brute)
    assert all(K.contains(np.array(v)) for v in brute)


@settings(max_examples=60, deadline=None)
@given(matrices, st.sampled_from([(2, 2), (3, 1)]))
def test_solve(rows, pe):
    p, e = pe
    q = p**e
    A = np.array(rows, dtype=np.int64) % q
    for b in itertools.product(range(q), repeat=A.shape[0]):
        x = zmod.solve(A, np.array(b), p, e)
        reachable = any(not ((A @ np.array(v) - np.array(b)) % q).any()
                        for v in itertools.product(range(q), repeat=A.shape[1]))
        assert (x is not None) == reachable
        if x is not None:
            assert not ((A @ x - np.array(b)) % q).any()


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.lists(
    st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=1, max_size=5)))
def test_integer_smith_matches_sympy(rows):
    n = len(rows[0])
    sm = zmod.smith_int(np.array(rows), n)
    M = Matrix(rows)
    expected = [abs(int(d)) for d in sympy_invariants(M) if d] + [0] * (n - M.rank())
    expected = [d for d in expected if d != 1]
    got = [d for d in sm.invariant_factors if d != 1]
    assert sorted(got, key=lambda d: (d == 0, d)) == sorted(expected, key=lambda d: (d == 0, d))


def test_module_invariants():
    H = zmod.Howell.from_rows(np.array([[2, 0], [0, 1]]), 2, 2)
    assert zmod.module_invariants(H) == [1, 2]
    assert zmod.module_invariants(zmod.Howell(2, 3, 4)) == []
