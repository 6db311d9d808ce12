"""Group cohomology of small p-groups with coefficients in ``(Z/p^e)^r``.

Cochains live in the normalized bar complex.  A ``k``-cochain of ``P`` is a
vector indexed by ``(tuple, component)`` where the tuple runs over
``k``-tuples of non-identity elements of ``P`` in lexicographic order of
their positions; component ``a`` of tuple ``t`` sits at ``t * r + a``.

The differential is the standard one with the action on the leading face::

    (df)(g1..g{k+1}) = g1 . f(g2..) + sum_i (-1)^i f(.., g_i g_{i+1}, ..) + (-1)^{k+1} f(g1..gk)

Maps between cochain groups (restriction, transfer, twisted maps) are
scipy sparse matrices; on cohomology they become integer matrices acting on
coordinate columns of :class:`CohomologyGroup`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
import scipy.sparse as sp

from . import zmod
from .errors import (DegreeOutOfRange, DegreeTooLarge, EquivarianceViolated, GroupMismatch,
                     NotExact, NotSubgroup)
from .groups import Subgroup, left_coset_reps, right_coset_reps

DEFAULT_MAX_DEGREE = 4
DEFAULT_BUDGET = 4_000_000


class CoefModule:
    """``(Z/p^e)^rank``, optionally with a group acting by matrices.

    ``action`` maps element indices of the ambient group to ``rank x rank``
    matrices; elements not listed act trivially.  :meth:`from_generators`
    extends an assignment on generators and checks the relations.
    """

    def __init__(self, p: int, e: int, rank: int, action: Mapping[int, np.ndarray] | None = None):
        self.p, self.e, self.rank = p, e, rank
        self.q = p**e
        self.action = {int(k): np.asarray(v, dtype=np.int64) % self.q for k, v in (action or {}).items()}
        self._eye = np.eye(rank, dtype=np.int64)
        self._inverses: dict[int, np.ndarray] = {}

    @classmethod
    def trivial(cls, p: int, e: int = 1, rank: int = 1) -> CoefModule:
        return cls(p, e, rank)

    @classmethod
    def from_generators(cls, p: int, e: int, rank: int, group: Subgroup,
                        generator_action: Mapping[int, np.ndarray]) -> CoefModule:
        """Extend ``generator_action`` (element index -> matrix) to all of ``group``."""
        q = p**e
        G = group.parent
        gens = {int(g): np.asarray(m, dtype=np.int64) % q for g, m in generator_action.items()}
        for g, m in gens.items():
            if g not in group:
                raise GroupMismatch(f"generator {g} not in the acting group")
            mat_inverse(m, p, e)
        act = {0: np.eye(rank, dtype=np.int64)}
        queue = [0]
        while queue:
            x = queue.pop(0)
            for g, m in gens.items():
                y = G.mul(g, x)
                val = (m @ act[x]) % q
                if y in act:
                    if not np.array_equal(act[y], val):
                        raise EquivarianceViolated(f"action does not respect the relations at element {y}")
                else:
                    act[y] = val
                    queue.append(y)
        missing = set(group.elements) - set(act)
        if missing:
            raise EquivarianceViolated("assignment does not generate the acting group")
        mod = cls(p, e, rank, act)
        mod.check_action(group)
        return mod

    def matrix(self, x: int) -> np.ndarray:
        return self.action.get(x, self._eye)

    def inverse_matrix(self, x: int) -> np.ndarray:
        m = self._inverses.get(x)
        if m is None:
            m = self._inverses[x] = mat_inverse(self.matrix(x), self.p, self.e)
        return m

    def is_trivial(self) -> bool:
        return all(np.array_equal(m, self._eye) for m in self.action.values())

    def check_action(self, group: Subgroup):
        G = group.parent
        for a in group.elements:
            for b in group.elements:
                if not np.array_equal(self.matrix(G.mul(a, b)), (self.matrix(a) @ self.matrix(b)) % self.q):
                    raise EquivarianceViolated(f"action is not a homomorphism at ({a}, {b})")

    def restricted(self, elements) -> CoefModule:
        return CoefModule(self.p, self.e, self.rank, {x: self.matrix(x) for x in elements})

    @property
    def abelian_group(self) -> zmod.FinAbGroup:
        return zmod.FinAbGroup(self.p, [self.e] * self.rank)

    def invariants(self, group: Subgroup) -> zmod.Howell:
        """``M^P`` as a Howell submodule of ``(Z/p^e)^r``."""
        rows = [(self.matrix(x) - self._eye) % self.q for x in (group.gens or group.elements)]
        if not rows:
            return zmod.Howell.from_rows(self._eye, self.p, self.e, self.rank)
        return zmod.kernel(np.vstack(rows), self.p, self.e)


def mat_inverse(m: np.ndarray, p: int, e: int) -> np.ndarray:
    q = p**e
    r = m.shape[0]
    cols = []
    solver = zmod.Solver(m, p, e)
    for j in range(r):
        x = solver(np.eye(r, dtype=np.int64)[:, j])
        if x is None:
            raise EquivarianceViolated("matrix is not invertible")
        cols.append(x)
    return np.array(cols, dtype=np.int64).T % q


@dataclass
class ModuleMap:
    """Homomorphism ``x -> A x`` between coefficient modules."""

    domain: CoefModule
    codomain: CoefModule
    A: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=np.int64) % self.codomain.q
        if self.A.shape != (self.codomain.rank, self.domain.rank):
            raise ValueError(f"matrix shape {self.A.shape} does not match module ranks")
        if ((self.domain.q * self.A) % self.codomain.q).any():
            raise ValueError("matrix is not compatible with the module exponents")

    def is_equivariant(self, elements) -> bool:
        qc = self.codomain.q
        return all(np.array_equal((self.A @ self.domain.matrix(x)) % qc, (self.codomain.matrix(x) @ self.A) % qc)
                   for x in elements)

    def kernel(self) -> zmod.Howell:
        src, tgt = self.domain.abelian_group, self.codomain.abelian_group
        return zmod.hom_kernel(self.A, src, tgt)

    def image(self) -> zmod.Howell:
        return zmod.hom_image(self.A, self.codomain.abelian_group, zmod.top_exponent(
            self.domain.abelian_group, self.codomain.abelian_group))

    def solver(self) -> Callable[[np.ndarray], np.ndarray | None]:
        """Returns a function lifting a codomain vector to some preimage."""
        tgt = self.codomain.abelian_group
        E = max(self.domain.e, self.codomain.e)
        scaled = tgt.embed(self.A, E)
        solve = zmod.Solver(scaled, self.codomain.p, E)
        qd = self.domain.q

        def lift(y):
            x = solve(tgt.embed(np.asarray(y, dtype=np.int64), E))
            return None if x is None else x % qd
        return lift


@dataclass
class ShortExactSeq:
    """``0 -> L -> M -> N -> 0`` given by ``iota: L -> M`` and ``sigma: M -> N``."""

    iota: ModuleMap
    sigma: ModuleMap

    def check(self, elements=()):
        if self.iota.codomain is not self.sigma.domain:
            raise NotExact("iota and sigma are not composable")
        L, M, N = self.iota.domain, self.iota.codomain, self.sigma.codomain
        E = max(L.e, M.e, N.e)
        if self.iota.kernel().order() != 1:
            raise NotExact("iota is not injective")
        if self.sigma.image().order() != N.abelian_group.order:
            raise NotExact("sigma is not surjective")
        img = zmod.hom_image(self.iota.A, M.abelian_group, E)
        ker = zmod.hom_kernel(self.sigma.A, M.abelian_group, N.abelian_group, E)
        if img != ker:
            raise NotExact("im(iota) != ker(sigma)")
        for f in (self.iota, self.sigma):
            if not f.is_equivariant(elements):
                raise NotExact("sequence is not equivariant")
        return True

    @property
    def modules(self):
        return self.iota.domain, self.iota.codomain, self.sigma.codomain


def _tuples(b: int, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(b), repeat=k)), dtype=np.int64).reshape(-1, k)


def _tuple_index(T: np.ndarray, b: int) -> np.ndarray:
    k = T.shape[1]
    idx = np.zeros(T.shape[0], dtype=np.int64)
    for j in range(k):
        idx = idx * b + T[:, j]
    return idx


def _block_coo(rows_t, cols_t, mats, r, sign=1):
    """COO triplets for placing ``sign * mats[i]`` at block ``(rows_t[i], cols_t[i])``."""
    n = len(rows_t)
    if n == 0:
        return (np.zeros(0, dtype=np.int64),) * 3
    a = np.arange(r)
    R = (rows_t[:, None, None] * r + a[None, :, None]) * np.ones((1, 1, r), dtype=np.int64)
    C = (cols_t[:, None, None] * r + a[None, None, :]) * np.ones((1, r, 1), dtype=np.int64)
    if mats.ndim == 2:
        V = np.broadcast_to(mats, (n, r, r))
    else:
        V = mats
    return R.ravel(), C.ravel(), (sign * V).ravel()


class BarComplex:
    """Normalized bar cochain complex ``C^0 -> ... -> C^D`` of ``P`` with values in ``M``."""

    def __init__(self, P: Subgroup, M: CoefModule, max_degree: int = DEFAULT_MAX_DEGREE,
                 budget: int = DEFAULT_BUDGET):
        if max_degree < 1:
            raise DegreeOutOfRange("max_degree must be at least 1")
        self.P, self.M = P, M
        self.p, self.e, self.q, self.r = M.p, M.e, M.q, M.rank
        self.D = max_degree
        self.budget = budget
        G = P.parent
        self.G = G
        self.nonid = [x for x in P.elements if x != 0]
        self.b = len(self.nonid)
        self.pos = {x: i for i, x in enumerate(self.nonid)}
        # position of the product, -1 for the identity
        self.mt = np.array([[self.pos.get(G.mul(x, y), -1) for y in self.nonid] for x in self.nonid],
                           dtype=np.int64).reshape(self.b, self.b)
        self.act = np.array([M.matrix(x) for x in self.nonid], dtype=np.int64).reshape(self.b, self.r, self.r)
        self._d: dict[int, sp.csr_matrix] = {}
        self._H: dict[int, CohomologyGroup] = {}

    def rank(self, k: int) -> int:
        return self.r * self.b**k

    def tuples(self, k: int) -> np.ndarray:
        return _tuples(self.b, k)

    def index(self, T: np.ndarray) -> np.ndarray:
        return _tuple_index(T, self.b)

    def d(self, k: int) -> sp.csr_matrix:
        """Differential ``C^k -> C^{k+1}`` as a sparse matrix."""
        if not 0 <= k < self.D:
            raise DegreeOutOfRange(f"differential d_{k} outside 0..{self.D - 1}")
        if k in self._d:
            return self._d[k]
        rows_n = self.rank(k + 1)
        if rows_n > self.budget:
            raise DegreeTooLarge(f"C^{k + 1} of rank {rows_n} exceeds budget {self.budget}", rows_n)
        T = self.tuples(k + 1)
        tid = np.arange(T.shape[0], dtype=np.int64)
        r = self.r
        trip = []
        # leading face: g1 . f(g2..)
        trip.append(_block_coo(tid, self.index(T[:, 1:]), self.act[T[:, 0]], r))
        eye = np.eye(r, dtype=np.int64)
        for i in range(1, k + 1):
            prod = self.mt[T[:, i - 1], T[:, i]]
            ok = prod >= 0
            merged = np.hstack([T[ok, :i - 1], prod[ok, None], T[ok, i + 1:]])
            trip.append(_block_coo(tid[ok], self.index(merged), eye, r, (-1) ** i))
        trip.append(_block_coo(tid, self.index(T[:, :-1]), eye, r, (-1) ** (k + 1)))
        R = np.concatenate([t[0] for t in trip])
        C = np.concatenate([t[1] for t in trip])
        V = np.concatenate([t[2] for t in trip])
        mat = sp.coo_matrix((V, (R, C)), shape=(rows_n, self.rank(k))).tocsr()
        mat.sum_duplicates()
        mat.data %= self.q
        mat.eliminate_zeros()
        self._d[k] = mat
        return mat

    def cohomology(self, k: int) -> CohomologyGroup:
        if k in self._H:
            return self._H[k]
        if not 0 <= k < self.D:
            raise DegreeOutOfRange(f"H^{k} needs degree cap > {k}, have {self.D}")
        H = cohomology_from_differentials(self.d(k - 1) if k > 0 else None, self.d(k), self.p, self.e, k)
        self._H[k] = H
        return H

    def check_d_squared(self) -> bool:
        for k in range(self.D - 1):
            prod = (self.d(k + 1) @ self.d(k)).tocsr()
            prod.data %= self.q
            if prod.count_nonzero():
                return False
        return True


def bar_complex(P: Subgroup, M: CoefModule, D: int = DEFAULT_MAX_DEGREE) -> BarComplex:
    return BarComplex(P, M, D)


class CohomologyGroup:
    """``H^k = ker d_k / im d_{k-1}`` with a canonical cyclic decomposition.

    ``reps[i]`` is a cocycle representing the ``i``-th cyclic generator, of
    order ``p^exponents[i]``.  :meth:`coords` sends any cocycle to its
    coordinate vector; coboundaries map to zero.
    """

    def __init__(self, degree: int, p: int, e: int, n: int, Z: zmod.Howell, B: zmod.Howell):
        self.degree, self.p, self.e, self.n = degree, p, e, n
        q = p**e
        Zg = Z.generators()
        Bg = B.generators()
        t = len(Zg)
        self._t = t
        aug = zmod.Howell(p, e, n + t)
        for i in range(t):
            row = np.zeros(n + t, dtype=np.int64)
            row[:n] = Zg[i]
            row[n + i] = 1
            aug.insert(row)
        for bvec in Bg:
            row = np.zeros(n + t, dtype=np.int64)
            row[:n] = bvec
            aug.insert(row)
        rel = [aug.rows[c][n:] for c in aug.pivots if c >= n]
        rel = np.array(rel, dtype=np.int64).reshape(len(rel), t)
        sm = zmod.smith_mod(rel, p, e, t)
        keep = [i for i, f in enumerate(sm.exponents) if f > 0]
        order = sorted(keep, key=lambda i: (sm.exponents[i], i))
        self.exponents = [sm.exponents[i] for i in order]
        self._V = sm.V[:, order] if t else np.zeros((0, 0), dtype=np.int64)
        self.reps = (sm.Vinv[order] @ Zg) % q if t else np.zeros((0, n), dtype=np.int64)
        self.group = zmod.FinAbGroup(p, self.exponents)
        self._aug = aug
        self._Z = Z

    @property
    def invariant_factors(self) -> list[int]:
        return self.group.invariant_factors

    @property
    def dimension(self) -> int:
        """Number of cyclic summands (the ``F_p``-dimension when ``e == 1``)."""
        return len(self.exponents)

    @property
    def order(self) -> int:
        return self.group.order

    def is_cocycle(self, x) -> bool:
        return self._Z.contains(x)

    def coords(self, x) -> np.ndarray:
        """Coordinates of the class of cocycle ``x``."""
        a = zmod._solve_with(self._aug, self.n, x)
        if a is None:
            raise ValueError("vector is not a cocycle")
        return self.group.normalize(a @ self._V)

    def coords_many(self, X: np.ndarray) -> np.ndarray:
        """Coordinates for the columns of ``X``."""
        X = np.asarray(X, dtype=np.int64)
        if X.shape[1] == 0:
            return np.zeros((len(self.exponents), 0), dtype=np.int64)
        return np.array([self.coords(X[:, j]) for j in range(X.shape[1])], dtype=np.int64).T.reshape(
            len(self.exponents), X.shape[1])

    def induced(self, F, source: CohomologyGroup) -> np.ndarray:
        """Matrix on coordinates of the cochain map ``F`` from ``source`` to ``self``."""
        if source.dimension == 0:
            return np.zeros((self.dimension, 0), dtype=np.int64)
        images = F @ source.reps.T
        images = np.asarray(images.toarray() if sp.issparse(images) else images, dtype=np.int64) % (self.p**self.e)
        return self.coords_many(images)

    def embed(self, coords, E: int | None = None):
        return self.group.embed(coords, E or self.e)

    def __repr__(self):
        return f"H^{self.degree}(invariant_factors={self.invariant_factors})"


def cohomology_from_differentials(d_prev, d_k, p: int, e: int, k: int) -> CohomologyGroup:
    n = d_k.shape[1]
    Z = zmod.kernel(d_k, p, e)
    B = zmod.column_space(d_prev, p, e) if d_prev is not None else zmod.Howell(p, e, n)
    return CohomologyGroup(k, p, e, n, Z, B)


def cohomology(cx: BarComplex, k: int) -> CohomologyGroup:
    return cx.cohomology(k)


# ---------------------------------------------------------------- cochain maps

def _check_same_module(a: BarComplex, b: BarComplex):
    if a.q != b.q or a.r != b.r:
        raise GroupMismatch("complexes have different coefficient modules")


def restriction_cochain(cxQ: BarComplex, cxP: BarComplex, k: int) -> sp.csr_matrix:
    """``f -> f|_P`` from ``C^k(Q)`` to ``C^k(P)``."""
    if not cxP.P <= cxQ.P:
        raise NotSubgroup("restriction target is not a subgroup")
    _check_same_module(cxQ, cxP)
    img = np.array([cxQ.pos[x] for x in cxP.nonid], dtype=np.int64)
    return _gather_map(cxP, cxQ, img, None, k)


def twisted_cochain(cx1: BarComplex, cx0: BarComplex, phi: Mapping[int, int], alpha: np.ndarray, k: int,
                    check: bool = True) -> sp.csr_matrix:
    """``f -> alpha^-1 . f(phi x1, .., phi xk)`` from ``C^k(P1)`` to ``C^k(P0)``.

    ``phi`` maps elements of ``P0`` into ``P1``.  Requires
    ``alpha^-1 A(phi(x)) = A(x) alpha^-1`` for ``x`` in ``P0``.
    """
    _check_same_module(cx1, cx0)
    q = cx0.q
    ainv = mat_inverse(np.asarray(alpha, dtype=np.int64) % q, cx0.p, cx0.e)
    if check:
        for x in cx0.P.elements:
            lhs = (ainv @ cx1.M.matrix(phi[x])) % q
            rhs = (cx0.M.matrix(x) @ ainv) % q
            if not np.array_equal(lhs, rhs):
                raise EquivarianceViolated(f"alpha is not phi-equivariant at element {x}")
    img = np.array([cx1.pos[phi[x]] for x in cx0.nonid], dtype=np.int64)
    return _gather_map(cx0, cx1, img, ainv, k)


def _gather_map(tgt: BarComplex, src: BarComplex, img: np.ndarray, mat, k: int) -> sp.csr_matrix:
    r = tgt.r
    T = tgt.tuples(k)
    tid = np.arange(T.shape[0], dtype=np.int64)
    sid = src.index(img[T]) if k > 0 else np.zeros(1, dtype=np.int64)
    M = np.eye(r, dtype=np.int64) if mat is None else mat
    R, C, V = _block_coo(tid, sid, M, r)
    out = sp.coo_matrix((V % tgt.q, (R, C)), shape=(tgt.rank(k), src.rank(k))).tocsr()
    out.eliminate_zeros()
    return out


def transfer_cochain(cxP: BarComplex, cxQ: BarComplex, k: int, choose=min) -> sp.csr_matrix:
    """Cochain-level transfer ``C^k(P) -> C^k(Q)`` for ``P <= Q``.

    With left transversal ``T`` of ``Q/P`` and the retraction
    ``pi(x) = x u^-1`` (``u`` the chosen representative of ``Px``)::

        (tr f)(q1..qk) = sum_t  (t pi(t^-1)) . f(y0^-1 y1, y1^-1 y2, ..)

    where ``y0 = pi(t^-1)``, ``y_i = pi(t^-1 q1 .. qi)``.  ``choose`` picks
    the coset representatives; the class is independent of it.
    """
    P, Q = cxP.P, cxQ.P
    if not P <= Q:
        raise NotSubgroup("transfer source is not a subgroup")
    _check_same_module(cxP, cxQ)
    G = Q.parent
    r, q = cxQ.r, cxQ.q
    T_reps = left_coset_reps(Q, P, choose)
    urep = right_coset_reps(Q, P, choose)

    def pi(x):
        return G.mul(x, G.inv(urep[x]))

    # every element of Q indexed 0..|Q|-1 with identity allowed
    qel = list(Q.elements)
    Tq = _tuples(len(qel), k)
    # restrict to non-identity tuples in cxQ numbering
    nonid_mask = np.ones(Tq.shape[0], dtype=bool)
    rows_idx = np.zeros(Tq.shape[0], dtype=np.int64)
    if k > 0:
        qpos = np.array([cxQ.pos.get(x, -1) for x in qel], dtype=np.int64)
        mapped = qpos[Tq]
        nonid_mask = (mapped >= 0).all(axis=1)
        Tq = Tq[nonid_mask]
        rows_idx = cxQ.index(mapped[nonid_mask])
    R_all, C_all, V_all = [], [], []
    for t in T_reps:
        tinv = G.inv(t)
        y0 = pi(tinv)
        coef = cxQ.M.matrix(G.mul(t, y0))
        cols = np.zeros(Tq.shape[0], dtype=np.int64)
        valid = np.ones(Tq.shape[0], dtype=bool)
        prefix = np.full(Tq.shape[0], tinv, dtype=np.int64)
        prev = np.full(Tq.shape[0], y0, dtype=np.int64)
        for j in range(k):
            prefix = np.array([G.mul(a, qel[b]) for a, b in zip(prefix, Tq[:, j])], dtype=np.int64)
            cur = np.array([pi(a) for a in prefix], dtype=np.int64)
            arg = np.array([G.mul(G.inv(a), b) for a, b in zip(prev, cur)], dtype=np.int64)
            apos = np.array([cxP.pos.get(a, -1) for a in arg], dtype=np.int64)
            valid &= apos >= 0
            cols = cols * cxP.b + np.where(apos >= 0, apos, 0)
            prev = cur
        rr, cc, vv = _block_coo(rows_idx[valid], cols[valid], coef, r)
        R_all.append(rr)
        C_all.append(cc)
        V_all.append(vv)
    R = np.concatenate(R_all)
    C = np.concatenate(C_all)
    V = np.concatenate(V_all)
    out = sp.coo_matrix((V, (R, C)), shape=(cxQ.rank(k), cxP.rank(k))).tocsr()
    out.sum_duplicates()
    out.data %= q
    out.eliminate_zeros()
    return out


def coefficient_cochain(cx_src: BarComplex, cx_tgt: BarComplex, A: np.ndarray, k: int) -> sp.csr_matrix:
    """``f -> A ∘ f`` from ``C^k(P, M)`` to ``C^k(P, N)`` for a module map with matrix ``A``."""
    if cx_src.P != cx_tgt.P:
        raise GroupMismatch("coefficient maps need a common group")
    blocks = sp.kron(sp.identity(cx_src.b**k, dtype=np.int64, format="csr"),
                     sp.csr_matrix(np.asarray(A, dtype=np.int64) % cx_tgt.q))
    return blocks.tocsr()


# ---------------------------------------------------------------- maps on cohomology

def restriction(cxQ: BarComplex, cxP: BarComplex, k: int) -> np.ndarray:
    """``Res^Q_P : H^k(Q, M) -> H^k(P, M)`` on coordinates."""
    return cxP.cohomology(k).induced(restriction_cochain(cxQ, cxP, k), cxQ.cohomology(k))


def transfer(cxP: BarComplex, cxQ: BarComplex, k: int, choose=min) -> np.ndarray:
    """``tr_P^Q : H^k(P, M) -> H^k(Q, M)`` on coordinates."""
    return cxQ.cohomology(k).induced(transfer_cochain(cxP, cxQ, k, choose), cxP.cohomology(k))


def twisted_map(cx1: BarComplex, cx0: BarComplex, phi: Mapping[int, int], alpha: np.ndarray, k: int) -> np.ndarray:
    """``H^k(P1, M) -> H^k(P0, M)`` induced by ``(phi, alpha^-1)``."""
    return cx0.cohomology(k).induced(twisted_cochain(cx1, cx0, phi, alpha, k), cx1.cohomology(k))


def coefficient_map(cx_src: BarComplex, cx_tgt: BarComplex, A: np.ndarray, k: int) -> np.ndarray:
    """``H^k(P, M) -> H^k(P, N)`` induced by the module map ``A``."""
    return cx_tgt.cohomology(k).induced(coefficient_cochain(cx_src, cx_tgt, A, k), cx_src.cohomology(k))


def connecting_hom(ses: ShortExactSeq, cxN: BarComplex, cxM: BarComplex, cxL: BarComplex, k: int,
                   section: Callable | None = None) -> np.ndarray:
    """Connecting map ``H^k(P, N) -> H^{k+1}(P, L)`` on coordinates.

    A cocycle ``z`` with values in ``N`` is lifted value by value through a
    set-level section of ``sigma``; the coboundary of the lift takes values
    in ``iota(L)`` and is pulled back to ``L``.
    """
    ses.check(cxM.P.elements)
    HN = cxN.cohomology(k)
    HL = cxL.cohomology(k + 1)
    lift = section or _default_section(ses.sigma)
    pull = ses.iota.solver()
    rN, rM, rL = cxN.r, cxM.r, cxL.r
    dM = cxM.d(k)
    cols = []
    for z in HN.reps:
        vals = z.reshape(-1, rN)
        cache: dict[tuple, np.ndarray] = {}
        lifted = np.zeros((vals.shape[0], rM), dtype=np.int64)
        for i, v in enumerate(vals):
            key = tuple(v)
            m = cache.get(key)
            if m is None:
                m = cache[key] = lift(v)
                if m is None:
                    raise NotExact("sigma is not surjective")
            lifted[i] = m
        y = (dM @ lifted.ravel()) % cxM.q
        yv = y.reshape(-1, rM)
        w = np.zeros((yv.shape[0], rL), dtype=np.int64)
        cache = {}
        for i, v in enumerate(yv):
            if not v.any():
                continue
            key = tuple(v)
            l_ = cache.get(key)
            if l_ is None:
                l_ = cache[key] = pull(v)
                if l_ is None:
                    raise NotExact("coboundary of the lift leaves im(iota)")
            w[i] = l_
        cols.append(HL.coords(w.ravel()))
    if not cols:
        return np.zeros((HL.dimension, 0), dtype=np.int64)
    return np.array(cols, dtype=np.int64).T


def _default_section(sigma: ModuleMap):
    lift = sigma.solver()

    def s(v):
        return lift(v)
    return s


__all__ = [
    "CoefModule", "ModuleMap", "ShortExactSeq", "BarComplex", "CohomologyGroup", "bar_complex", "cohomology",
    "restriction", "transfer", "twisted_map", "connecting_hom", "restriction_cochain", "transfer_cochain",
    "twisted_cochain", "coefficient_cochain", "coefficient_map", "cohomology_from_differentials", "mat_inverse",
]
