"""Centric linking systems, their fundamental group, local systems and nerve cohomology.

``Mor_L(P, Q)`` is the set of cosets ``g O^p(C_G(P))`` for ``g`` in the
transporter ``T_G(P, Q)``; each coset is stored by its smallest element.
Morphisms get integer ids ordered by (source, target, representative) with
objects in canonical subgroup order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from . import zmod
from .cohomology import (BarComplex, CoefModule, CohomologyGroup, DEFAULT_BUDGET, _block_coo,
                         cohomology_from_differentials, mat_inverse)
from .errors import AxiomViolation, DegreeOutOfRange, DegreeTooLarge, RelationViolated
from .fusion import FusionMorphism, FusionSystem
from .groups import Subgroup, centralizer, minimal_generators, normalizer, op_residual, transporter

DEFAULT_NERVE_DEGREE = 3


@dataclass(frozen=True)
class Morphism:
    source: int  # object positions
    target: int
    rep: int     # smallest element of the coset


class LinkingSystem:
    """``L^c_S(G)`` restricted to ``objects`` (default: all ``F``-centric subgroups)."""

    def __init__(self, F: FusionSystem, objects: Sequence[Subgroup] | None = None):
        self.F = F
        self.G, self.S, self.p = F.G, F.S, F.p
        objs = list(F.centric_objects if objects is None else (F.canonical(P) for P in objects))
        objs.sort(key=Subgroup.sort_key)
        if self.S not in objs:
            raise AxiomViolation("S must be an object")
        self.objects = objs
        self._pos = {P.element_set: i for i, P in enumerate(objs)}
        G = self.G
        self.residual = [op_residual(centralizer(G.whole(), P), self.p) for P in objs]
        # coset representative of g O^p(C_G(P)) for every g
        self._rep = []
        for i, P in enumerate(objs):
            O = self.residual[i].elements
            table = {}
            for g in range(G.order):
                if g not in table:
                    coset = [G.mul(g, o) for o in O]
                    r = min(coset)
                    for y in coset:
                        table[y] = r
            self._rep.append(table)
        self.transporters: dict[tuple[int, int], tuple[int, ...]] = {}
        morphs = []
        for i, P in enumerate(objs):
            for j, Q in enumerate(objs):
                T = transporter(G.whole(), P, Q)
                if not T:
                    continue
                self.transporters[(i, j)] = T
                reps = sorted({self._rep[i][g] for g in T})
                morphs.extend(Morphism(i, j, r) for r in reps)
        self.morphisms = morphs
        self._id = {(m.source, m.target, m.rep): k for k, m in enumerate(morphs)}
        self._out: dict[int, list[int]] = {i: [] for i in range(len(objs))}
        self._in: dict[int, list[int]] = {i: [] for i in range(len(objs))}
        for k, m in enumerate(morphs):
            self._out[m.source].append(k)
            self._in[m.target].append(k)

    # -- basic structure
    def __len__(self):
        return len(self.morphisms)

    def obj(self, P: Subgroup) -> int:
        return self._pos[P.element_set]

    def morphism_id(self, i: int, j: int, g: int) -> int:
        """Id of ``[g] : objects[i] -> objects[j]``."""
        return self._id[(i, j, self._rep[i][g])]

    def identity(self, i: int) -> int:
        return self.morphism_id(i, i, 0)

    def inclusion(self, i: int, j: int) -> int:
        """``iota_P^Q = delta_{P,Q}(1)``."""
        return self.morphism_id(i, j, 0)

    def delta(self, i: int, j: int, s: int) -> int:
        return self.morphism_id(i, j, s)

    def compose(self, g: int, f: int) -> int:
        """``g ∘ f``."""
        mg, mf = self.morphisms[g], self.morphisms[f]
        if mf.target != mg.source:
            raise ValueError("morphisms are not composable")
        return self.morphism_id(mf.source, mg.target, self.G.mul(mg.rep, mf.rep))

    def is_identity(self, k: int) -> bool:
        m = self.morphisms[k]
        return m.source == m.target and m.rep == self._rep[m.source][0]

    def projection(self, k: int) -> FusionMorphism:
        """``pi([g]) = c_g``."""
        m = self.morphisms[k]
        P, Q = self.objects[m.source], self.objects[m.target]
        G = self.G
        return FusionMorphism(P, Q, tuple(G.conj(m.rep, x) for x in P.elements), m.rep)

    def aut_ids(self, Q: Subgroup) -> list[int]:
        i = self.obj(Q)
        return [k for k in self._out[i] if self.morphisms[k].target == i]

    def aut_generators(self, Q: Subgroup) -> list[int]:
        """Morphism ids of a greedy generating set of ``N_G(Q)``, hence of ``Aut_L(Q)``."""
        i = self.obj(Q)
        N = normalizer(self.G.whole(), Q)
        return sorted({self.morphism_id(i, i, g) for g in minimal_generators(self.G, N.elements)})

    @cached_property
    def composable_pairs(self) -> list[tuple[int, int, int]]:
        """``(g, f, g∘f)`` for all composable pairs, in id order."""
        out = []
        for f, mf in enumerate(self.morphisms):
            for g in self._out[mf.target]:
                out.append((g, f, self.compose(g, f)))
        return out

    # -- axioms
    def check_axioms(self) -> dict[str, bool]:
        """Verify associativity and axioms (A), (B), (C) exhaustively; raises on failure."""
        G, S = self.G, self.S
        for k, m in enumerate(self.morphisms):
            if self.compose(k, self.identity(m.source)) != k or self.compose(self.identity(m.target), k) != k:
                raise AxiomViolation(f"identity law fails at morphism {k}")
        for (h, g, hg) in self.composable_pairs:
            for f in self._in[self.morphisms[g].source]:
                if self.compose(hg, f) != self.compose(h, self.compose(g, f)):
                    raise AxiomViolation(f"associativity fails at ({h}, {g}, {f})")
        for (i, j), T in self.transporters.items():
            P = self.objects[i]
            # |Mor(P,Q)| * |O^p(C_G(P))| = |T_G(P,Q)|
            count = sum(1 for k in self._out[i] if self.morphisms[k].target == j)
            if count * self.residual[i].order != len(T):
                raise AxiomViolation(f"coset count mismatch on pair ({i}, {j})")
            # (A): C_S(P) acts freely by precomposition and pi is the orbit map
            Z = centralizer(S, P).elements
            ids = [k for k in self._out[i] if self.morphisms[k].target == j]
            fibres: dict[tuple[int, ...], set[int]] = {}
            for k in ids:
                orbit = {self.compose(k, self.delta(i, i, z)) for z in Z}
                if len(orbit) != len(Z):
                    raise AxiomViolation(f"C_S(P) does not act freely on Mor({i},{j})")
                fibres.setdefault(self.projection(k).table, set()).add(k)
                for k2 in orbit:
                    if self.projection(k2).table != self.projection(k).table:
                        raise AxiomViolation("pi is not constant on C_S(P)-orbits")
            homs = {f.table for f in self.F.hom(P, self.objects[j])}
            if set(fibres) != homs:
                raise AxiomViolation(f"pi is not onto Hom_F on pair ({i}, {j})")
            if any(len(v) != len(Z) for v in fibres.values()):
                raise AxiomViolation("pi fibres are not single C_S(P)-orbits")
            # (B): pi(delta(g)) = c_g for g in the transporter
            for g in T:
                if self.projection(self.delta(i, j, g)).table != tuple(G.conj(g, x) for x in P.elements):
                    raise AxiomViolation("pi ∘ delta differs from conjugation")
        for i, P in enumerate(self.objects):
            if len({self.delta(i, i, x) for x in P.elements}) != P.order:
                raise AxiomViolation(f"delta_P is not injective on object {i}")
        # (C): psi ∘ delta_P(g) = delta_Q(pi(psi)(g)) ∘ psi
        for k, m in enumerate(self.morphisms):
            P = self.objects[m.source]
            pk = self.projection(k)
            for x in P.elements:
                lhs = self.compose(k, self.delta(m.source, m.source, x))
                rhs = self.compose(self.delta(m.target, m.target, pk(x)), k)
                if lhs != rhs:
                    raise AxiomViolation(f"axiom (C) fails at morphism {k}, element {x}")
        return {"associativity": True, "A": True, "B": True, "C": True}

    def to_json(self) -> dict:
        return {
            "objects": [list(P.elements) for P in self.objects],
            "morphisms": [{"id": k, "source": m.source, "target": m.target, "rep": m.rep,
                           "pi": list(self.projection(k).table)} for k, m in enumerate(self.morphisms)],
            "delta_S": {str(s): self.delta(self.obj(self.S), self.obj(self.S), s) for s in self.S.elements},
            "inclusions": {f"{i},{j}": self.inclusion(i, j) for (i, j) in sorted(self.transporters)
                           if 0 in self.transporters[(i, j)]},
        }


def build_linking_system(F: FusionSystem, objects: Sequence[Subgroup] | None = None,
                         check: bool = True) -> LinkingSystem:
    L = LinkingSystem(F, objects)
    if check:
        L.check_axioms()
    return L


# ---------------------------------------------------------------- fundamental group

@dataclass
class Pi1Presentation:
    """Generators are morphism ids; a relation row is an integer vector over them."""

    n_generators: int
    relations: list[tuple[int, int, int]]   # g ∘ f = h, read as [g] + [f] - [h] = 0
    tree: list[int]                          # inclusions iota_P^S set to 1
    base: int

    def relation_matrix(self) -> np.ndarray:
        rows = []
        n = self.n_generators
        for g, f, h in self.relations:
            r = [0] * n
            r[g] += 1
            r[f] += 1
            r[h] -= 1
            rows.append(r)
        for t in self.tree:
            r = [0] * n
            r[t] = 1
            rows.append(r)
        return np.array(rows, dtype=np.int64).reshape(-1, n)

    @cached_property
    def abelianization(self) -> zmod.IntegerSmith:
        return zmod.smith_int(self.relation_matrix(), self.n_generators)


def pi1_presentation(L: LinkingSystem) -> Pi1Presentation:
    s = L.obj(L.S)
    tree = [L.inclusion(i, s) for i in range(len(L.objects)) if i != s]
    return Pi1Presentation(len(L), list(L.composable_pairs), tree, s)


def h1(L: LinkingSystem) -> list[int]:
    """Invariant factors of the abelianized fundamental group (0 = free summand)."""
    return pi1_presentation(L).abelianization.invariant_factors


def h1_characters(L: LinkingSystem) -> tuple[list[int], np.ndarray]:
    """Orders of the nontrivial cyclic summands of ``H_1`` and each morphism's coordinates."""
    ab = pi1_presentation(L).abelianization
    keep = [i for i, d in enumerate(ab.diagonal) if d != 1]
    orders = [ab.diagonal[i] for i in keep]
    coords = np.array([[int(ab.V[j, i]) % d if d else int(ab.V[j, i]) for i, d in zip(keep, orders)]
                       for j in range(len(L))], dtype=object).reshape(len(L), len(keep))
    return orders, coords


# ---------------------------------------------------------------- local systems

class LocalSystem:
    """A functor from ``L`` to invertible matrices over ``Z/p^e``.

    Required to be based: inclusions go to the identity, so that the
    induced ``S``-action restricts compatibly to every object.
    """

    def __init__(self, L: LinkingSystem, p: int, e: int, rank: int, rho: Sequence[np.ndarray], check: bool = True):
        self.L = L
        self.p, self.e, self.rank = p, e, rank
        self.q = p**e
        self.rho = [np.asarray(m, dtype=np.int64) % self.q for m in rho]
        if check:
            self.check()

    def check(self):
        q = self.q
        eye = np.eye(self.rank, dtype=np.int64)
        for i in range(len(self.L.objects)):
            if not np.array_equal(self.rho[self.L.identity(i)], eye):
                raise RelationViolated(f"identity of object {i} is not sent to 1")
        for (g, f, h) in self.L.composable_pairs:
            if not np.array_equal((self.rho[g] @ self.rho[f]) % q, self.rho[h]):
                raise RelationViolated(f"rho(g)rho(f) != rho(g∘f) for pair ({g}, {f})", (g, f))
        for (i, j), T in self.L.transporters.items():
            if 0 in T and not np.array_equal(self.rho[self.L.inclusion(i, j)], eye):
                raise RelationViolated(f"inclusion {i}->{j} is not sent to 1")
        for m in self.rho:
            mat_inverse(m, self.p, self.e)

    @cached_property
    def module(self) -> CoefModule:
        """``M`` with ``S`` acting through ``delta_S``."""
        L = self.L
        s = L.obj(L.S)
        act = {x: self.rho[L.delta(s, s, x)] for x in L.S.elements}
        return CoefModule(self.p, self.e, self.rank, act)

    def is_trivial(self) -> bool:
        eye = np.eye(self.rank, dtype=np.int64)
        return all(np.array_equal(m, eye) for m in self.rho)

    def to_json(self) -> dict:
        return {"p": self.p, "e": self.e, "rank": self.rank,
                "assignment": {str(k): m.tolist() for k, m in enumerate(self.rho)}}


def trivial_local_system(L: LinkingSystem, p: int, e: int = 1, rank: int = 1) -> LocalSystem:
    eye = np.eye(rank, dtype=np.int64)
    return LocalSystem(L, p, e, rank, [eye] * len(L), check=False)


def make_local_system(L: LinkingSystem, p: int, e: int, rank: int,
                      assignment: Mapping[int, np.ndarray]) -> LocalSystem:
    """Extend ``assignment`` (morphism id -> matrix) to all of ``L``.

    Identities and inclusions go to 1.  Values spread along the composition
    table (``h = g∘f`` determines any one of the three from the other two)
    until nothing changes; an inconsistent value raises RelationViolated.
    """
    q = p**e
    eye = np.eye(rank, dtype=np.int64)
    rho: dict[int, np.ndarray] = {}
    for i in range(len(L.objects)):
        rho[L.identity(i)] = eye
    for (i, j), T in L.transporters.items():
        if 0 in T:
            rho[L.inclusion(i, j)] = eye
    for k, m in assignment.items():
        m = np.asarray(m, dtype=np.int64) % q
        k = int(k)
        if k < 0 or k >= len(L):
            raise RelationViolated(f"unknown morphism id {k}")
        if k in rho and not np.array_equal(rho[k], m):
            raise RelationViolated(f"assignment to morphism {k} conflicts with identities/inclusions", (k, k))
        rho[k] = m
    inv: dict[int, np.ndarray] = {}

    def inverse(k):
        if k not in inv:
            inv[k] = mat_inverse(rho[k], p, e)
        return inv[k]

    def put(k, m, witness):
        if k in rho:
            if not np.array_equal(rho[k], m):
                raise RelationViolated(f"assignment violates the relation at pair {witness}", witness)
            return False
        rho[k] = m
        return True

    pairs = L.composable_pairs
    changed = True
    while changed:
        changed = False
        for (g, f, h) in pairs:
            kg, kf, kh = g in rho, f in rho, h in rho
            if kg and kf:
                changed |= put(h, (rho[g] @ rho[f]) % q, (g, f))
            elif kg and kh:
                changed |= put(f, (inverse(g) @ rho[h]) % q, (g, f))
            elif kf and kh:
                changed |= put(g, (rho[h] @ inverse(f)) % q, (g, f))
    missing = [k for k in range(len(L)) if k not in rho]
    if missing:
        raise RelationViolated(f"assignment does not determine morphism {missing[0]}")
    return LocalSystem(L, p, e, rank, [rho[k] for k in range(len(L))])


def unipotent_local_system(L: LinkingSystem, p: int, component: int | None = None) -> LocalSystem:
    """``rho = chi ∘ ab`` on ``(Z/p)^2`` with ``chi(generator) = [[1, 1], [0, 1]]``.

    Uses the first cyclic summand of ``H_1`` whose order is divisible by
    ``p`` (or free), unless ``component`` selects another.  If ``H_1 ⊗ Z/p``
    vanishes the result is the trivial local system.
    """
    orders, coords = h1_characters(L)
    usable = [i for i, d in enumerate(orders) if d % p == 0]
    eye = np.eye(2, dtype=np.int64)
    if not usable:
        return LocalSystem(L, p, 1, 2, [eye] * len(L))
    c = usable[0] if component is None else component
    if c not in usable:
        raise RelationViolated(f"summand {c} of H_1 has order prime to {p}")
    rho = []
    for k in range(len(L)):
        t = int(coords[k, c]) % p
        rho.append(np.array([[1, t], [0, 1]], dtype=np.int64))
    return LocalSystem(L, p, 1, 2, rho)


# ---------------------------------------------------------------- nerve cohomology

class NerveComplex:
    """Normalized cochains on the nerve of ``L`` with coefficients twisted by ``rho``.

    ``C^0 = M^{objects}``; ``C^n`` is indexed by chains ``(f_1, .., f_n)`` of
    non-identity morphisms with ``source(f_i) = target(f_{i+1})``, in
    lexicographic order of ids.  The differential is::

        (dc)(f_1..f_{n+1}) = rho(f_1) c(f_2..) + sum_i (-1)^i c(.., f_i f_{i+1}, ..) + (-1)^{n+1} c(f_1..f_n)

    with ``c()`` at a chain of length 0 read at the chain's end object.
    """

    def __init__(self, rho: LocalSystem, max_degree: int = DEFAULT_NERVE_DEGREE, budget: int = DEFAULT_BUDGET):
        if max_degree < 1:
            raise DegreeOutOfRange("max_degree must be at least 1")
        self.rho, self.L = rho, rho.L
        self.p, self.e, self.q, self.r = rho.p, rho.e, rho.q, rho.rank
        self.D = max_degree
        self.budget = budget
        L = self.L
        self.nonid = [k for k in range(len(L)) if not L.is_identity(k)]
        self._chains: dict[int, np.ndarray] = {}
        self._index: dict[int, dict[tuple, int]] = {}
        self._d: dict[int, sp.csr_matrix] = {}
        self._H: dict[int, CohomologyGroup] = {}
        self._comp = {(g, f): h for g, f, h in L.composable_pairs}

    def chains(self, n: int) -> np.ndarray:
        if n in self._chains:
            return self._chains[n]
        L = self.L
        if n == 0:
            out = np.arange(len(L.objects), dtype=np.int64).reshape(-1, 1)
        elif n == 1:
            out = np.array(self.nonid, dtype=np.int64).reshape(-1, 1)
        else:
            prev = self.chains(n - 1)
            est = prev.shape[0] * len(self.nonid) * self.r
            if est > 50 * self.budget:
                raise DegreeTooLarge(f"nerve chains of length {n} may need {est} entries", est)
            by_target: dict[int, list[int]] = {}
            for k in self.nonid:
                by_target.setdefault(L.morphisms[k].target, []).append(k)
            rows = []
            for ch in prev:
                src = L.morphisms[int(ch[-1])].source
                for k in by_target.get(src, ()):
                    rows.append((*ch, k))
            out = np.array(rows, dtype=np.int64).reshape(-1, n)
        self._chains[n] = out
        return out

    def rank(self, n: int) -> int:
        return self.chains(n).shape[0] * self.r

    def index(self, n: int) -> dict[tuple, int]:
        if n not in self._index:
            self._index[n] = {tuple(int(x) for x in c): i for i, c in enumerate(self.chains(n))}
        return self._index[n]

    def _end_object(self, chain) -> int:
        return self.L.morphisms[int(chain[-1])].source

    def d(self, n: int) -> sp.csr_matrix:
        if not 0 <= n < self.D:
            raise DegreeOutOfRange(f"nerve differential d_{n} outside 0..{self.D - 1}")
        if n in self._d:
            return self._d[n]
        rows_n = self.rank(n + 1)
        if rows_n > self.budget:
            raise DegreeTooLarge(f"nerve C^{n + 1} of rank {rows_n} exceeds budget {self.budget}", rows_n)
        L, r = self.L, self.r
        T = self.chains(n + 1)
        idx = self.index(n)
        R_, C_, M_, S_ = [], [], [], []   # row block, col block, matrix id or -1 for identity, sign
        mats = [np.eye(r, dtype=np.int64)]
        mat_id = {}
        for t, ch in enumerate(T):
            ch = tuple(int(x) for x in ch)
            f1 = ch[0]
            # leading face
            if n == 0:
                col = L.morphisms[f1].source
                col_t = L.morphisms[f1].target
            else:
                col = idx[ch[1:]]
            if f1 not in mat_id:
                mat_id[f1] = len(mats)
                mats.append(self.rho.rho[f1])
            R_.append(t); C_.append(col); M_.append(mat_id[f1]); S_.append(1)
            for i in range(1, n + 1):
                h = self._comp[(ch[i - 1], ch[i])]
                if L.is_identity(h):
                    continue
                merged = ch[:i - 1] + (h,) + ch[i + 1:]
                R_.append(t); C_.append(idx[merged]); M_.append(0); S_.append((-1) ** i)
            if n == 0:
                R_.append(t); C_.append(col_t); M_.append(0); S_.append(-1)
            else:
                R_.append(t); C_.append(idx[ch[:-1]]); M_.append(0); S_.append((-1) ** (n + 1))
        R_ = np.array(R_, dtype=np.int64)
        C_ = np.array(C_, dtype=np.int64)
        M_ = np.array(M_, dtype=np.int64)
        S_ = np.array(S_, dtype=np.int64)
        blocks = np.array(mats, dtype=np.int64)[M_] * S_[:, None, None]
        R, C, V = _block_coo(R_, C_, blocks, r)
        mat = sp.coo_matrix((V, (R, C)), shape=(rows_n, self.rank(n))).tocsr()
        mat.sum_duplicates()
        mat.data %= self.q
        mat.eliminate_zeros()
        self._d[n] = mat
        return mat

    def cohomology(self, n: int) -> CohomologyGroup:
        if n not in self._H:
            if not 0 <= n < self.D:
                raise DegreeOutOfRange(f"H^{n} needs nerve degree cap > {n}, have {self.D}")
            self._H[n] = cohomology_from_differentials(self.d(n - 1) if n else None, self.d(n), self.p, self.e, n)
        return self._H[n]

    def check_d_squared(self) -> bool:
        for n in range(self.D - 1):
            prod = (self.d(n + 1) @ self.d(n)).tocsr()
            prod.data %= self.q
            if prod.count_nonzero():
                return False
        return True

    def comparison_cochain(self, cx: BarComplex, n: int) -> sp.csr_matrix:
        """Restriction along ``delta_S : B(S) -> L`` from nerve ``C^n`` to bar ``C^n(S, M)``."""
        L, r = self.L, self.r
        s = L.obj(L.S)
        T = cx.tuples(n)
        if n == 0:
            cols = np.array([s], dtype=np.int64)
        else:
            dl = np.array([L.delta(s, s, x) for x in cx.nonid], dtype=np.int64)
            idx = self.index(n)
            cols = np.array([idx[tuple(int(v) for v in dl[row])] for row in T], dtype=np.int64)
        R, C, V = _block_coo(np.arange(T.shape[0], dtype=np.int64), cols, np.eye(r, dtype=np.int64), r)
        return sp.coo_matrix((V, (R, C)), shape=(cx.rank(n), self.rank(n))).tocsr()


def nerve_cohomology(rho: LocalSystem, k: int, max_degree: int | None = None) -> CohomologyGroup:
    return NerveComplex(rho, max(k + 1, max_degree or DEFAULT_NERVE_DEGREE)).cohomology(k)


__all__ = [
    "Morphism", "LinkingSystem", "build_linking_system", "Pi1Presentation", "pi1_presentation", "h1",
    "h1_characters", "LocalSystem", "trivial_local_system", "make_local_system", "unipotent_local_system",
    "NerveComplex", "nerve_cohomology",
]
