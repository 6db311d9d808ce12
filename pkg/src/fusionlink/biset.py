"""Left-free bisets: transitive classes ``[K, phi]``, composition and decomposition.

All groups are subgroups of one parent permutation group.  The transitive
``(G, H)``-biset ``[K, phi]`` has point stabilizer
``Delta(K, phi) = {(k, phi(k))}`` for the action ``(g, h) . x = g x h^-1``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import GroupMismatch, NotLeftFree
from .fusion import FusionSystem
from .groups import FiniteGroup, Subgroup, subgroup_from_elements


@dataclass(frozen=True)
class BisetClass:
    """Canonical representative of the ``(G x H)``-class of ``Delta(K, phi)``.

    ``pairs`` is the sorted tuple of ``(k, phi(k))``; it is the minimum over
    the conjugation orbit, so equal classes have equal ``pairs``.
    """

    left: Subgroup
    right: Subgroup
    pairs: tuple[tuple[int, int], ...]

    @property
    def K(self) -> Subgroup:
        return subgroup_from_elements(self.left.parent, (a for a, _ in self.pairs))

    @property
    def phi(self) -> dict[int, int]:
        return dict(self.pairs)

    @property
    def order(self) -> int:
        return len(self.pairs)

    @property
    def size(self) -> int:
        return self.left.order * self.right.order // len(self.pairs)

    @property
    def key(self):
        return (self.left.element_set, self.right.element_set, len(self.pairs), self.pairs)

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        return isinstance(other, BisetClass) and self.key == other.key

    def sort_key(self):
        return (len(self.pairs), self.pairs)

    def to_json(self) -> dict:
        return {"K": [a for a, _ in self.pairs], "phi": [b for _, b in self.pairs]}


def biset_class(G: Subgroup, H: Subgroup, K: Subgroup, phi: dict[int, int] | Sequence[int]) -> BisetClass:
    """``[K, phi]`` for ``K <= G`` and a homomorphism ``phi: K -> H`` (dict or table on ``K.elements``)."""
    P = G.parent
    if P is not H.parent:
        raise GroupMismatch("left and right groups live in different parents")
    if not K <= G:
        raise GroupMismatch("K is not a subgroup of the left group")
    if not isinstance(phi, dict):
        phi = dict(zip(K.elements, phi))
    for a in K.elements:
        if phi[a] not in H:
            raise GroupMismatch("phi does not land in the right group")
        for b in K.elements:
            if phi[P.mul(a, b)] != P.mul(phi[a], phi[b]):
                raise GroupMismatch("phi is not a homomorphism")
    return _canonical(G, H, [(a, phi[a]) for a in K.elements])


def _canonical(G: Subgroup, H: Subgroup, pairs) -> BisetClass:
    P = G.parent
    ks = np.array([a for a, _ in pairs], dtype=np.int64)
    vs = np.array([b for _, b in pairs], dtype=np.int64)
    best = None
    conj_cache = {}
    for b in H.elements:
        bv = conj_cache.get(b)
        if bv is None:
            bv = conj_cache[b] = np.array([P.conj(b, v) for v in vs], dtype=np.int64)
        for a in G.elements:
            ka = [P.conj(a, k) for k in ks]
            cand = tuple(sorted(zip(ka, bv.tolist())))
            if best is None or cand < best:
                best = cand
    return BisetClass(G, H, best)


@dataclass
class Biset:
    """Finite left-free biset stored as class multiplicities."""

    left: Subgroup
    right: Subgroup
    counts: Counter = field(default_factory=Counter)

    @classmethod
    def of(cls, c: BisetClass, mult: int = 1) -> Biset:
        return cls(c.left, c.right, Counter({c: mult}))

    def classes(self) -> list[tuple[BisetClass, int]]:
        return sorted(((c, m) for c, m in self.counts.items() if m), key=lambda cm: cm[0].sort_key())

    @property
    def size(self) -> int:
        return sum(c.size * m for c, m in self.counts.items())

    def __add__(self, other: Biset) -> Biset:
        _same(self.left, other.left)
        _same(self.right, other.right)
        return Biset(self.left, self.right, self.counts + other.counts)

    def __rmul__(self, k: int) -> Biset:
        return Biset(self.left, self.right, Counter({c: k * m for c, m in self.counts.items()}))

    def __eq__(self, other):
        return (isinstance(other, Biset) and self.left == other.left and self.right == other.right
                and +self.counts == +other.counts)

    def compose(self, other: Biset) -> Biset:
        """``self ∘ other`` for ``self`` a ``(G, H)``-biset and ``other`` an ``(H, J)``-biset."""
        _same(self.right, other.left)
        out = Counter()
        for a, m in self.counts.items():
            for b, n in other.counts.items():
                for c, k in compose_classes(a, b).counts.items():
                    out[c] += m * n * k
        return Biset(self.left, other.right, out)

    def to_json(self) -> list[dict]:
        return [dict(c.to_json(), mult=m) for c, m in self.classes()]


def _same(A: Subgroup, B: Subgroup):
    if A != B:
        raise GroupMismatch("biset groups do not match")


def compose_classes(a: BisetClass, b: BisetClass) -> Biset:
    """Double coset formula ``[K,phi] ∘ [L,psi] = sum_x [phi^-1(phi(K) ∩ xLx^-1), psi c_{x^-1} phi]``."""
    _same(a.right, b.left)
    P = a.left.parent
    H = a.right
    phi = a.phi
    psi = b.phi
    Kel = [k for k, _ in a.pairs]
    phiK = set(phi.values())
    Lset = set(psi)
    seen: set[int] = set()
    out = Counter()
    for x in H.elements:
        if x in seen:
            continue
        dc = {P.mul(P.mul(u, x), l) for u in phiK for l in Lset}
        seen |= dc
        xi = P.inv(x)
        pairs = []
        for k in Kel:
            y = P.conj(xi, phi[k])     # x^-1 phi(k) x
            if y in Lset:
                pairs.append((k, psi[y]))
        out[_canonical(a.left, b.right, pairs)] += 1
    return Biset(a.left, b.right, out)


# ---------------------------------------------------------------- explicit bisets

@dataclass
class ExplicitBiset:
    """A finite set ``0..n-1`` with action tables ``left[g_pos, x]`` and ``right[x, h_pos]``."""

    left_group: Subgroup
    right_group: Subgroup
    left: np.ndarray
    right: np.ndarray

    @property
    def n(self) -> int:
        return self.left.shape[1]


def explicit_from_group(G: FiniteGroup | Subgroup, left: Subgroup, right: Subgroup) -> ExplicitBiset:
    """``G`` with ``left`` multiplying on the left and ``right`` on the right."""
    els = list(G.elements) if isinstance(G, Subgroup) else list(range(G.order))
    P = left.parent
    pos = {g: i for i, g in enumerate(els)}
    L = np.array([[pos[P.mul(a, g)] for g in els] for a in left.elements], dtype=np.int64)
    R = np.array([[pos[P.mul(g, b)] for b in right.elements] for g in els], dtype=np.int64)
    return ExplicitBiset(left, right, L, R)


def explicit_from_class(c: BisetClass) -> ExplicitBiset:
    """``G x_K H`` with ``(gk, h) ~ (g, phi(k) h)``, points indexed in sorted order of canonical pairs."""
    P = c.left.parent
    G, H = c.left, c.right
    phi = c.phi
    K = list(phi)

    def canon(g, h):
        return min((P.mul(g, k), P.mul(P.inv(phi[k]), h)) for k in K)

    points = sorted({canon(g, h) for g in G.elements for h in H.elements})
    pos = {x: i for i, x in enumerate(points)}
    L = np.array([[pos[canon(P.mul(a, g), h)] for (g, h) in points] for a in G.elements], dtype=np.int64)
    R = np.array([[pos[canon(g, P.mul(h, b))] for b in H.elements] for (g, h) in points], dtype=np.int64)
    return ExplicitBiset(G, H, L, R)


def explicit_product(X: ExplicitBiset, Y: ExplicitBiset) -> ExplicitBiset:
    """``X x_H Y``: pairs ``(x, y)`` modulo ``(x h, y) ~ (x, h y)``."""
    _same(X.right_group, Y.left_group)
    H = X.right_group
    P = H.parent
    hpos = {h: i for i, h in enumerate(H.elements)}
    inv = [hpos[P.inv(h)] for h in H.elements]
    nx, ny = X.n, Y.n
    # orbit label of (x, y): min over h of (x h, h^-1 y)
    xs = X.right.T                     # [h, x]
    ys = Y.left[inv]                   # [h, y] = h^-1 y
    codes = xs[:, :, None] * ny + ys[:, None, :]
    label = codes.min(axis=0).ravel()
    reps, point = np.unique(label, return_inverse=True)
    ix, iy = reps // ny, reps % ny
    lookup = {int(v): i for i, v in enumerate(reps)}
    lab = label.reshape(nx, ny)
    Lt = np.array([[lookup[int(lab[X.left[g, x], y])] for x, y in zip(ix, iy)]
                   for g in range(X.left.shape[0])], dtype=np.int64).reshape(-1, len(reps))
    Rt = np.array([[lookup[int(lab[x, Y.right[y, j]])] for j in range(Y.right.shape[1])]
                   for x, y in zip(ix, iy)], dtype=np.int64).reshape(len(reps), -1)
    return ExplicitBiset(X.left_group, Y.right_group, Lt, Rt)


def decompose_biset(X: ExplicitBiset, left_free: bool = True) -> Biset:
    """Orbit decomposition into canonical classes.

    With ``left_free`` (the default) a nontrivial left stabilizer raises
    NotLeftFree.  Otherwise any biset whose point stabilizers meet ``1 x H``
    trivially is accepted; those stabilizers are still graphs ``Delta(K, phi)``.
    """
    G, H = X.left_group, X.right_group
    seen = np.zeros(X.n, dtype=bool)
    out = Counter()
    for x0 in range(X.n):
        if seen[x0]:
            continue
        orbit = np.unique(X.right[X.left[:, x0]].ravel())
        seen[orbit] = True
        if left_free and len(set(X.left[:, x0].tolist())) != G.order:
            raise NotLeftFree(f"point {x0} has a nontrivial left stabilizer")
        if len(set(X.right[x0].tolist())) != H.order:
            raise NotLeftFree(f"point {x0} has a nontrivial right stabilizer")
        # stabilizer: g x0 = x0 h  (i.e. (g, h) . x0 = g x0 h^-1 = x0)
        pairs = []
        right_of_x0 = {int(X.right[x0, j]): j for j in range(H.order)}
        for gi, g in enumerate(G.elements):
            y = int(X.left[gi, x0])
            j = right_of_x0.get(y)
            if j is not None:
                pairs.append((g, H.elements[j]))
        out[_canonical(G, H, pairs)] += 1
    return Biset(G, H, out)


# ---------------------------------------------------------------- characteristic bisets

@dataclass
class CharacteristicReport:
    F_generated: bool
    left_stable: bool
    right_stable: bool
    prime_to_p: bool
    Fc_generated: bool
    ratio: int
    failures: list[str]

    @property
    def characteristic(self) -> bool:
        return self.F_generated and self.left_stable and self.right_stable and self.prime_to_p

    def to_json(self) -> dict:
        return {"a_F_generated": self.F_generated, "b_left_stable": self.left_stable,
                "c_right_stable": self.right_stable, "d_prime_to_p": self.prime_to_p,
                "Fc_generated": self.Fc_generated, "size_over_S": self.ratio, "failures": self.failures}


def characteristic_checks(Omega: Biset, F: FusionSystem) -> CharacteristicReport:
    S = F.S
    _same(Omega.left, S)
    _same(Omega.right, S)
    failures = []
    fgen = fcgen = True
    for c, _ in Omega.classes():
        K = F.canonical(c.K)
        table = tuple(c.phi[k] for k in K.elements)
        if table not in {f.table for f in F.hom(K, S)}:
            fgen = False
            failures.append(f"class of order {c.order} is not in F")
        if not F.is_centric(K):
            fcgen = False
    left = right = True
    for P in F.subgroups:
        incl = biset_class(P, S, P, {x: x for x in P.elements})
        lhs_incl = Biset.of(incl).compose(Omega)
        back = biset_class(S, P, P, {x: x for x in P.elements})
        rhs_incl = Omega.compose(Biset.of(back))
        for f in F.hom(P, S):
            if f.is_identity():
                continue
            if Biset.of(biset_class(P, S, P, f.table)).compose(Omega) != lhs_incl:
                left = False
                failures.append(f"left stability fails for a morphism on a subgroup of order {P.order}")
            img = f.image
            inverse = {y: x for x, y in f.as_dict.items()}
            cls = biset_class(S, P, img, inverse)
            if Omega.compose(Biset.of(cls)) != rhs_incl:
                right = False
                failures.append(f"right stability fails for a morphism on a subgroup of order {P.order}")
    ratio = Omega.size // S.order
    prime = (Omega.size % S.order == 0) and ratio % F.p != 0
    if not prime:
        failures.append(f"|Omega|/|S| = {Omega.size / S.order} is divisible by {F.p}")
    return CharacteristicReport(fgen, left, right, prime, fcgen, ratio, failures)


def characteristic_from_group(G: FiniteGroup, S: Subgroup) -> Biset:
    """``G`` as an ``(S, S)``-biset by left and right multiplication."""
    return decompose_biset(explicit_from_group(G, S, S))


def classes_above(Omega: Biset, Q: Subgroup) -> bool:
    """Whether every class ``[K, phi]`` of ``Omega`` has ``K >= Q``."""
    return all(Q <= c.K for c, _ in Omega.classes())


def all_classes(G: Subgroup, H: Subgroup, subgroups: Iterable[Subgroup], min_order: int = 1,
                injective: bool = True) -> list[BisetClass]:
    """Every transitive ``(G, H)``-class ``[K, phi]`` with ``K`` among ``subgroups``.

    Left-free classes are exactly those with ``phi`` injective; pass
    ``injective=False`` to include every homomorphism.
    """
    P = G.parent
    found = set()
    for K in subgroups:
        if K.order < min_order or not K <= G:
            continue
        for table in _homomorphisms(P, K, H):
            if injective and len(set(table)) != K.order:
                continue
            found.add(_canonical(G, H, list(zip(K.elements, table))))
    return sorted(found, key=BisetClass.sort_key)


def _homomorphisms(P: FiniteGroup, K: Subgroup, H: Subgroup) -> list[tuple[int, ...]]:
    """All homomorphisms ``K -> H`` as tables on ``K.elements`` (via images of generators)."""
    gens = list(K.gens) or []
    out = set()

    def extend(assign):
        img = {0: 0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g, v in assign.items():
                y = P.mul(g, x)
                w = P.mul(v, img[x])
                if y in img:
                    if img[y] != w:
                        return None
                else:
                    img[y] = w
                    frontier.append(y)
        for a in K.elements:
            for b in K.elements:
                if img[P.mul(a, b)] != P.mul(img[a], img[b]):
                    return None
        return tuple(img[k] for k in K.elements)

    for choice in itertools.product(H.elements, repeat=len(gens)):
        t = extend(dict(zip(gens, choice)))
        if t is not None:
            out.add(t)
    return sorted(out)


__all__ = [
    "BisetClass", "Biset", "biset_class", "compose_classes", "ExplicitBiset", "explicit_from_group",
    "explicit_from_class", "explicit_product", "decompose_biset", "CharacteristicReport",
    "characteristic_checks", "characteristic_from_group", "classes_above", "all_classes",
]
