"""Fusion systems ``F_S(G)`` realized by a finite group and a Sylow subgroup."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Protocol, Sequence

from .errors import FactorizationNotFound, NotSubgroup
from .groups import (FiniteGroup, Subgroup, all_subgroups, centralizer, is_normal, is_sylow,
                     subgroup_from_elements, transporter)


@dataclass(frozen=True)
class FusionMorphism:
    """``c_g : P -> Q``; ``table[i]`` is the image of ``P.elements[i]``.

    Two morphisms are equal iff domain, codomain and table agree; the
    witness is bookkeeping only.
    """

    domain: Subgroup
    codomain: Subgroup
    table: tuple[int, ...]
    witness: int = field(compare=False, default=0)

    def __call__(self, x: int) -> int:
        return self.table[self.domain.elements.index(x)]

    @cached_property
    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.domain.elements, self.table))

    @cached_property
    def image(self) -> Subgroup:
        return subgroup_from_elements(self.domain.parent, self.table)

    def then(self, other: FusionMorphism) -> FusionMorphism:
        """``other ∘ self``."""
        if not self.image <= other.domain:
            raise NotSubgroup("image does not lie in the next domain")
        G = self.domain.parent
        d = other.as_dict
        return FusionMorphism(self.domain, other.codomain, tuple(d[y] for y in self.table),
                              G.mul(other.witness, self.witness))

    def restrict(self, P: Subgroup, codomain: Subgroup | None = None) -> FusionMorphism:
        d = self.as_dict
        return FusionMorphism(P, codomain or self.codomain, tuple(d[x] for x in P.elements), self.witness)

    def corestrict(self, Q: Subgroup) -> FusionMorphism:
        return FusionMorphism(self.domain, Q, self.table, self.witness)

    def is_identity(self) -> bool:
        return self.table == self.domain.elements

    def __hash__(self):
        return hash((self.domain.element_set, self.codomain.element_set, self.table))

    def __eq__(self, other):
        return (isinstance(other, FusionMorphism) and self.domain == other.domain
                and self.codomain == other.codomain and self.table == other.table)


class FusionSystem:
    """``F_S(G)``: objects are the subgroups of ``S``, morphisms are conjugations by ``G``."""

    def __init__(self, G: FiniteGroup, S: Subgroup, p: int):
        if not is_sylow(G, S, p):
            raise NotSubgroup(f"S is not a Sylow {p}-subgroup of G")
        self.G, self.S, self.p = G, S, p
        self.subgroups = all_subgroups(S)
        self._id = {H.element_set: i for i, H in enumerate(self.subgroups)}
        self._hom: dict[tuple[int, int], tuple[FusionMorphism, ...]] = {}

    def canonical(self, H: Subgroup) -> Subgroup:
        """The stored subgroup object with the same elements (carries generators)."""
        return self.subgroups[self._id[H.element_set]]

    def subgroup_id(self, H: Subgroup) -> int:
        return self._id[H.element_set]

    def hom(self, P: Subgroup, Q: Subgroup) -> tuple[FusionMorphism, ...]:
        """``Hom_F(P, Q)``, one entry per map table, sorted by table."""
        key = (self.subgroup_id(P), self.subgroup_id(Q))
        out = self._hom.get(key)
        if out is None:
            P, Q = self.canonical(P), self.canonical(Q)
            G = self.G
            by_table: dict[tuple[int, ...], int] = {}
            for g in transporter(G.whole(), P, Q):
                t = tuple(G.conj(g, x) for x in P.elements)
                if t not in by_table:
                    by_table[t] = g
            out = tuple(FusionMorphism(P, Q, t, g) for t, g in sorted(by_table.items()))
            self._hom[key] = out
        return out

    def aut(self, P: Subgroup) -> tuple[FusionMorphism, ...]:
        return self.hom(P, P)

    def conjugates(self, P: Subgroup) -> list[Subgroup]:
        """``P^F``, sorted canonically."""
        imgs = {self.subgroup_id(f.image) for f in self.hom(P, self.S)}
        return [self.subgroups[i] for i in sorted(imgs)]

    def is_centric(self, P: Subgroup) -> bool:
        return all(centralizer(self.S, Q) <= Q for Q in self.conjugates(P))

    @cached_property
    def centric_objects(self) -> list[Subgroup]:
        return [P for P in self.subgroups if self.is_centric(P)]

    def is_normal_in_F(self, Q: Subgroup) -> bool:
        """Every ``phi in Hom_F(P, S)`` extends to ``PQ`` with ``Q`` mapped onto itself."""
        Q = self.canonical(Q)
        if not is_normal(self.S, Q):
            return False
        G = self.G
        for P in self.subgroups:
            PQ = subgroup_from_elements(G, {G.mul(a, b) for a in P.elements for b in Q.elements})
            ext = {}
            for psi in self.hom(PQ, self.S):
                if psi.restrict(Q).image == Q:
                    ext.setdefault(psi.restrict(P).table, psi)
            for phi in self.hom(P, self.S):
                if phi.table not in ext:
                    return False
        return True

    def __repr__(self):
        return f"FusionSystem(|G|={self.G.order}, |S|={self.S.order}, p={self.p})"


def hom_F(F: FusionSystem, P: Subgroup, Q: Subgroup) -> tuple[FusionMorphism, ...]:
    return F.hom(P, Q)


def is_centric(F: FusionSystem, P: Subgroup) -> bool:
    return F.is_centric(P)


def centric_objects(F: FusionSystem) -> list[Subgroup]:
    return F.centric_objects


@dataclass(frozen=True)
class FusionPredicates:
    op_normal: Subgroup
    constrained: bool
    weakly_closed: tuple[Subgroup, ...]
    normal_in_F: tuple[Subgroup, ...]


def fusion_predicates(F: FusionSystem) -> FusionPredicates:
    """``O_p(F)``, whether ``F`` is constrained, and the weakly closed subgroups."""
    normal = tuple(Q for Q in F.subgroups if F.is_normal_in_F(Q))
    largest = max(normal, key=lambda H: H.order)
    if not all(Q <= largest for Q in normal):  # pragma: no cover - products of normal subgroups are normal
        raise RuntimeError("normal subgroups of F have no largest member")
    weak = tuple(P for P in F.subgroups if F.conjugates(P) == [P])
    return FusionPredicates(largest, F.is_centric(largest), weak, normal)


# ---------------------------------------------------------------- Alperin factorization

class AutomorphismSource(Protocol):
    """What the factorization needs from a linking system."""

    objects: Sequence[Subgroup]

    def aut_ids(self, Q: Subgroup) -> Sequence[int]: ...

    def projection(self, mid: int) -> FusionMorphism: ...


@dataclass(frozen=True)
class AlperinStep:
    centric: Subgroup
    morphism: int          # id of the automorphism in the linking system
    source: Subgroup       # P_{i-1}
    target: Subgroup       # P_i = pi(psi)(P_{i-1})


@dataclass(frozen=True)
class AlperinDecomposition:
    morphism: FusionMorphism
    steps: tuple[AlperinStep, ...]

    def recompose(self, L: AutomorphismSource) -> tuple[int, ...]:
        """Map table obtained by running the steps; equals ``morphism.table``."""
        cur = list(self.morphism.domain.elements)
        for st in self.steps:
            d = L.projection(st.morphism).as_dict
            cur = [d[x] for x in cur]
        return tuple(cur)


def alperin_factorize(F: FusionSystem, L: AutomorphismSource, phi: FusionMorphism,
                      reverse: bool = False) -> AlperinDecomposition:
    """Shortest decomposition of ``phi: P -> S`` into restricted centric automorphisms.

    Breadth-first over map tables ``P -> S``.  Moves apply ``pi(psi)`` for
    ``psi in Aut_L(Q)``, ``Q`` centric containing the current image, in
    canonical order (reversed when ``reverse``); the first path reaching
    ``phi``'s table wins.
    """
    G = F.G
    P = phi.domain
    start = tuple(P.elements)
    goal = tuple(phi.table)
    objects = list(L.objects)
    if reverse:
        objects.reverse()
    moves = []
    for Q in objects:
        ids = list(L.aut_ids(Q))
        if reverse:
            ids.reverse()
        moves.append((Q, [(m, L.projection(m).as_dict) for m in ids]))
    parent: dict[tuple[int, ...], tuple | None] = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            break
        cur_set = set(cur)
        for Q, auts in moves:
            if not cur_set <= Q.element_set:
                continue
            for m, d in auts:
                nxt = tuple(d[x] for x in cur)
                if nxt not in parent:
                    parent[nxt] = (cur, Q, m)
                    queue.append(nxt)
    if goal not in parent:
        raise FactorizationNotFound(f"no decomposition found for morphism with witness {phi.witness}")
    steps = []
    node = goal
    while parent[node] is not None:
        prev, Q, m = parent[node]
        steps.append(AlperinStep(Q, m, subgroup_from_elements(G, prev), subgroup_from_elements(G, node)))
        node = prev
    steps.reverse()
    return AlperinDecomposition(phi, tuple(steps))


__all__ = [
    "FusionMorphism", "FusionSystem", "hom_F", "is_centric", "centric_objects", "FusionPredicates",
    "fusion_predicates", "AlperinStep", "AlperinDecomposition", "alperin_factorize",
]
