"""Permutation groups with fully enumerated elements.

Every group handled by the package is small enough that brute force over
the element list is exact and fast, so there are no stabilizer chains here.
Elements of a :class:`FiniteGroup` are referred to by their index in the
sorted element list; index 0 is always the identity.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .errors import ClosureTooLarge, InvalidPermutation, NotSubgroup, TooLarge

DEFAULT_GROUP_BOUND = 10**4
DEFAULT_SUBGROUP_BOUND = 2**10
_TABLE_LIMIT = 512


@dataclass(frozen=True)
class Permutation:
    """A bijection of ``{0, ..., n-1}`` stored as its image array."""

    images: tuple[int, ...]

    def __post_init__(self):
        imgs = tuple(int(i) for i in self.images)
        if sorted(imgs) != list(range(len(imgs))):
            raise InvalidPermutation(f"not a bijection on 0..{len(imgs) - 1}: {imgs}")
        object.__setattr__(self, "images", imgs)

    @property
    def degree(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, degree: int) -> Permutation:
        return cls(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, degree: int, cycles: Iterable[Sequence[int]], base: int = 0) -> Permutation:
        """Build from disjoint cycles; ``base=1`` accepts 1-based cycle notation."""
        imgs = list(range(degree))
        for cyc in cycles:
            pts = [c - base for c in cyc]
            for a, b in zip(pts, pts[1:] + pts[:1]):
                if not 0 <= a < degree:
                    raise InvalidPermutation(f"point {a + base} outside degree {degree}")
                imgs[a] = b
        return cls(tuple(imgs))

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: Permutation) -> Permutation:
        # (self * other)(x) = self(other(x))
        return Permutation(tuple(self.images[i] for i in other.images))

    def inverse(self) -> Permutation:
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))


class FiniteGroup:
    """A permutation group with its elements listed in lexicographic order."""

    def __init__(self, degree: int, generators: Sequence[Permutation], elements: list[tuple[int, ...]]):
        self.degree = degree
        self.generators = tuple(generators)
        self.elements = elements
        self.index = {e: i for i, e in enumerate(elements)}
        self.order = len(elements)
        self._inv = [self.index[Permutation(e).inverse().images] for e in elements]
        self._table = None
        self._cache: dict[tuple[int, int], int] = {}
        if self.order <= _TABLE_LIMIT:
            self._table = [[self._compose(i, j) for j in range(self.order)] for i in range(self.order)]
        self.generator_indices = tuple(self.index[g.images] for g in self.generators)

    def _compose(self, i: int, j: int) -> int:
        a, b = self.elements[i], self.elements[j]
        return self.index[tuple(a[x] for x in b)]

    def mul(self, i: int, j: int) -> int:
        if self._table is not None:
            return self._table[i][j]
        key = (i, j)
        r = self._cache.get(key)
        if r is None:
            r = self._cache[key] = self._compose(i, j)
        return r

    def inv(self, i: int) -> int:
        return self._inv[i]

    def conj(self, g: int, x: int) -> int:
        """``g x g^-1``."""
        return self.mul(self.mul(g, x), self._inv[g])

    def power(self, x: int, n: int) -> int:
        r = 0
        for _ in range(n):
            r = self.mul(r, x)
        return r

    def element_order(self, x: int) -> int:
        n, y = 1, x
        while y != 0:
            y = self.mul(y, x)
            n += 1
        return n

    def permutation(self, i: int) -> Permutation:
        return Permutation(self.elements[i])

    def whole(self) -> Subgroup:
        return Subgroup(self, frozenset(range(self.order)), self.generator_indices)

    def __repr__(self):
        return f"FiniteGroup(degree={self.degree}, order={self.order})"


@dataclass(frozen=True, eq=False)
class Subgroup:
    """A subgroup of ``parent`` given by its set of element indices."""

    parent: FiniteGroup
    element_set: frozenset
    gens: tuple[int, ...] = ()
    elements: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(sorted(self.element_set)))

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self.element_set

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other):
        return isinstance(other, Subgroup) and self.parent is other.parent and self.element_set == other.element_set

    def __hash__(self):
        return hash(self.element_set)

    def __le__(self, other: Subgroup) -> bool:
        return self.element_set <= other.element_set

    def __lt__(self, other: Subgroup) -> bool:
        return self.element_set < other.element_set

    def sort_key(self):
        return (self.order, self.elements)

    def __repr__(self):
        return f"Subgroup(order={self.order}, elements={self.elements})"


def _check_bound(n: int, bound: int):
    if n > bound:
        raise ClosureTooLarge(f"group closure exceeds bound {bound}")


def enumerate_group(generators: Sequence[Permutation | Sequence[int]], degree: int | None = None,
                    bound: int = DEFAULT_GROUP_BOUND) -> FiniteGroup:
    """Enumerate the group generated by ``generators`` by orbit closure."""
    gens = [g if isinstance(g, Permutation) else Permutation(tuple(g)) for g in generators]
    if degree is None:
        degree = gens[0].degree if gens else 1
    for g in gens:
        if g.degree != degree:
            raise InvalidPermutation(f"generator degree {g.degree} differs from {degree}")
    ident = tuple(range(degree))
    seen = {ident}
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = tuple(g.images[i] for i in x)
            if y not in seen:
                seen.add(y)
                _check_bound(len(seen), bound)
                queue.append(y)
    return FiniteGroup(degree, gens, sorted(seen))


def closure(G: FiniteGroup, gens: Iterable[int], start: Iterable[int] = (0,)) -> frozenset:
    """Element set of the subgroup generated by ``gens`` (and ``start``)."""
    gens = [g for g in gens if g != 0]
    seen = set(start) | {0}
    queue = deque(seen)
    while queue:
        x = queue.popleft()
        for g in gens:
            y = G.mul(x, g)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return frozenset(seen)


def subgroup(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    gens = tuple(gens)
    return Subgroup(G, closure(G, gens), tuple(g for g in gens if g != 0))


def subgroup_from_elements(G: FiniteGroup, elements: Iterable[int]) -> Subgroup:
    els = frozenset(elements) | {0}
    for a in els:
        for b in els:
            if G.mul(a, b) not in els:
                raise NotSubgroup("element set is not closed under multiplication")
    return Subgroup(G, els, minimal_generators(G, sorted(els)))


def minimal_generators(G: FiniteGroup, elements: Sequence[int]) -> tuple[int, ...]:
    """Greedy generating set: scan ``elements`` in order, keep those not yet generated."""
    gens: list[int] = []
    current = frozenset({0})
    for x in elements:
        if x not in current:
            gens.append(x)
            current = closure(G, gens)
    return tuple(gens)


def _as_subgroup(H) -> Subgroup:
    return H.whole() if isinstance(H, FiniteGroup) else H


def all_subgroups(S, bound: int = DEFAULT_SUBGROUP_BOUND) -> list[Subgroup]:
    """Every subgroup of ``S`` exactly once, sorted by (order, element list).

    Each subgroup is reached from the trivial group by adjoining one element
    at a time, so growing every known subgroup by every outside element
    produces the whole lattice.
    """
    S = _as_subgroup(S)
    if S.order > bound:
        raise TooLarge(f"|S| = {S.order} exceeds subgroup-enumeration bound {bound}")
    G = S.parent
    found = {frozenset({0}): Subgroup(G, frozenset({0}), ())}
    frontier = [frozenset({0})]
    while frontier:
        nxt = []
        for H in frontier:
            gens = found[H].gens
            for x in S.elements:
                if x in H:
                    continue
                K = closure(G, gens + (x,))
                if K not in found:
                    found[K] = Subgroup(G, K, gens + (x,))
                    nxt.append(K)
        frontier = nxt
    return sorted(found.values(), key=Subgroup.sort_key)


def conjugate(G: FiniteGroup, g: int, P: Subgroup) -> Subgroup:
    """``g P g^-1``."""
    return Subgroup(G, frozenset(G.conj(g, x) for x in P.elements), tuple(G.conj(g, x) for x in P.gens))


def transporter(G, P: Subgroup, Q: Subgroup) -> tuple[int, ...]:
    """``{g in G : g P g^-1 <= Q}`` in increasing index order."""
    G = _as_subgroup(G)
    par = G.parent
    gens = P.gens or P.elements
    out = []
    for g in G.elements:
        if all(par.conj(g, x) in Q.element_set for x in gens):
            out.append(g)
    return tuple(out)


def normalizer(G, P: Subgroup) -> Subgroup:
    G = _as_subgroup(G)
    return Subgroup(G.parent, frozenset(transporter(G, P, P)))


def centralizer(G, P: Subgroup) -> Subgroup:
    G = _as_subgroup(G)
    par = G.parent
    gens = P.gens or P.elements
    els = frozenset(g for g in G.elements if all(par.mul(g, x) == par.mul(x, g) for x in gens))
    return Subgroup(par, els)


def center(P: Subgroup) -> Subgroup:
    return centralizer(P, P)


def is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def op_residual(H: Subgroup, p: int) -> Subgroup:
    """``O^p(H)``: the subgroup generated by the elements of order prime to ``p``."""
    G = H.parent
    gens = [x for x in H.elements if x != 0 and G.element_order(x) % p != 0]
    return subgroup(G, minimal_generators(G, gens)) if gens else Subgroup(G, frozenset({0}), ())


def is_normal(H: Subgroup, N: Subgroup) -> bool:
    G = H.parent
    return all(G.conj(h, x) in N.element_set for h in (H.gens or H.elements) for x in N.elements)


class LocalSubgroups(NamedTuple):
    normalizer: Subgroup
    centralizer: Subgroup
    center: Subgroup
    op_centralizer: Subgroup


def local_subgroups(G, P: Subgroup, p: int) -> LocalSubgroups:
    """``(N_G(P), C_G(P), Z(P), O^p(C_G(P)))``."""
    C = centralizer(G, P)
    return LocalSubgroups(normalizer(G, P), C, center(P), op_residual(C, p))


def sylow_subgroup(G, p: int) -> Subgroup:
    """A Sylow ``p``-subgroup, grown one factor ``p`` at a time inside normalizers.

    If ``P`` is a ``p``-subgroup that is not Sylow then ``p`` divides
    ``[N_G(P):P]``, so some ``g`` in ``N_G(P)`` outside ``P`` has ``g^p`` in
    ``P``; the first such ``g`` in index order is adjoined.
    """
    G = _as_subgroup(G)
    par = G.parent
    target = 1
    n = G.order
    while n % p == 0:
        n //= p
        target *= p
    P = Subgroup(par, frozenset({0}), ())
    while P.order < target:
        N = normalizer(G, P)
        for g in N.elements:
            if g in P.element_set:
                continue
            if par.power(g, p) in P.element_set:
                P = Subgroup(par, closure(par, P.gens + (g,)), P.gens + (g,))
                break
        else:  # pragma: no cover - impossible by Sylow theory
            raise RuntimeError("failed to grow p-subgroup")
    return P


def is_sylow(G, S: Subgroup, p: int) -> bool:
    G = _as_subgroup(G)
    return is_p_power(S.order, p) and (G.order // S.order) % p != 0


def prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        while n % d == 0:
            if d not in out:
                out.append(d)
            n //= d
        d += 1
    if n > 1 and n not in out:
        out.append(n)
    return out


def index(G, P: Subgroup) -> int:
    return _as_subgroup(G).order // P.order


def left_coset_reps(Q: Subgroup, P: Subgroup, choose=min) -> tuple[int, ...]:
    """One representative ``t`` per left coset ``tP`` of ``P`` in ``Q``."""
    G = Q.parent
    seen: set[int] = set()
    reps = []
    for t in Q.elements:
        if t in seen:
            continue
        coset = [G.mul(t, x) for x in P.elements]
        seen.update(coset)
        reps.append(choose(coset))
    return tuple(sorted(reps))


def right_coset_reps(Q: Subgroup, P: Subgroup, choose=min) -> dict[int, int]:
    """Map every element of ``Q`` to the chosen representative of its coset ``Px``."""
    G = Q.parent
    rep: dict[int, int] = {}
    for t in Q.elements:
        if t in rep:
            continue
        coset = [G.mul(x, t) for x in P.elements]
        r = choose(coset)
        for y in coset:
            rep[y] = r
    return rep


def gcd_exponent(n: int, p: int) -> int:
    """Exponent of ``p`` in ``n``."""
    k = 0
    while n % p == 0 and n:
        n //= p
        k += 1
    return k


__all__ = [
    "Permutation", "FiniteGroup", "Subgroup", "LocalSubgroups", "enumerate_group", "all_subgroups",
    "transporter", "local_subgroups", "normalizer", "centralizer", "center", "op_residual",
    "sylow_subgroup", "subgroup", "closure", "conjugate",
]
