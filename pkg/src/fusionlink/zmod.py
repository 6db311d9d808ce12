"""Exact linear algebra over ``Z/p^e``.

Vectors are 1-d ``int64`` numpy arrays with entries in ``[0, p^e)``; a
matrix ``A`` acts on column vectors, ``y = A @ x``.  Submodules of
``(Z/p^e)^n`` are kept as Howell bases, which make membership, canonical
coset representatives and submodule equality decidable by plain reduction.

For ``e == 1`` the ring is a field and the heavy entry points (row spaces and
kernels of large matrices) switch to a blocked RREF that reduces whole
chunks of rows at once with a BLAS product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_MAX_MODULUS = 2**20


def valuation(x: int, p: int, e: int) -> int:
    """``p``-adic valuation of ``x`` mod ``p^e`` (``e`` for zero)."""
    x = int(x) % (p**e)
    if x == 0:
        return e
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


class Howell:
    """Howell basis of a submodule of ``(Z/p^e)^n``, built incrementally.

    At most one row per pivot column; the pivot entry is ``p^w``.  Each time a
    row with pivot valuation ``w`` is stored, ``p^(e-w)`` times it (which has
    a zero pivot) is inserted as well.  That closure is the Howell property:
    it makes greedy reduction a complete membership test.
    """

    def __init__(self, p: int, e: int, n: int):
        self.p, self.e, self.n = p, e, n
        self.q = p**e
        if self.q > _MAX_MODULUS:
            raise ValueError(f"modulus p^e = {self.q} too large")
        self.rows: dict[int, np.ndarray] = {}
        self.vals: dict[int, int] = {}
        self._sorted: list[int] | None = None

    @classmethod
    def from_rows(cls, rows, p: int, e: int, n: int | None = None) -> Howell:
        rows = np.asarray(rows, dtype=np.int64)
        if n is None:
            n = rows.shape[1] if rows.ndim == 2 else 0
        h = cls(p, e, n)
        if e == 1 and rows.ndim == 2 and rows.shape[0] > 64:
            R, piv = rref_mod_p(rows, p)
            for i, c in enumerate(piv):
                h.rows[c] = R[i].copy()
                h.vals[c] = 0
            return h
        for r in rows:
            h.insert(r)
        return h

    def copy(self) -> Howell:
        h = Howell(self.p, self.e, self.n)
        h.rows = {c: r.copy() for c, r in self.rows.items()}
        h.vals = dict(self.vals)
        return h

    @property
    def pivots(self) -> list[int]:
        if self._sorted is None:
            self._sorted = sorted(self.rows)
        return self._sorted

    def __len__(self):
        return len(self.rows)

    def _store(self, c: int, x: np.ndarray, v: int, stack: list):
        u = int(x[c]) // self.p**v
        if u != 1:
            x = (x * pow(u, -1, self.q)) % self.q
        self.rows[c] = x
        self.vals[c] = v
        self._sorted = None
        if v > 0:
            sat = (x * self.p ** (self.e - v)) % self.q
            if sat.any():
                stack.append(sat)

    def insert(self, vec) -> bool:
        """Add ``vec`` to the generating set; return whether the span grew."""
        x0 = np.asarray(vec, dtype=np.int64) % self.q
        if not x0.any():
            return False
        grew = False
        stack = [x0]
        p, q = self.p, self.q
        while stack:
            x = stack.pop()
            while True:
                nz = np.flatnonzero(x)
                if nz.size == 0:
                    break
                c = int(nz[0])
                a = int(x[c])
                v = valuation(a, p, self.e)
                r = self.rows.get(c)
                if r is None:
                    self._store(c, x, v, stack)
                    grew = True
                    break
                w = self.vals[c]
                if v >= w:
                    x = (x - (a // p**w) * r) % q
                    continue
                self._store(c, x, v, stack)
                grew = True
                x = r
                # the displaced row is reduced by the new pivot on the next pass
        return grew

    def reduce(self, vec) -> np.ndarray:
        """Canonical representative of ``vec`` modulo the submodule."""
        x = np.asarray(vec, dtype=np.int64) % self.q
        p, q = self.p, self.q
        for c in self.pivots:
            a = int(x[c])
            if a == 0:
                continue
            k = a // p ** self.vals[c]
            if k:
                x = (x - k * self.rows[c]) % q
        return x

    def contains(self, vec) -> bool:
        return not self.reduce(vec).any()

    def contains_module(self, other: Howell) -> bool:
        return all(self.contains(r) for r in other.rows.values())

    def canonical(self) -> np.ndarray:
        """Reduced Howell matrix; equal submodules give identical arrays."""
        piv = self.pivots
        out = []
        p, q = self.p, self.q
        for i, c in enumerate(piv):
            x = self.rows[c].copy()
            for c2 in piv[i + 1:]:
                a = int(x[c2])
                k = a // p ** self.vals[c2]
                if k:
                    x = (x - k * self.rows[c2]) % q
            out.append(x)
        if not out:
            return np.zeros((0, self.n), dtype=np.int64)
        return np.array(out, dtype=np.int64)

    def __eq__(self, other):
        if not isinstance(other, Howell):
            return NotImplemented
        return (self.q == other.q and self.n == other.n and self.pivots == other.pivots
                and np.array_equal(self.canonical(), other.canonical()))

    def generators(self) -> np.ndarray:
        return self.canonical()

    def order(self) -> int:
        """Number of elements of the submodule."""
        return self.p ** sum(self.e - v for v in self.vals.values())


def rref_mod_p(A, p: int, chunk: int = 2048) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``A`` over ``F_p``; returns ``(R, pivots)``.

    Rows are consumed in chunks.  Each chunk is first cleared against the
    current basis in one matrix product, then the few new pivots it carries
    are eliminated densely and folded back into the basis.
    """
    if sp.issparse(A):
        A = A.tocsr()
    m = A.shape[0]
    n = A.shape[1]
    R = np.zeros((0, n), dtype=np.int64)
    piv: list[int] = []
    for start in range(0, m, chunk):
        X = A[start:start + chunk]
        X = (X.toarray() if sp.issparse(X) else np.asarray(X)).astype(np.int64) % p
        X = X[X.any(axis=1)]
        if X.shape[0] == 0:
            continue
        if piv:
            X = _mod(X - _matmul_mod(X[:, piv], R, p), p)
            X = X[X.any(axis=1)]
            if X.shape[0] == 0:
                continue
        N, npiv = _rref_dense(X, p)
        if not npiv:
            continue
        if piv:
            R = _mod(R - _matmul_mod(R[:, npiv], N, p), p)
        R = np.vstack([R, N])
        piv = piv + npiv
        order = np.argsort(piv, kind="stable")
        R = R[order]
        piv = [piv[i] for i in order]
    return R, piv


def _mod(X, p):
    return np.mod(X, p)


def _matmul_mod(A, B, p):
    # exact in float64 while inner_dim * (p-1)^2 < 2^53
    if A.shape[1] * (p - 1) ** 2 < 2**52:
        return np.mod(np.rint(A.astype(np.float64) @ B.astype(np.float64)).astype(np.int64), p)
    return np.mod(A @ B, p)


def _rref_dense(X: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    X = X.copy()
    m, n = X.shape
    r = 0
    piv = []
    active = np.flatnonzero(X.any(axis=0))
    for c in active:
        if r == m:
            break
        col = X[r:, c]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            X[[r, i]] = X[[i, r]]
        a = int(X[r, c])
        if a != 1:
            X[r] = (X[r] * pow(a, -1, p)) % p
        colv = X[:, c].copy()
        colv[r] = 0
        rows = np.flatnonzero(colv)
        if rows.size:
            X[rows] = (X[rows] - np.outer(colv[rows], X[r])) % p
        piv.append(int(c))
        r += 1
    return X[:r], piv


def row_space(A, p: int, e: int) -> Howell:
    """Howell basis of the span of the rows of ``A``."""
    if sp.issparse(A):
        n = A.shape[1]
        if e == 1:
            R, piv = rref_mod_p(A, p)
            h = Howell(p, e, n)
            for i, c in enumerate(piv):
                h.rows[c] = R[i].copy()
                h.vals[c] = 0
            return h
        A = A.toarray()
    A = np.asarray(A, dtype=np.int64)
    return Howell.from_rows(A, p, e, A.shape[1] if A.ndim == 2 else 0)


def column_space(A, p: int, e: int) -> Howell:
    """Howell basis of the image of ``x -> A x``."""
    if sp.issparse(A):
        return row_space(A.T.tocsr(), p, e)
    A = np.asarray(A, dtype=np.int64)
    return Howell.from_rows(A.T, p, e, A.shape[0])


def kernel(A, p: int, e: int) -> Howell:
    """Howell basis of ``{x : A x = 0}``."""
    n = A.shape[1]
    if A.shape[0] == 0:
        return Howell.from_rows(np.eye(n, dtype=np.int64), p, e, n)
    H = row_space(A, p, e)
    if e == 1:
        piv = H.pivots
        free = [c for c in range(n) if c not in H.rows]
        if not free:
            return Howell(p, e, n)
        R = H.canonical()
        basis = np.zeros((len(free), n), dtype=np.int64)
        for j, f in enumerate(free):
            basis[j, f] = 1
        if piv:
            basis[:, piv] = (-R[:, free].T) % p
        return row_space(basis, p, e)
    Hm = H.canonical()
    return _kernel_augmented(Hm, p, e)


def _kernel_augmented(A: np.ndarray, p: int, e: int) -> Howell:
    m, n = A.shape
    aug = np.hstack([A.T % p**e, np.eye(n, dtype=np.int64)])
    h = Howell.from_rows(aug, p, e, m + n)
    out = Howell(p, e, n)
    for c in h.pivots:
        if c >= m:
            out.insert(h.rows[c][m:])
    return out


def preimage(B: np.ndarray, U: Howell) -> Howell:
    """``{x : B x in U}`` for a submodule ``U`` of the target."""
    p, e = U.p, U.e
    m, n = B.shape
    h = Howell(p, e, m + n)
    for j in range(n):
        row = np.zeros(m + n, dtype=np.int64)
        row[:m] = B[:, j]
        row[m + j] = 1
        h.insert(row)
    for u in U.rows.values():
        row = np.zeros(m + n, dtype=np.int64)
        row[:m] = u
        h.insert(row)
    out = Howell(p, e, n)
    for c in h.pivots:
        if c >= m:
            out.insert(h.rows[c][m:])
    return out


def intersect(U: Howell, V: Howell) -> Howell:
    """``U ∩ V`` as the image of ``{(a, b) : sum a_i u_i = sum b_j v_j}``."""
    p, e, n = U.p, U.e, U.n
    Ug = U.generators()
    Vg = V.generators()
    if len(Ug) == 0 or len(Vg) == 0:
        return Howell(p, e, n)
    M = np.hstack([Ug.T, (-Vg.T) % p**e])
    K = kernel(M, p, e)
    out = Howell(p, e, n)
    t = len(Ug)
    for r in K.rows.values():
        out.insert((r[:t] @ Ug) % p**e)
    return out


def solve(A: np.ndarray, b, p: int, e: int):
    """Some ``x`` with ``A x = b`` over ``Z/p^e``, or ``None``."""
    A = np.asarray(A, dtype=np.int64) % p**e
    m, n = A.shape
    h = Howell(p, e, m + n)
    for j in range(n):
        row = np.zeros(m + n, dtype=np.int64)
        row[:m] = A[:, j]
        row[m + j] = 1
        h.insert(row)
    return _solve_with(h, m, b)


def _solve_with(h: Howell, m: int, b):
    x = np.zeros(h.n, dtype=np.int64)
    x[:m] = np.asarray(b, dtype=np.int64) % h.q
    p, q = h.p, h.q
    for c in h.pivots:
        if c >= m:
            break
        a = int(x[c])
        if a == 0:
            continue
        w = h.vals[c]
        if a % p**w:
            return None
        x = (x - (a // p**w) * h.rows[c]) % q
    if x[:m].any():
        return None
    return (-x[m:]) % q


class Solver:
    """Reusable solver for ``A x = b`` with a fixed ``A``."""

    def __init__(self, A, p: int, e: int):
        A = np.asarray(A, dtype=np.int64) % p**e
        self.m, n = A.shape
        self.h = Howell(p, e, self.m + n)
        for j in range(n):
            row = np.zeros(self.m + n, dtype=np.int64)
            row[:self.m] = A[:, j]
            row[self.m + j] = 1
            self.h.insert(row)

    def __call__(self, b):
        return _solve_with(self.h, self.m, b)


@dataclass
class SmithData:
    """``U R V = D`` over ``Z/p^e``; only the column transform is kept."""

    exponents: list[int]
    V: np.ndarray
    Vinv: np.ndarray


def smith_mod(R: np.ndarray, p: int, e: int, t: int | None = None) -> SmithData:
    """Smith form over the local ring ``Z/p^e``.

    ``exponents[i]`` is the valuation of the ``i``-th diagonal entry, ``e``
    for coordinates past the rank, so ``(Z/p^e)^t / rowspace(R)`` is the
    sum of ``Z/p^{exponents[i]}``.
    """
    q = p**e
    A = np.asarray(R, dtype=np.int64) % q
    if t is None:
        t = A.shape[1]
    if A.ndim != 2 or A.shape[0] == 0:
        A = np.zeros((0, t), dtype=np.int64)
    m = A.shape[0]
    V = np.eye(t, dtype=np.int64)
    Vinv = np.eye(t, dtype=np.int64)
    vals_of = np.vectorize(lambda x: valuation(x, p, e), otypes=[np.int64])
    exps = []
    k = 0
    while k < min(m, t):
        sub = A[k:, k:]
        if not sub.any():
            break
        vals = vals_of(sub)
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        i += k
        j += k
        v = int(vals[i - k, j - k])
        if i != k:
            A[[k, i]] = A[[i, k]]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            V[:, [k, j]] = V[:, [j, k]]
            Vinv[[k, j]] = Vinv[[j, k]]
        u = int(A[k, k]) // p**v
        if u != 1:
            A[k] = (A[k] * pow(u, -1, q)) % q
        pv = p**v
        col = A[:, k].copy()
        col[k] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            A[rows] = (A[rows] - np.outer(col[rows] // pv, A[k])) % q
        rowk = A[k].copy()
        rowk[k] = 0
        cols = np.flatnonzero(rowk)
        if cols.size:
            c = rowk[cols] // pv
            A[:, cols] = (A[:, cols] - np.outer(A[:, k], c)) % q
            V[:, cols] = (V[:, cols] - np.outer(V[:, k], c)) % q
            Vinv[k] = (Vinv[k] + c @ Vinv[cols]) % q
        exps.append(v)
        k += 1
    exps += [e] * (t - len(exps))
    return SmithData(exps, V, Vinv)


def module_invariants(H: Howell) -> list[int]:
    """Exponents ``f_i`` with ``span(H) = sum Z/p^{f_i}``, ascending, zeros dropped."""
    G = H.generators()
    t = len(G)
    if t == 0:
        return []
    rel = kernel(G.T, H.p, H.e)  # coefficient vectors a with a @ G = 0
    Rm = rel.generators()
    sm = smith_mod(Rm, H.p, H.e, t)
    return sorted(f for f in sm.exponents if f > 0)


class FinAbGroup:
    """``sum_i Z/p^{f_i}`` with elements given by coordinate vectors."""

    def __init__(self, p: int, exponents):
        self.p = p
        self.exponents = list(exponents)
        self.rank = len(self.exponents)
        self.moduli = np.array([p**f for f in self.exponents], dtype=np.int64)

    @property
    def invariant_factors(self) -> list[int]:
        return sorted(self.p**f for f in self.exponents)

    @property
    def order(self) -> int:
        return self.p ** sum(self.exponents)

    def normalize(self, coords) -> np.ndarray:
        c = np.asarray(coords, dtype=np.int64)
        return np.mod(c, self.moduli if c.ndim == 1 else self.moduli[:, None])

    def embed(self, coords, E: int) -> np.ndarray:
        """Injective homomorphism into ``(Z/p^E)^rank``."""
        c = np.asarray(coords, dtype=np.int64)
        scale = np.array([self.p ** (E - f) for f in self.exponents], dtype=np.int64)
        if c.ndim == 1:
            return (np.mod(c, self.moduli) * scale) % self.p**E
        return (np.mod(c, self.moduli[:, None]) * scale[:, None]) % self.p**E

    def unembed(self, vec, E: int) -> np.ndarray:
        scale = np.array([self.p ** (E - f) for f in self.exponents], dtype=np.int64)
        v = np.asarray(vec, dtype=np.int64)
        return np.mod(v // scale, self.moduli)

    def identity(self) -> np.ndarray:
        return np.eye(self.rank, dtype=np.int64)


def top_exponent(*groups: FinAbGroup) -> int:
    return max([1] + [f for g in groups for f in g.exponents])


def hom_compose(B: np.ndarray, A: np.ndarray, target: FinAbGroup) -> np.ndarray:
    """Coordinate matrix of ``B ∘ A``."""
    return target.normalize(np.asarray(B, dtype=np.int64) @ np.asarray(A, dtype=np.int64))


def submodule(group: FinAbGroup, gens, E: int | None = None) -> Howell:
    """Subgroup of ``group`` spanned by the coordinate columns of ``gens``."""
    E = E or top_exponent(group)
    h = Howell(group.p, E, group.rank)
    gens = np.asarray(gens, dtype=np.int64)
    if gens.size == 0:
        return h
    for j in range(gens.shape[1]):
        h.insert(group.embed(gens[:, j], E))
    return h


def hom_image(M: np.ndarray, target: FinAbGroup, E: int | None = None) -> Howell:
    return submodule(target, M, E)


def hom_kernel(M: np.ndarray, source: FinAbGroup, target: FinAbGroup, E: int | None = None,
               within: np.ndarray | None = None) -> Howell:
    """Kernel of the homomorphism with coordinate matrix ``M`` (as a submodule of ``source``).

    With ``within`` (coordinate columns generating a subgroup ``U``), the
    kernel of the restriction to ``U`` is returned.
    """
    E = E or top_exponent(source, target)
    gens = source.identity() if within is None else np.asarray(within, dtype=np.int64)
    out = Howell(source.p, E, source.rank)
    if gens.size == 0 or source.rank == 0:
        return out
    imgs = np.asarray(M, dtype=np.int64) @ gens if target.rank else np.zeros((0, gens.shape[1]), dtype=np.int64)
    K = target.embed(imgs, E) if target.rank else np.zeros((0, gens.shape[1]), dtype=np.int64)
    # coefficient vectors a with K a = 0 (mod p^E); also account for the order of each generator
    rel = kernel(K, source.p, E) if K.shape[0] else Howell.from_rows(np.eye(gens.shape[1], dtype=np.int64), source.p, E)
    for a in rel.generators():
        out.insert(source.embed(gens @ a, E))
    return out


@dataclass
class IntegerSmith:
    """Diagonal ``d`` and column transform ``V`` with ``Z^n / rowspace(R) = sum Z/d_i``.

    Generator ``e_j`` maps to row ``j`` of ``V``; ``d_i == 0`` marks a free
    summand and ``d_i == 1`` a trivial one.
    """

    diagonal: list[int]
    V: np.ndarray

    @property
    def invariant_factors(self) -> list[int]:
        """Canonical invariant factors (each divides the next; zeros for free summands last)."""
        torsion = [abs(d) for d in self.diagonal if abs(d) > 1]
        free = sum(1 for d in self.diagonal if d == 0)
        prime_powers: dict[int, list[int]] = {}
        for d in torsion:
            n, f = d, 2
            while f * f <= n:
                if n % f == 0:
                    q = 1
                    while n % f == 0:
                        n //= f
                        q *= f
                    prime_powers.setdefault(f, []).append(q)
                f += 1
            if n > 1:
                prime_powers.setdefault(n, []).append(n)
        length = max((len(v) for v in prime_powers.values()), default=0)
        out = [1] * length
        for qs in prime_powers.values():
            for i, q in enumerate(sorted(qs, reverse=True)):
                out[length - 1 - i] *= q
        return out + [0] * free


def smith_int(R, n: int) -> IntegerSmith:
    """Integer Smith reduction of the relation matrix ``R`` (rows are relations)."""
    A = [list(map(int, r)) for r in np.asarray(R, dtype=object).reshape(-1, n)]
    A = [r for r in {tuple(r): None for r in A if any(r)}]
    A = [list(r) for r in A]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    diag: list[int] = []
    k = 0
    m = len(A)
    while k < min(m, n):
        best = None
        for i in range(k, m):
            row = A[i]
            for j in range(k, n):
                a = row[j]
                if a and (best is None or abs(a) < best[0]):
                    best = (abs(a), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[k], A[i] = A[i], A[k]
        if j != k:
            for r in A:
                r[k], r[j] = r[j], r[k]
            for r in V:
                r[k], r[j] = r[j], r[k]
        while True:
            piv = A[k][k]
            moved = False
            for i in range(k + 1, m):
                a = A[i][k]
                if a:
                    qt = a // piv
                    if qt:
                        rk = A[k]
                        A[i] = [x - qt * y for x, y in zip(A[i], rk)]
                    if A[i][k]:
                        A[k], A[i] = A[i], A[k]
                        moved = True
                        break
            if moved:
                continue
            rk = A[k]
            for j in range(k + 1, n):
                a = rk[j]
                if a:
                    qt = a // piv
                    if qt:
                        for r in A:
                            r[j] -= qt * r[k]
                        for r in V:
                            r[j] -= qt * r[k]
                    if rk[j]:
                        for r in A:
                            r[k], r[j] = r[j], r[k]
                        for r in V:
                            r[k], r[j] = r[j], r[k]
                        moved = True
                        break
            if not moved:
                break
        diag.append(abs(A[k][k]))
        if A[k][k] < 0:
            for r in V:
                r[k] = -r[k]
        k += 1
    diag += [0] * (n - len(diag))
    return IntegerSmith(diag, np.array(V, dtype=object).reshape(n, n))
