"""The Clifford commutant Sigma_{k,k} and the algebra built on it.

Encoding: an element (x, y) of F2^{2k} is the int ``x | (y << k)`` where bit
i of x (or y) is replica i. r(T) is the operator sum_{(x,y) in T} |x><y|, so
the graph of an invertible F2 matrix O is {(Ox, x)}.

Dense operators on n qubits and k replicas use copy-major ordering: replica
c and qubit q sit at bit ``n*(k-1-c) + q`` of the basis index, which is the
ordering produced by ``np.kron(psi, psi, ...)`` with qubit 0 as the least
significant bit of each copy.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import flint
import numpy as np

from . import exact
from .errors import InvariantViolation, RankError, ResourceCapError, UnsupportedParameter
from .gf2 import in_span, mat_vec, orthogonal_complement, popcount, rank, rref, span

MAX_K = 6
BRUTEFORCE_MAX_K = 4
DENSE_CAP_QUBITS = 14
CATALOG_FORMAT_VERSION = 1
CATALOG_MAGIC = b"SIGMACAT"


def sigma_count(k: int) -> int:
    """|Sigma_{k,k}| = prod_{i=0}^{k-2} (2^i + 1)."""
    return math.prod(2**i + 1 for i in range(k - 1))


def _split(v: int, k: int) -> tuple[int, int]:
    return v & ((1 << k) - 1), v >> k


def _mod4_ok(v: int, k: int) -> bool:
    x, y = _split(v, k)
    return (popcount(x) - popcount(y)) % 4 == 0


def _defect(rows: Sequence[int], k: int, side: str = "left") -> int:
    # dim{x : (x,0) in T} = k - rank(y part); right side swaps roles
    mask = (1 << k) - 1
    if side == "left":
        return k - rank([r >> k for r in rows])
    return k - rank([r & mask for r in rows])


def _perm_of(rows: Sequence[int], k: int) -> Optional[tuple[int, ...]]:
    # with full-rank y part, RREF rows are (O e_j, e_j) ordered by j descending
    mask = (1 << k) - 1
    if rank([r >> k for r in rows]) < k:
        return None
    cols = {}
    for r in rows:
        y = r >> k
        if popcount(y) != 1:
            return None
        cols[y.bit_length() - 1] = r & mask
    if any(popcount(c) != 1 for c in cols.values()):
        return None
    return tuple(cols[j].bit_length() - 1 for j in range(k))


@dataclass(frozen=True)
class LagrangianSubspace:
    """One T in Sigma_{k,k}, stored as its canonical RREF basis."""

    k: int
    basis: tuple[int, ...]
    defect_dim: int
    perm: Optional[tuple[int, ...]] = None

    @classmethod
    def from_rows(cls, rows: Sequence[int], k: int) -> "LagrangianSubspace":
        b = rref(rows)
        return cls(k, b, _defect(b, k), _perm_of(b, k))

    @classmethod
    def from_perm(cls, p: Sequence[int]) -> "LagrangianSubspace":
        k = len(p)
        return cls.from_rows([(1 << p[j]) | (1 << (k + j)) for j in range(k)], k)

    @property
    def is_perm(self) -> bool:
        return self.perm is not None

    def elements(self) -> list[int]:
        return sorted(span(self.basis))

    def contains(self, v: int) -> bool:
        return in_span(v, self.basis)

    def right_defect_dim(self) -> int:
        return _defect(self.basis, self.k, "right")

    def is_valid(self, samples: int = 0, rng: Optional[np.random.Generator] = None) -> bool:
        """Check rank, 1_{2k} membership and the mod-4 rule.

        The mod-4 rule is checked on all basis rows and pairwise sums, which
        determine it on the whole span, plus ``samples`` random span elements.
        """
        k = self.k
        if len(self.basis) != k or rank(self.basis) != k:
            return False
        if not self.contains((1 << 2 * k) - 1):
            return False
        b = self.basis
        pts = list(b) + [b[i] ^ b[j] for i in range(k) for j in range(i + 1, k)]
        if samples and rng is not None:
            for bits in rng.integers(0, 2, size=(samples, k)):
                v = 0
                for bit, row in zip(bits, b):
                    if bit:
                        v ^= row
                pts.append(v)
        return all(_mod4_ok(v, k) for v in pts)

    def key(self) -> tuple[int, ...]:
        return self.basis


def is_stochastic_lagrangian(rows: Sequence[int], k: int) -> bool:
    """Exhaustive membership test used by the brute-force oracle."""
    b = rref(rows)
    if len(b) != k or not in_span((1 << 2 * k) - 1, b):
        return False
    return all(_mod4_ok(v, k) for v in span(b))


def intersection_dim(a: LagrangianSubspace, b: LagrangianSubspace) -> int:
    return 2 * a.k - rank(a.basis + b.basis)


# --- stochastic rotations and defect subspaces -------------------------------


@lru_cache(maxsize=None)
def stochastic_rotations(k: int) -> tuple[tuple[int, ...], ...]:
    """All k x k F2 matrices O with |Ox| = |x| mod 4 and O 1 = 1.

    Matrices are tuples of columns. The mod-4 rule is equivalent to every
    column having weight 1 mod 4 and every pair of columns having even
    overlap, so the search runs over columns with those two properties.
    """
    full = (1 << k) - 1
    cands = [c for c in range(1, 1 << k) if popcount(c) % 4 == 1]
    out: list[tuple[int, ...]] = []

    def rec(cols: list[int]) -> None:
        if len(cols) == k:
            acc = 0
            for c in cols:
                acc ^= c
            if acc == full:
                out.append(tuple(cols))
            return
        basis = rref(cols)
        for c in cands:
            if any(popcount(c & d) % 2 for d in cols) or in_span(c, basis):
                continue
            rec(cols + [c])

    rec([])
    return tuple(sorted(out))


def _compose(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(mat_vec(a, c) for c in b)


def _group_closure(gens: Sequence[tuple[int, ...]], k: int) -> set[tuple[int, ...]]:
    ident = tuple(1 << j for j in range(k))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                gh = _compose(g, h)
                if gh not in seen:
                    seen.add(gh)
                    nxt.append(gh)
        frontier = nxt
    return seen


def rotation_generators(k: int) -> list[tuple[int, ...]]:
    """A small generating set of the stochastic rotation group."""
    elems = stochastic_rotations(k)
    gens: list[tuple[int, ...]] = []
    group = _group_closure(gens, k)
    for o in elems:
        if o in group:
            continue
        gens.append(o)
        group = _group_closure(gens, k)
        if len(group) == len(elems):
            break
    return gens


@lru_cache(maxsize=None)
def defect_subspaces(k: int) -> tuple[tuple[int, ...], ...]:
    """All subspaces N of F2^k whose elements have weight 0 mod 4."""
    doubly_even = [v for v in range(1, 1 << k) if popcount(v) % 4 == 0]
    found = {(): None}
    frontier = [()]
    while frontier:
        nxt = []
        for b in frontier:
            for v in doubly_even:
                if in_span(v, b):
                    continue
                nb = rref(b + (v,))
                if nb in found:
                    continue
                if all(popcount(u) % 4 == 0 for u in span(nb)):
                    found[nb] = None
                    nxt.append(nb)
        frontier = nxt
    return tuple(sorted(found, key=lambda b: (len(b), b)))


def defect_operator_subspace(N: Sequence[int], k: int) -> LagrangianSubspace:
    """T_N = {(x, x + y) : x in N^perp, y in N}."""
    perp = orthogonal_complement(N, k)
    rows = [x | (x << k) for x in perp] + [y << k for y in N]
    return LagrangianSubspace.from_rows(rows, k)


# --- the catalog -------------------------------------------------------------


@dataclass
class CommutantCatalog:
    k: int
    elements: list[LagrangianSubspace]
    n_rotations: int
    _inter: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def perm_indices(self) -> list[int]:
        return [i for i, t in enumerate(self.elements) if t.is_perm]

    def index(self, t: LagrangianSubspace) -> int:
        return self._lookup[t.basis]

    @property
    def _lookup(self) -> dict[tuple[int, ...], int]:
        d = self.__dict__.get("_lookup_cache")
        if d is None:
            d = {t.basis: i for i, t in enumerate(self.elements)}
            self.__dict__["_lookup_cache"] = d
        return d

    def perm_index(self, p: Sequence[int]) -> int:
        return self.index(LagrangianSubspace.from_perm(p))

    @property
    def identity_index(self) -> int:
        return self.perm_index(tuple(range(self.k)))

    @property
    def defect_dims(self) -> np.ndarray:
        return np.array([t.defect_dim for t in self.elements], dtype=np.int64)

    @property
    def intersection_dims(self) -> np.ndarray:
        """Symmetric table of dim(T_i cap T_j), computed on first use."""
        if self._inter is None:
            self._inter = _intersection_table(self.elements, self.k)
        return self._inter

    def gram_exponents(self) -> np.ndarray:
        return self.intersection_dims

    def checksum(self) -> str:
        return hashlib.sha256(catalog_bytes(self)).hexdigest()


def _intersection_table(elements: Sequence[LagrangianSubspace], k: int) -> np.ndarray:
    n = len(elements)
    el = np.array([t.elements() for t in elements], dtype=np.int64)
    member = np.zeros((n, 1 << (2 * k)), dtype=bool)
    member[np.arange(n)[:, None], el] = True
    out = np.empty((n, n), dtype=np.int8)
    for i in range(n):
        cnt = member[:, el[i]].sum(axis=1)
        out[i] = np.round(np.log2(cnt)).astype(np.int8)
    return out


def _check_k(k: int, hi: int = MAX_K) -> None:
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= hi:
        raise UnsupportedParameter(f"k must be an integer in [1, {hi}], got {k!r}")


@lru_cache(maxsize=None)
def enumerate_sigma(k: int) -> CommutantCatalog:
    """All of Sigma_{k,k} in canonical form and lexicographic order.

    Every T factors as r(T_{O1}) r(T_N) r(T_{O2}), so Sigma is the orbit of
    the defect operators T_N under left and right stochastic rotations. The
    orbit is generated breadth-first from a small generating set of O_k.
    """
    _check_k(k)
    gens = rotation_generators(k)
    mask = (1 << k) - 1
    seen: dict[tuple[int, ...], None] = {}
    queue = []
    for N in defect_subspaces(k):
        t = defect_operator_subspace(N, k).basis
        if t not in seen:
            seen[t] = None
            queue.append(t)
    while queue:
        t = queue.pop()
        for g in gens:
            left = rref([mat_vec(g, r & mask) | (r & ~mask) for r in t])
            right = rref([(r & mask) | (mat_vec(g, r >> k) << k) for r in t])
            for nt in (left, right):
                if nt not in seen:
                    seen[nt] = None
                    queue.append(nt)
    elements = [LagrangianSubspace(k, b, _defect(b, k), _perm_of(b, k)) for b in sorted(seen)]
    cat = CommutantCatalog(k, elements, len(stochastic_rotations(k)))
    if len(cat) != sigma_count(k):
        raise InvariantViolation(f"enumerated {len(cat)} elements, expected {sigma_count(k)}")
    if len(cat.perm_indices) != math.factorial(k):
        raise InvariantViolation("permutation subset has the wrong size")
    return cat


def enumerate_sigma_bruteforce(k: int) -> CommutantCatalog:
    """Every k-dim subspace of F2^{2k} filtered by the defining conditions.

    Subspaces are generated directly as RREF matrices, one pivot pattern at a
    time, so this shares nothing with the orbit construction.
    """
    _check_k(k, BRUTEFORCE_MAX_K)
    m = 2 * k
    ones = (1 << m) - 1
    found = []
    for pivots in itertools.combinations(range(m - 1, -1, -1), k):
        pset = set(pivots)
        free_slots = []
        for i, p in enumerate(pivots):
            free_slots.append([c for c in range(p) if c not in pset])
        sizes = [len(f) for f in free_slots]
        for fill in itertools.product(*[range(1 << s) for s in sizes]):
            rows = []
            for p, slots, bits in zip(pivots, free_slots, fill):
                r = 1 << p
                for j, c in enumerate(slots):
                    if (bits >> j) & 1:
                        r |= 1 << c
                rows.append(r)
            b = tuple(rows)
            if not in_span(ones, b):
                continue
            if all(_mod4_ok(v, k) for v in span(b)):
                found.append(rref(b))
    elements = [LagrangianSubspace(k, b, _defect(b, k), _perm_of(b, k)) for b in sorted(set(found))]
    return CommutantCatalog(k, elements, len(stochastic_rotations(k)))


def defect_dimension(t: LagrangianSubspace) -> int:
    return _defect(t.basis, t.k)


# --- dense operators -----------------------------------------------------------


def _site_offsets(values: Sequence[int], n: int, k: int) -> np.ndarray:
    out = np.zeros(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        o = 0
        for c in range(k):
            if (v >> c) & 1:
                o |= 1 << (n * (k - 1 - c))
        out[i] = o
    return out


def r_indices(t: LagrangianSubspace, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the 2^{nk} unit entries of r(T)^{tensor n}."""
    k = t.k
    el = t.elements()
    mask = (1 << k) - 1
    wx = _site_offsets([v & mask for v in el], n, k)
    wy = _site_offsets([v >> k for v in el], n, k)
    rows = np.zeros(1, dtype=np.int64)
    cols = np.zeros(1, dtype=np.int64)
    for q in range(n):
        rows = (rows[:, None] + (wx << q)[None, :]).ravel()
        cols = (cols[:, None] + (wy << q)[None, :]).ravel()
    return rows, cols


def r_dense(t: LagrangianSubspace, n: int, cap: int = DENSE_CAP_QUBITS) -> np.ndarray:
    """r(T)^{tensor n} as a dense 0/1 matrix in copy-major ordering."""
    if n * t.k > cap:
        raise ResourceCapError(f"r_dense needs {n * t.k} replica qubits, cap is {cap}")
    d = 1 << (n * t.k)
    out = np.zeros((d, d), dtype=np.uint8)
    rows, cols = r_indices(t, n)
    out[rows, cols] = 1
    return out


def schatten_norms_exact(m: np.ndarray) -> tuple[float, float]:
    """Trace and operator norm of an integer matrix with a flat spectrum.

    For r(T), M = r^T r satisfies M^2 = c M, so every nonzero singular value
    is sqrt(c). This is verified exactly on integers before it is used.
    """
    a = m.astype(np.int64)
    g = a.T @ a
    tr = int(np.trace(g))
    c_num = int(np.sum(g * g.T))
    if c_num % tr:
        raise InvariantViolation("spectrum is not flat")
    c = c_num // tr
    if not np.array_equal(g @ g, c * g):
        raise InvariantViolation("spectrum is not flat")
    s = math.isqrt(c)
    if s * s != c:
        raise InvariantViolation("singular value is not an integer")
    return tr / s, float(s)


def trace_norm_svd(m: np.ndarray) -> float:
    return float(np.linalg.svd(m.astype(float), compute_uv=False).sum())


def diamond_norm_formula(t1: LagrangianSubspace, t2: LagrangianSubspace) -> int:
    """||(T1|(T2| ||_diamond = 2^{k + dim N2 - dim N1} (always >= 1)."""
    e = t1.k + t2.defect_dim - t1.defect_dim
    return 2**e


def diamond_norm_witness(t1: LagrangianSubspace, t2: LagrangianSubspace) -> float:
    """Lower-bound witness ||r(T1) Tr[r(T2)^T r(T2)]||_1 / ||r(T2)||_1 at n = 1."""
    r1 = r_dense(t1, 1)
    r2 = r_dense(t2, 1)
    overlap = int(np.sum(r2.astype(np.int64) * r2))
    n1, _ = schatten_norms_exact(r1)
    n2, _ = schatten_norms_exact(r2)
    return n1 * overlap / n2


# --- Gram matrices and Weingarten functions ----------------------------------


def clifford_gram(cat: CommutantCatalog, n: int) -> flint.fmpz_mat:
    """G_ij = Tr[r(T_i)^T r(T_j)] on n qubits = 2^{n dim(T_i cap T_j)}."""
    inter = cat.intersection_dims
    return flint.fmpz_mat([[2 ** (n * int(d)) for d in row] for row in inter])


@dataclass
class WeingartenTable:
    k: int
    n: int
    values: flint.fmpq_mat
    exact_inverse: bool = True

    def fractions(self):
        return exact.to_fractions(self.values)

    def as_float(self) -> np.ndarray:
        return exact.to_float(self.values)

    def check_identity(self) -> bool:
        """Exact check of sum_{T2} Wg(T1,T2) 2^{n dim(T2 cap T3)} = delta."""
        G = flint.fmpq_mat(clifford_gram(enumerate_sigma(self.k), self.n))
        P = self.values * G
        m = P.nrows()
        return P == flint.fmpq_mat(m, m, [int(i == j) for i in range(m) for j in range(m)])


@lru_cache(maxsize=None)
def clifford_weingarten(k: int, n: int) -> WeingartenTable:
    """Exact inverse of the n-qubit commutant Gram matrix (needs n >= k - 1)."""
    _check_k(k)
    if n < 1:
        raise UnsupportedParameter("n must be >= 1")
    if n < k - 1:
        raise RankError(f"r(T) are linearly dependent for n={n} < k-1={k - 1}")
    G = flint.fmpq_mat(clifford_gram(enumerate_sigma(k), n))
    return WeingartenTable(k, n, exact.inverse(G))


@lru_cache(maxsize=None)
def clifford_twirl_exact(k: int, n: int) -> flint.fmpq_mat:
    """Coefficients W with Phi_C = sum W_ij |T_i)(T_j| on n qubits.

    Equals the Weingarten inverse when it exists and the Moore-Penrose inverse
    of the Gram matrix otherwise, so the twirl is always the exact orthogonal
    projector onto the commutant.
    """
    G = flint.fmpq_mat(clifford_gram(enumerate_sigma(k), n))
    if n >= k - 1:
        try:
            return clifford_weingarten(k, n).values
        except RankError:
            pass
    return exact.pseudo_inverse(G)


@lru_cache(maxsize=None)
def clifford_twirl_float(k: int, n: int) -> np.ndarray:
    return exact.to_float(clifford_twirl_exact(k, n))


def permutations(k: int) -> list[tuple[int, ...]]:
    return list(itertools.permutations(range(k)))


def cycle_count(p: Sequence[int]) -> int:
    seen = [False] * len(p)
    c = 0
    for i in range(len(p)):
        if not seen[i]:
            c += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = p[j]
    return c


def _compose_perm(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(a[b[i]] for i in range(len(a)))


def _inverse_perm(a: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(a)
    for i, v in enumerate(a):
        out[v] = i
    return tuple(out)


def permutation_gram(k: int, d: int) -> flint.fmpz_mat:
    """G_{sigma tau} = d^{#cycles(sigma tau^{-1})} over S_k in lexicographic order."""
    perms = permutations(k)
    return flint.fmpz_mat(
        [[d ** cycle_count(_compose_perm(s, _inverse_perm(t))) for t in perms] for s in perms]
    )


@lru_cache(maxsize=None)
def unitary_weingarten(k: int, d: int) -> flint.fmpq_mat:
    """Exact unitary Weingarten matrix on S_k for local dimension d >= k."""
    _check_k(k, 8)
    if d < k:
        raise RankError(
            f"permutation operators are dependent for d={d} < k={k}; use haar_twirl_table"
        )
    return exact.inverse(flint.fmpq_mat(permutation_gram(k, d)))


@lru_cache(maxsize=None)
def haar_twirl_exact(k: int, d: int) -> flint.fmpq_mat:
    """Coefficients of the Haar twirl over S_k; pseudo-inverse when d < k."""
    G = flint.fmpq_mat(permutation_gram(k, d))
    if d >= k:
        return unitary_weingarten(k, d)
    return exact.pseudo_inverse(G)


@lru_cache(maxsize=None)
def haar_twirl_float(k: int, d: int) -> np.ndarray:
    return exact.to_float(haar_twirl_exact(k, d))


@dataclass
class HaarTwirlTable:
    """m(T1,T2) = <<T1| Phi_H |T2>> for the single-qubit k-fold Haar twirl.

    Phi_H = V_B G_BB^{-1} V_B^T where B is a maximal independent set of
    permutations at d = 2, found by exact elimination.
    """

    k: int
    basis_perms: list[int]
    overlaps: flint.fmpz_mat  # |Sigma| x |B|, entries 2^{dim(T cap sigma)}
    gram_inv: flint.fmpq_mat  # inverse of the |B| x |B| Gram block

    def value(self, i: int, j: int):
        vi = flint.fmpq_mat(1, self.overlaps.ncols(), [self.overlaps[i, c] for c in range(self.overlaps.ncols())])
        vj = flint.fmpq_mat(self.overlaps.ncols(), 1, [self.overlaps[j, c] for c in range(self.overlaps.ncols())])
        return (vi * self.gram_inv * vj)[0, 0]

    def diagonal(self) -> list:
        V = flint.fmpq_mat(self.overlaps)
        W = V * self.gram_inv
        r = self.overlaps.ncols()
        return [sum((W[i, c] * V[i, c] for c in range(r)), flint.fmpq(0)) for i in range(V.nrows())]

    @property
    def values(self) -> flint.fmpq_mat:
        m = self.__dict__.get("_values")
        if m is None:
            V = flint.fmpq_mat(self.overlaps)
            m = V * self.gram_inv * V.transpose()
            self.__dict__["_values"] = m
        return m

    def as_float(self) -> np.ndarray:
        f = self.__dict__.get("_float")
        if f is None:
            f = exact.to_float(self.values)
            self.__dict__["_float"] = f
        return f


@lru_cache(maxsize=None)
def haar_twirl_table(k: int) -> HaarTwirlTable:
    _check_k(k)
    cat = enumerate_sigma(k)
    inter = cat.intersection_dims
    pidx = [cat.perm_index(p) for p in permutations(k)]
    Gp = flint.fmpq_mat([[2 ** int(inter[a, b]) for b in pidx] for a in pidx])
    piv = exact.pivot_columns(Gp)
    basis = [pidx[c] for c in piv]
    Gbb = exact.submatrix(Gp, piv, piv)
    V = flint.fmpz_mat([[2 ** int(inter[i, b]) for b in basis] for i in range(len(cat))])
    return HaarTwirlTable(k, basis, V, Gbb.inv())


# --- catalog cache file ------------------------------------------------------


def _row_bytes(k: int) -> int:
    return (2 * k + 7) // 8


def catalog_bytes(cat: CommutantCatalog) -> bytes:
    k = cat.k
    out = bytearray()
    out += CATALOG_MAGIC
    out += struct.pack("<HBII", CATALOG_FORMAT_VERSION, k, len(cat), cat.n_rotations)
    w = _row_bytes(k)
    for t in cat.elements:
        for r in t.basis:
            out += r.to_bytes(w, "little")
        out += struct.pack("<B", t.defect_dim)
        if t.perm is None:
            out += b"\x00" + bytes(k)
        else:
            out += b"\x01" + bytes(t.perm)
    inter = cat.intersection_dims
    for i in range(len(cat)):
        out += inter[i, : i + 1].astype(np.uint8).tobytes()
    return bytes(out)


def save_catalog(cat: CommutantCatalog, directory) -> Path:
    path = Path(directory) / f"sigma-k{cat.k}.cat"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(catalog_bytes(cat))
    return path


def load_catalog(path) -> CommutantCatalog:
    data = Path(path).read_bytes()
    if data[:8] != CATALOG_MAGIC:
        raise UnsupportedParameter(f"{path} is not a catalog file")
    off = 8
    version, k, count, n_rot = struct.unpack_from("<HBII", data, off)
    off += struct.calcsize("<HBII")
    if version != CATALOG_FORMAT_VERSION:
        raise UnsupportedParameter(f"unsupported catalog format version {version}")
    w = _row_bytes(k)
    elements = []
    for _ in range(count):
        rows = []
        for _ in range(k):
            rows.append(int.from_bytes(data[off : off + w], "little"))
            off += w
        dd = data[off]
        flag = data[off + 1]
        perm = tuple(data[off + 2 : off + 2 + k]) if flag else None
        off += 2 + k
        elements.append(LagrangianSubspace(k, tuple(rows), dd, perm))
    inter = np.zeros((count, count), dtype=np.int8)
    for i in range(count):
        row = np.frombuffer(data, dtype=np.uint8, count=i + 1, offset=off)
        inter[i, : i + 1] = row
        inter[: i + 1, i] = row
        off += i + 1
    return CommutantCatalog(k, elements, n_rot, inter)


__all__ = [
    "MAX_K",
    "LagrangianSubspace",
    "CommutantCatalog",
    "WeingartenTable",
    "HaarTwirlTable",
    "sigma_count",
    "is_stochastic_lagrangian",
    "intersection_dim",
    "stochastic_rotations",
    "rotation_generators",
    "defect_subspaces",
    "defect_operator_subspace",
    "enumerate_sigma",
    "enumerate_sigma_bruteforce",
    "defect_dimension",
    "r_indices",
    "r_dense",
    "schatten_norms_exact",
    "trace_norm_svd",
    "diamond_norm_formula",
    "diamond_norm_witness",
    "clifford_gram",
    "clifford_weingarten",
    "clifford_twirl_exact",
    "clifford_twirl_float",
    "permutations",
    "cycle_count",
    "permutation_gram",
    "unitary_weingarten",
    "haar_twirl_exact",
    "haar_twirl_float",
    "haar_twirl_table",
    "catalog_bytes",
    "save_catalog",
    "load_catalog",
]
