"""Transfer-matrix evaluation of spin models over Sigma_{k,k} for block circuits.

Geometry. A chain of L blocks has N = 2 xi L qubits split into 2L regions
of xi qubits. The first Clifford layer (A) acts on regions (2a, 2a+1); the
second layer (B) acts on regions (2b+1, 2b+2), for b < L-1 on an open chain
and cyclically on a periodic one. On the open chain the two edge regions are
touched by A only: a truncated B gate there would act inside an A block and
drop out of every state quantity.

Contraction order. Spins live on the A blocks. For a frame potential the
state is a pair of A spins (ket, bra); crossing a B block b multiplies by
the Gram links of its two regions, by the block kernel W K_b W (W the block
Weingarten matrix, K_b the overlap kernel including magic), and by the Gram
links into the next A block. Uncovered edge regions contribute their overlap
kernel directly.

Magic. Single-qubit Haar gates are attached to A blocks as (block, count);
they sit on the leftmost qubits of the block. With ``placement="final"``
they act after the B layer and replace 2^{dim(T cap T')} on their qubits by
<<T|Phi_H|T'>>; with ``placement="initial"`` they randomize the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import flint
import numpy as np

from . import commutant, exact
from .errors import ConfigError, ResourceCapError, UnsupportedParameter

SIGNED_EXACT_CAP = 10_000_000


# --- signed log-magnitude numbers -----------------------------------------------------


def _log2_abs(q) -> float:
    """log2 |q| for an int, Fraction or flint rational, without overflow."""
    if isinstance(q, flint.fmpq):
        p, d = int(q.p), int(q.q)
    elif isinstance(q, Fraction):
        p, d = q.numerator, q.denominator
    else:
        p, d = int(q), 1
    if p == 0:
        return -math.inf
    return math.log2(abs(p)) - math.log2(d)


class LogSigned:
    """Arrays of signed numbers stored as sign in {-1, 0, 1} and base-2 log-magnitude."""

    __slots__ = ("sign", "log")

    def __init__(self, sign, log):
        self.sign = np.asarray(sign, dtype=np.int8)
        self.log = np.asarray(log, dtype=float)
        self.log = np.where(self.sign == 0, -np.inf, self.log)

    @classmethod
    def from_float(cls, x) -> "LogSigned":
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return cls(np.sign(x), np.log2(np.abs(x)))

    @classmethod
    def from_exact(cls, values) -> "LogSigned":
        """From a flint fmpq_mat or a nested list of rationals."""
        rows = values.tolist() if hasattr(values, "tolist") else values
        arr = np.array(rows, dtype=object)
        sign = np.vectorize(lambda q: (q > 0) - (q < 0), otypes=[np.int8])(arr)
        log = np.vectorize(_log2_abs, otypes=[float])(arr)
        return cls(sign, log)

    @classmethod
    def zeros(cls, shape) -> "LogSigned":
        return cls(np.zeros(shape, dtype=np.int8), np.full(shape, -np.inf))

    @property
    def shape(self):
        return self.sign.shape

    def __getitem__(self, idx) -> "LogSigned":
        return LogSigned(self.sign[idx], self.log[idx])

    def __neg__(self) -> "LogSigned":
        return LogSigned(-self.sign, self.log)

    def __mul__(self, other) -> "LogSigned":
        if not isinstance(other, LogSigned):
            other = LogSigned.from_float(other)
        return LogSigned(self.sign * other.sign, self.log + other.log)

    __rmul__ = __mul__

    def power(self, m: int) -> "LogSigned":
        if m == 0:
            return LogSigned(np.ones(self.shape, dtype=np.int8), np.zeros(self.shape))
        return LogSigned(self.sign**m, self.log * m)

    def __add__(self, other) -> "LogSigned":
        if not isinstance(other, LogSigned):
            other = LogSigned.from_float(other)
        m = np.maximum(self.log, other.log)
        m = np.where(np.isfinite(m), m, 0.0)
        s = self.sign * np.exp2(self.log - m) + other.sign * np.exp2(other.log - m)
        with np.errstate(divide="ignore"):
            return LogSigned(np.sign(s), np.log2(np.abs(s)) + m)

    def __sub__(self, other) -> "LogSigned":
        return self + (-other if isinstance(other, LogSigned) else -np.asarray(other))

    def _scaled(self, axis):
        m = np.max(self.log, axis=axis, keepdims=True)
        m = np.where(np.isfinite(m), m, 0.0)
        return self.sign * np.exp2(self.log - m), m

    def sum(self, axis=None) -> "LogSigned":
        axes = tuple(range(self.sign.ndim)) if axis is None else axis
        v, m = self._scaled(axes)
        s = np.sum(v, axis=axes, keepdims=True)
        with np.errstate(divide="ignore"):
            out = LogSigned(np.sign(s), np.log2(np.abs(s)) + m)
        return LogSigned(np.squeeze(out.sign, axis=axes), np.squeeze(out.log, axis=axes))

    def __matmul__(self, other: "LogSigned") -> "LogSigned":
        a, ra = self._scaled(-1)
        b, cb = other._scaled(-2)
        c = np.matmul(a, b)
        with np.errstate(divide="ignore"):
            return LogSigned(np.sign(c), np.log2(np.abs(c)) + ra + cb)

    def to_float(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return self.sign * np.exp2(self.log)

    def item(self) -> tuple[int, float]:
        return int(self.sign), float(self.log)

    def __float__(self) -> float:
        return float(self.to_float())

    def __repr__(self) -> str:
        if self.sign.ndim == 0:
            return f"LogSigned({'-' if self.sign < 0 else ''}2^{float(self.log):.6g})" if self.sign else "LogSigned(0)"
        return f"LogSigned(shape={self.shape})"


# --- chain geometry ----------------------------------------------------------------


@dataclass(frozen=True)
class ChainSpec:
    k: int
    xi: int
    L: int
    boundary: str = "open"
    magic: tuple = ()  # (A block index, number of single-qubit Haar gates)
    placement: str = "final"
    strict: bool = True  # False admits xi < k-1 (pseudo-inverse twirls), for cross-checks

    def __post_init__(self):
        if not 1 <= self.k <= commutant.MAX_K:
            raise UnsupportedParameter(f"k must be in [1, {commutant.MAX_K}]")
        if self.xi < 1 or (self.strict and self.xi < self.k - 1):
            raise UnsupportedParameter("need xi >= k-1 so block operators are independent")
        if self.L < 1:
            raise ConfigError("L must be >= 1")
        if self.boundary not in ("open", "periodic"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if self.placement not in ("final", "initial"):
            raise ConfigError(f"unknown magic placement {self.placement!r}")
        for a, c in self.magic:
            if not 0 <= a < self.L or not 0 <= c <= 2 * self.xi:
                raise ConfigError(f"bad magic site {(a, c)}")

    @property
    def N(self) -> int:
        return 2 * self.xi * self.L

    @property
    def n_magic(self) -> int:
        return sum(c for _, c in self.magic)

    def b_blocks(self) -> list[tuple[int, int]]:
        """(left A block, right A block) for every B block."""
        if self.boundary == "open":
            return [(b, b + 1) for b in range(self.L - 1)]
        return [(b, (b + 1) % self.L) for b in range(self.L)]

    def region_magic(self) -> list[int]:
        """Magic gate count per region of xi qubits."""
        out = [0] * (2 * self.L)
        for a, c in self.magic:
            left = min(c, self.xi)
            out[2 * a] += left
            out[2 * a + 1] += c - left
        if any(m > self.xi for m in out):
            raise ConfigError("more magic gates than qubits in a region")
        return out

    def block_magic(self) -> list[int]:
        out = [0] * self.L
        for a, c in self.magic:
            out[a] += c
        if any(m > 2 * self.xi for m in out):
            raise ConfigError("more magic gates than qubits in a block")
        return out

    def architecture(self):
        """The matching densesim spec (edge B gates included, truncated)."""
        from . import densesim

        pos = []
        for a, c in self.magic:
            pos += list(range(2 * self.xi * a, 2 * self.xi * a + c))
        return densesim.magic_architecture(
            self.N, self.xi, len(pos), self.placement, self.boundary, positions=pos
        )


# --- exact building blocks --------------------------------------------------------------


@lru_cache(maxsize=None)
def _inter(k: int) -> np.ndarray:
    return commutant.enumerate_sigma(k).intersection_dims.astype(np.int64)


@lru_cache(maxsize=None)
def _haar_input_overlap(k: int) -> list:
    """<<T| E (single-qubit Haar state)^{tensor k} >> for every T."""
    cat = commutant.enumerate_sigma(k)
    inter = _inter(k)
    pidx = [cat.perm_index(p) for p in commutant.permutations(k)]
    D1 = math.prod(2 + i for i in range(k))
    return [flint.fmpq(sum(2 ** int(inter[t, p]) for p in pidx), D1) for t in range(len(cat))]


class _Exact:
    """Backend on flint rationals (small k only)."""

    def __init__(self, k: int):
        self.k = k
        self.s = len(commutant.enumerate_sigma(k))

    def mat(self, rows):
        return flint.fmpq_mat(rows)

    def region_kernel(self, xi: int, m: int):
        inter = _inter(self.k)
        H = commutant.haar_twirl_table(self.k).values if m else None
        s = self.s
        return flint.fmpq_mat(
            [[(H[i, j] ** m if m else 1) * flint.fmpq(2 ** (int(inter[i, j]) * (xi - m))) for j in range(s)] for i in range(s)]
        )

    def weingarten(self, n: int):
        return commutant.clifford_twirl_exact(self.k, n)

    def input_vector(self, m: int):
        h = _haar_input_overlap(self.k)
        return flint.fmpq_mat([[h[i] ** m] for i in range(self.s)])

    def had(self, a, b):
        return flint.fmpq_mat([[a[i, j] * b[i, j] for j in range(a.ncols())] for i in range(a.nrows())])

    def outer(self, c, d):
        return c * d.transpose()

    def mm(self, a, b):
        return a * b

    def total(self, a):
        return sum((a[i, j] for i in range(a.nrows()) for j in range(a.ncols())), flint.fmpq(0))

    def delta(self, i, j):
        m = flint.fmpq_mat(self.s, self.s)
        m[i, j] = 1
        return m

    def entry(self, a, i, j):
        return a[i, j]


class _Log:
    """Backend on LogSigned arrays."""

    def __init__(self, k: int):
        self.k = k
        self.s = len(commutant.enumerate_sigma(k))

    def region_kernel(self, xi: int, m: int) -> LogSigned:
        inter = _inter(self.k).astype(float)
        g = LogSigned(np.ones_like(inter, dtype=np.int8), inter * (xi - m))
        if m:
            H = _haar_log(self.k)
            g = g * H.power(m)
        return g

    def weingarten(self, n: int) -> LogSigned:
        return _weingarten_log(self.k, n)

    def input_vector(self, m: int) -> LogSigned:
        h = LogSigned.from_exact([[q] for q in _haar_input_overlap(self.k)])
        return h.power(m)

    def had(self, a, b):
        return a * b

    def outer(self, c, d):
        return LogSigned(c.sign * d.sign.T, c.log + d.log.T)

    def mm(self, a, b):
        return a @ b

    def total(self, a):
        return a.sum()


@lru_cache(maxsize=None)
def _haar_log(k: int) -> LogSigned:
    return LogSigned.from_exact(commutant.haar_twirl_table(k).values)


@lru_cache(maxsize=None)
def _weingarten_log(k: int, n: int) -> LogSigned:
    return LogSigned.from_exact(commutant.clifford_twirl_exact(k, n))


# --- frame potential ----------------------------------------------------------------------


def _frame_potential(chain: ChainSpec, ops, sector: Optional[Sequence[int]] = None):
    xi = chain.xi
    final = chain.placement == "final"
    rmag = chain.region_magic() if final else [0] * (2 * chain.L)
    bmag = chain.block_magic() if not final else [0] * chain.L
    W = ops.weingarten(2 * xi)
    Gx = ops.region_kernel(xi, 0)

    def restrict(m):
        if sector is None:
            return m
        if isinstance(m, LogSigned):
            return m[np.ix_(sector, sector)] if m.shape[1] > 1 else m[list(sector)]
        return flint.fmpq_mat([[m[i, j] for j in (sector if m.ncols() > 1 else [0])] for i in sector])

    ones = ops.input_vector(0)

    def coeff(a):
        v = ops.input_vector(bmag[a]) if bmag[a] else ones
        return restrict(ops.mm(W, v))

    Gx_r = restrict(Gx)
    kernels = {}
    for b, (l, r) in enumerate(chain.b_blocks()):
        x1, x2 = 2 * l + 1, (2 * l + 2) % (2 * chain.L)
        K = ops.had(ops.region_kernel(xi, rmag[x1]), ops.region_kernel(xi, rmag[x2]))
        kernels[b] = restrict(ops.mm(ops.mm(W, K), W))

    def step(V, b, c_next):
        X = ops.mm(ops.mm(Gx_r, V), Gx_r)
        Y = ops.had(X, kernels[b])
        Vn = ops.mm(ops.mm(Gx_r, Y), Gx_r)
        return ops.had(Vn, ops.outer(c_next, c_next)) if c_next is not None else Vn

    L = chain.L
    if chain.boundary == "open":
        c0 = coeff(0)
        V = ops.had(ops.outer(c0, c0), restrict(ops.region_kernel(xi, rmag[0])))
        for b in range(L - 1):
            V = step(V, b, coeff(b + 1))
        return ops.total(ops.had(V, restrict(ops.region_kernel(xi, rmag[2 * L - 1]))))

    # periodic: fix the spin pair of block 0 and close the ring
    c0 = coeff(0)
    s = len(sector) if sector is not None else ops.s
    if isinstance(ops, _Log):
        V = LogSigned.zeros((s, s, s, s))
        idx = np.arange(s)
        V.sign[idx[:, None], idx[None, :], idx[:, None], idx[None, :]] = 1
        V.log[idx[:, None], idx[None, :], idx[:, None], idx[None, :]] = 0
        V = V * ops.outer(c0, c0)[:, :, None, None]
        for b in range(L):
            V = step(V, b, coeff(b + 1) if b < L - 1 else None)
        return V[idx[:, None], idx[None, :], idx[:, None], idx[None, :]].sum()
    total = flint.fmpq(0)
    for i in range(s):
        for j in range(s):
            V = ops.delta(i, j)
            V[i, j] = c0[i, 0] * c0[j, 0]
            for b in range(L):
                V = step(V, b, coeff(b + 1) if b < L - 1 else None)
            total += V[i, j]
    return total


def _check_tractable(chain: ChainSpec) -> None:
    if chain.boundary == "periodic" and chain.k > 4:
        raise ResourceCapError("periodic transfer contraction is limited to k <= 4")


def frame_potential_transfer(chain: ChainSpec, sector: str = "all") -> LogSigned:
    """Exact frame potential of the two-layer ensemble, as a LogSigned scalar.

    ``sector="perm"`` restricts every spin to the permutation subgroup.
    """
    _check_tractable(chain)
    sec = _sector(chain.k, sector)
    return _frame_potential(chain, _Log(chain.k), sec)


def frame_potential_transfer_exact(chain: ChainSpec, sector: str = "all") -> Fraction:
    """The same contraction on exact rationals (cross-check backend)."""
    if chain.k > 4:
        raise ResourceCapError("the rational backend is limited to k <= 4")
    q = _frame_potential(chain, _Exact(chain.k), _sector(chain.k, sector))
    return Fraction(int(q.p), int(q.q))


def _sector(k: int, sector: str):
    if sector == "all":
        return None
    if sector == "perm":
        return commutant.enumerate_sigma(k).perm_indices
    raise ConfigError(f"unknown sector {sector!r}")


# --- single-spin chains ----------------------------------------------------------------------


def _spin_chain(chain: ChainSpec, a_vecs: list, b_vecs: list) -> LogSigned:
    """sum over A spins of prod_a a_a(T_a) prod_b sum_T3 b_b(T3) G(T3,T_l) G(T3,T_r)."""
    k, xi = chain.k, chain.xi
    G = _Log(k).region_kernel(xi, 0)
    mats = [G @ (_col(b_vecs[b]) * G) for b in range(len(chain.b_blocks()))]  # G diag(b) G

    def diag_scale(M, v):
        return M * LogSigned(v.sign.reshape(1, -1), v.log.reshape(1, -1))

    if chain.boundary == "open":
        s = LogSigned(a_vecs[0].sign.reshape(1, -1), a_vecs[0].log.reshape(1, -1))
        for b in range(chain.L - 1):
            s = diag_scale(s @ mats[b], a_vecs[b + 1])
        return s.sum()
    P = None
    for b in range(chain.L):
        M = diag_scale(LogSigned(np.ones((1, 1), np.int8), np.zeros((1, 1))) * _eye_log(G.shape[0]), a_vecs[b]) @ mats[b]
        P = M if P is None else P @ M
    idx = np.arange(P.shape[0])
    return P[idx, idx].sum()


def _col(v: LogSigned) -> LogSigned:
    return LogSigned(v.sign.reshape(-1, 1), v.log.reshape(-1, 1))


def _eye_log(s: int) -> LogSigned:
    e = np.eye(s, dtype=np.int8)
    return LogSigned(e, np.where(e == 1, 0.0, -np.inf))


def _vec(ls: LogSigned) -> LogSigned:
    return LogSigned(ls.sign.reshape(1, -1), ls.log.reshape(1, -1)) if ls.sign.ndim == 1 else ls


def _uncovered_blocks(chain: ChainSpec) -> set[int]:
    if chain.boundary == "periodic":
        return set()
    return {0, chain.L - 1}


def _g_diag(chain: ChainSpec, t: int, absolute: bool) -> LogSigned:
    """g(T 1, T 1) (or g' with |Wg|) for the unitary two-layer channel."""
    W = chain_weingarten(chain)
    if absolute:
        W = LogSigned(np.abs(W.sign), W.log)
    col = W[:, t]  # Wg(T4, T2=t)
    row = W[t, :]  # Wg(T1=t, T3)
    unc = _uncovered_blocks(chain)
    a_vecs = []
    for a in range(chain.L):
        v = col
        if a in unc:
            keep = np.zeros(col.shape, dtype=np.int8)
            keep[t] = 1
            v = LogSigned(col.sign * keep, col.log)
        a_vecs.append(v)
    out = _spin_chain(chain, a_vecs, [row] * chain.L)
    return out * LogSigned(np.int8(1), float(chain.N * chain.k))


def chain_weingarten(chain: ChainSpec) -> LogSigned:
    return _weingarten_log(chain.k, 2 * chain.xi)


def partition_function_free(chain: ChainSpec) -> LogSigned:
    """Z = sum over all boundary labels of g' (|Wg| weights)."""
    W = chain_weingarten(chain)
    Wa = LogSigned(np.abs(W.sign), W.log)
    u = Wa.sum(axis=1)  # sum over input labels
    v = Wa.sum(axis=0)  # sum over output labels
    out = _spin_chain(chain, [u] * chain.L, [v] * chain.L)
    return out * LogSigned(np.int8(1), float(chain.N * chain.k))


def collision_transfer(chain: ChainSpec) -> LogSigned:
    """E |<x|V|0>|^{2k} for the two-layer ensemble (independent of x)."""
    if chain.magic:
        raise UnsupportedParameter("collision chain has no magic sites")
    W = chain_weingarten(chain)
    u = W.sum(axis=1)
    return _spin_chain(chain, [u] * chain.L, [u] * chain.L)


# --- uniformity deviation -------------------------------------------------------------------


def g_tensor(chain: ChainSpec, cap: int = SIGNED_EXACT_CAP) -> np.ndarray:
    """g(T_out, T_in) as a dense array, outputs first.

    Output labels: one per B block, plus the A-block spin on each uncovered
    edge region (open chains). Input labels: one per A block.
    """
    k, xi, L = chain.k, chain.xi, chain.L
    s = len(commutant.enumerate_sigma(k))
    W = chain_weingarten(chain).to_float()
    inter = _inter(k)
    G = np.exp2(xi * inter.astype(float))
    bb = chain.b_blocks()
    n_out = len(bb) + (2 if chain.boundary == "open" and L > 1 else 1 if chain.boundary == "open" else 0)
    if s ** (n_out + L) > cap:
        raise ResourceCapError(f"g tensor has {s ** (n_out + L)} entries, cap {cap}")
    # B-block tensor: Bk[T1, Tl, Tr] = sum_T3 W[T1, T3] G[T3, Tl] G[T3, Tr]
    Bk = np.einsum("ac,cl,cr->alr", W, G, G)
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    t4 = [next(letters) for _ in range(L)]
    t2 = [next(letters) for _ in range(L)]
    ops, subs = [], []
    for a in range(L):
        ops.append(W)
        subs.append(t4[a] + t2[a])
    outs = []
    for b, (l, r) in enumerate(bb):
        t1 = next(letters)
        ops.append(Bk)
        subs.append(t1 + t4[l] + t4[r])
        outs.append(t1)
    if chain.boundary == "open":
        outs = [t4[0]] + outs + ([t4[L - 1]] if L > 1 else [])
    expr = ",".join(subs) + "->" + "".join(outs + t2)
    g = np.einsum(expr, *ops, optimize=True)
    return g * 2.0 ** (chain.N * k)


def uniformity_deviation(chain: ChainSpec, mode: str = "signed_exact") -> float:
    """Delta = sum |f| of the unitary two-layer channel.

    signed_exact: explicit sum over all boundary labels of |g - uniform|.
    absolute_bound: Z - sum_T g'(T,T) + sum_T |g(T,T) - 1|, with Z the
    free-boundary partition function of the |Wg| model; it bounds the
    off-uniform terms by g' >= |g| and keeps the uniform terms exact.
    """
    if chain.magic:
        raise UnsupportedParameter("uniformity is defined for Clifford-only chains")
    s = len(commutant.enumerate_sigma(chain.k))
    if mode == "signed_exact":
        g = g_tensor(chain)
        nlab = g.ndim
        for t in range(s):
            g[(t,) * nlab] -= 1.0
        return float(np.sum(np.abs(g)))
    if mode == "absolute_bound":
        _check_tractable(chain)
        Z = float(partition_function_free(chain))
        diag_abs = sum(float(_g_diag(chain, t, True)) for t in range(s))
        diag = sum(abs(float(_g_diag(chain, t, False)) - 1.0) for t in range(s))
        return Z - diag_abs + diag
    raise ConfigError(f"unknown mode {mode!r}")


def uniformity_deviation_global(k: int, N: int) -> Fraction:
    """Delta for a single global Clifford: sum |2^{Nk} Wg(T1,T2) - delta|, exactly."""
    W = exact.to_fractions(commutant.clifford_weingarten(k, N).values)
    scale = 2 ** (N * k)
    return sum(
        (abs(scale * w - (1 if i == j else 0)) for i, row in enumerate(W) for j, w in enumerate(row)),
        Fraction(0),
    )


# --- domain walls -----------------------------------------------------------------------------


@dataclass
class DomainWallRow:
    distance: int
    pairs: int
    log2_weight: float


def domain_wall_spectrum(k: int, xi: int) -> list[DomainWallRow]:
    """Neighbouring spin pairs grouped by distance |T,T'| = k - dim(T cap T')."""
    dist = k - _inter(k)
    rows = []
    for d in range(int(dist.max()) + 1):
        cnt = int(np.sum(dist == d))
        if cnt:
            rows.append(DomainWallRow(d, cnt, -float(xi * d)))
    return rows


def ordering_threshold(k: int, N: int, xi_max: int = 64) -> Optional[int]:
    """Smallest xi with (N/xi) max_T sum_{T' != T} 2^{-xi |T,T'|} < 1."""
    dist = k - _inter(k)
    for xi in range(1, xi_max + 1):
        w = np.where(dist > 0, np.exp2(-xi * dist.astype(float)), 0.0).sum(axis=1).max()
        if N / xi * w < 1:
            return xi
    return None


# --- gluing ----------------------------------------------------------------------------------------


def gluing_frame_potential(k: int, NA: int, NB: int, NC: int, ND: int) -> float:
    """Frame potential of V_BC (psi_AB tensor psi_CD), psi_AB Haar, psi_CD stabilizer."""
    if NB + NC < 1:
        raise ConfigError("the gluing gate needs at least one qubit")
    cat = commutant.enumerate_sigma(k)
    inter = _inter(k).astype(float)
    pidx = [cat.perm_index(p) for p in commutant.permutations(k)]
    W = commutant.clifford_twirl_float(k, NB + NC)
    DAB = math.prod(2 ** (NA + NB) + i for i in range(k))
    ZCD = 2 ** (NC + ND) * math.prod(2 ** (NC + ND) + 2**i for i in range(k - 1))
    # c[sigma, T1, T3] = sum_T2 W[T1,T2] 2^{NB dim(T2 cap sigma) + NC dim(T2 cap T3)}
    gb = np.exp2(NB * inter[:, pidx])  # [T2, sigma]
    gc = np.exp2(NC * inter)  # [T2, T3]
    c = np.einsum("ab,bs,bc->sac", W, gb, gc) / (DAB * ZCD)
    ga = np.exp2(NA * inter[np.ix_(pidx, pidx)])
    gbc = np.exp2((NB + NC) * inter)
    gd = np.exp2(ND * inter)
    return float(np.einsum("sac,tbd,st,ab,cd->", c, c, ga, gbc, gd, optimize=True))


def haar_frame_potential(N: int, k: int) -> Fraction:
    return Fraction(math.factorial(k), math.prod(2**N + i for i in range(k)))


__all__ = [
    "LogSigned",
    "ChainSpec",
    "frame_potential_transfer",
    "frame_potential_transfer_exact",
    "partition_function_free",
    "collision_transfer",
    "g_tensor",
    "uniformity_deviation",
    "uniformity_deviation_global",
    "DomainWallRow",
    "domain_wall_spectrum",
    "ordering_threshold",
    "gluing_frame_potential",
    "haar_frame_potential",
]
