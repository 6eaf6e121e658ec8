"""Stabilizer tableaux and uniform Clifford sampling, vectorized over batches.

Phase convention (used everywhere in this module): a row (x, z, r) stands for
the Hermitian Pauli (-1)^r prod_q i^{x_q z_q} X_q^{x_q} Z_q^{z_q}. Dense
vectors use qubit 0 as the least significant bit. A dense stabilizer state is
normalized and multiplied by a phase so that its first nonzero amplitude is
real and positive.

A Clifford element is stored by the images of the generators X_0..X_{n-1},
Z_0..Z_{n-1}: ``sym[j]`` is the [x | z] vector of the image of generator j
and ``signs[j]`` its sign bit. Uniform symplectic matrices with uniform sign
bits give the uniform measure on the Clifford group modulo global phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InvariantViolation, ResourceCapError, UnsupportedParameter

DENSE_CAP_QUBITS = 14


# --- Pauli arithmetic ----------------------------------------------------------


def _g(x1, z1, x2, z2):
    """Exponent of i picked up by one qubit when multiplying canonical Paulis."""
    x1 = x1.astype(np.int8)
    z1 = z1.astype(np.int8)
    x2 = x2.astype(np.int8)
    z2 = z2.astype(np.int8)
    return np.where(
        x1 & z1,
        z2 - x2,
        np.where(x1 == 1, z2 * (2 * x2 - 1), np.where(z1 == 1, x2 * (1 - 2 * z2), 0)),
    ).astype(np.int8)


def pauli_product_phase(x1, z1, x2, z2):
    """Total i-exponent (mod 4) of canonical(x1,z1) * canonical(x2,z2)."""
    return np.sum(_g(x1, z1, x2, z2), axis=-1, dtype=np.int64) % 4


def symplectic_product(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return (
        np.sum(a[..., :n] & b[..., n:], axis=-1, dtype=np.int64)
        + np.sum(a[..., n:] & b[..., :n], axis=-1, dtype=np.int64)
    ) & 1


def _gf2_inverse(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    a = np.concatenate([m.astype(np.uint8) & 1, np.eye(n, dtype=np.uint8)], axis=1)
    for c in range(n):
        piv = np.nonzero(a[c:, c])[0]
        if piv.size == 0:
            raise InvariantViolation("matrix is singular over GF(2)")
        p = c + piv[0]
        if p != c:
            a[[c, p]] = a[[p, c]]
        rows = np.nonzero(a[:, c])[0]
        rows = rows[rows != c]
        a[rows] ^= a[c]
    return a[:, n:]


# --- uniform symplectic sampling ---------------------------------------------


def random_symplectic_batch(m: int, batch: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform elements of Sp(2m, 2), as [batch, 2m, 2m] uint8 row stacks.

    Row j (< m) is the image of X_j and row m + j the image of Z_j. The frame
    (v_0, w_0, v_1, w_1, ...) is drawn sequentially: each new vector is a
    uniform vector projected onto the symplectic complement of the frame so
    far, with rejection of v = 0 and of <v, w> = 0. Every symplectic frame is
    reached with equal probability.
    """
    d = 2 * m
    vs = np.zeros((batch, m, d), dtype=np.uint8)
    ws = np.zeros((batch, m, d), dtype=np.uint8)

    def project(u, idx, j):
        if j == 0:
            return u
        v = vs[idx, :j]
        w = ws[idx, :j]
        cw = symplectic_product(u[:, None, :], w, m).astype(np.uint8)
        cv = symplectic_product(u[:, None, :], v, m).astype(np.uint8)
        corr = np.bitwise_xor.reduce(cw[..., None] * v ^ cv[..., None] * w, axis=1)
        return u ^ corr

    for j in range(m):
        todo = np.arange(batch)
        while todo.size:
            u = project(rng.integers(0, 2, size=(todo.size, d), dtype=np.uint8), todo, j)
            ok = u.any(axis=1)
            vs[todo[ok], j] = u[ok]
            todo = todo[~ok]
        todo = np.arange(batch)
        while todo.size:
            u = project(rng.integers(0, 2, size=(todo.size, d), dtype=np.uint8), todo, j)
            ok = symplectic_product(u, vs[todo, j], m) == 1
            ws[todo[ok], j] = u[ok]
            todo = todo[~ok]
    return np.concatenate([vs, ws], axis=1)


def random_clifford_batch(m: int, batch: int, rng: np.random.Generator):
    """Uniform Cliffords on m qubits: (sym [B,2m,2m], signs [B,2m])."""
    sym = random_symplectic_batch(m, batch, rng)
    signs = rng.integers(0, 2, size=(batch, 2 * m), dtype=np.uint8)
    return sym, signs


def _image_table(sym: np.ndarray, signs: np.ndarray):
    """Images of I, X_j, Z_j, Y_j per qubit: tx, tz [B, m, 4, m], ts [B, m, 4]."""
    b, d, _ = sym.shape
    m = d // 2
    tx = np.zeros((b, m, 4, m), dtype=np.uint8)
    tz = np.zeros((b, m, 4, m), dtype=np.uint8)
    ts = np.zeros((b, m, 4), dtype=np.int64)
    ix, iz = sym[:, :m], sym[:, m:]
    tx[:, :, 1], tz[:, :, 1] = ix[..., :m], ix[..., m:]
    tx[:, :, 2], tz[:, :, 2] = iz[..., :m], iz[..., m:]
    ts[:, :, 1] = signs[:, :m]
    ts[:, :, 2] = signs[:, m:]
    # Y = i X Z
    e = 1 + pauli_product_phase(ix[..., :m], ix[..., m:], iz[..., :m], iz[..., m:])
    e = e + 2 * (signs[:, :m].astype(np.int64) + signs[:, m:])
    if np.any(e % 2):
        raise InvariantViolation("image of Y is not Hermitian; images do not anticommute")
    tx[:, :, 3] = ix[..., :m] ^ iz[..., :m]
    tz[:, :, 3] = ix[..., m:] ^ iz[..., m:]
    ts[:, :, 3] = (e // 2) % 2
    return tx, tz, ts


def apply_clifford_rows(x, z, r, sym, signs, support: Sequence[int]) -> None:
    """Conjugate Pauli rows in place: x, z [B,R,n], r [B,R] by a batch of Cliffords."""
    support = list(support)
    m = len(support)
    if sym.shape[1] != 2 * m:
        raise UnsupportedParameter("support size does not match the Clifford")
    tx, tz, ts = _image_table(sym, signs)
    xs = x[:, :, support]
    zs = z[:, :, support]
    bsz, nrow = r.shape
    ar = np.arange(bsz)[:, None]
    acc_x = np.zeros((bsz, nrow, m), dtype=np.uint8)
    acc_z = np.zeros((bsz, nrow, m), dtype=np.uint8)
    e = 2 * r.astype(np.int64)
    for j in range(m):
        t = xs[:, :, j] + 2 * zs[:, :, j]
        sx = tx[:, j][ar, t]
        sz = tz[:, j][ar, t]
        e += 2 * ts[:, j][ar, t] + pauli_product_phase(acc_x, acc_z, sx, sz)
        acc_x ^= sx
        acc_z ^= sz
    if np.any(e % 2):
        raise InvariantViolation("conjugated row is not Hermitian")
    x[:, :, support] = acc_x
    z[:, :, support] = acc_z
    r[:] = (e // 2) % 2


def multiply_rows(x, z, e, px, pz, pe, mask) -> None:
    """Replace rows where mask is set by row * pivot (phases as i-exponents)."""
    g = pauli_product_phase(x, z, px[:, None, :], pz[:, None, :])
    e[:] = np.where(mask, (e + pe[:, None] + g) % 4, e)
    mm = mask[..., None].astype(np.uint8)
    x ^= mm * px[:, None, :]
    z ^= mm * pz[:, None, :]


def zero_overlap_sq(x, z, r) -> np.ndarray:
    """|<0|psi>|^2 for a batch of stabilizer states given by n stabilizer rows.

    Row reduction on the X part tracks phases; the remaining Z-type
    stabilizers must all have sign +, and the overlap is then 2^{-rank X}.
    """
    x = x.copy()
    z = z.copy()
    e = 2 * r.astype(np.int64)
    b, nrow, n = x.shape
    ar = np.arange(b)
    used = np.zeros((b, nrow), dtype=bool)
    rk = np.zeros(b, dtype=np.int64)
    for c in range(n):
        cand = (x[:, :, c] == 1) & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        piv = np.argmax(cand, axis=1)
        mask = (x[:, :, c] == 1) & has[:, None]
        mask[ar, piv] = False
        px, pz, pe = x[ar, piv].copy(), z[ar, piv].copy(), e[ar, piv].copy()
        multiply_rows(x, z, e, px, pz, pe, mask)
        used[ar[has], piv[has]] = True
        rk += has
    bad = ((e % 4) == 2) & ~used
    return np.where(bad.any(axis=1), 0.0, np.ldexp(1.0, -rk))


def basis_overlap_sq(x, z, r, bits: int) -> np.ndarray:
    """|<bits|psi>|^2, using X^bits |0> = |bits>."""
    n = x.shape[2]
    mask = np.array([(bits >> q) & 1 for q in range(n)], dtype=np.uint8)
    flip = (np.sum(z & mask, axis=2) & 1).astype(np.uint8)
    return zero_overlap_sq(x, z, r ^ flip)


# --- dense conversion ----------------------------------------------------------


@lru_cache(maxsize=None)
def _generic_vector(dim: int) -> np.ndarray:
    g = np.random.default_rng(20240611)
    return g.normal(size=dim) + 1j * g.normal(size=dim)


def apply_pauli_dense(vec, x, z, e):
    """i^e canonical(x, z) applied to dense vectors [B, 2^n]."""
    b, dim = vec.shape
    n = x.shape[1]
    w = 1 << np.arange(n, dtype=np.int64)
    xm = (x.astype(np.int64) * w).sum(axis=1)
    zm = (z.astype(np.int64) * w).sum(axis=1)
    y = np.bitwise_count(x & z).sum(axis=1) if hasattr(np, "bitwise_count") else np.sum(x & z, axis=1)
    idx = np.arange(dim, dtype=np.int64)[None, :] ^ xm[:, None]
    par = np.bitwise_count(zm[:, None] & idx) & 1
    phase = (1j) ** ((e + y) % 4)
    return phase[:, None] * np.where(par, -1.0, 1.0) * np.take_along_axis(vec, idx, axis=1)


def fix_global_phase(vec: np.ndarray) -> np.ndarray:
    mag = np.abs(vec)
    first = np.argmax(mag > 0.5 * mag.max(axis=1, keepdims=True), axis=1)
    a = vec[np.arange(vec.shape[0]), first]
    return vec * (np.conj(a) / np.abs(a))[:, None]


def stabilizers_to_dense(x, z, r) -> np.ndarray:
    """Dense amplitudes [B, 2^n] of stabilizer states from n stabilizer rows."""
    b, nrow, n = x.shape
    if n > DENSE_CAP_QUBITS:
        raise ResourceCapError(f"dense conversion of {n} qubits exceeds cap {DENSE_CAP_QUBITS}")
    vec = np.broadcast_to(_generic_vector(1 << n), (b, 1 << n)).copy()
    for i in range(nrow):
        vec = vec + apply_pauli_dense(vec, x[:, i], z[:, i], 2 * r[:, i].astype(np.int64))
    vec /= np.linalg.norm(vec, axis=1, keepdims=True)
    return fix_global_phase(vec)


def clifford_to_dense_batch(sym: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Dense unitaries [B, 2^m, 2^m] (up to a global phase per sample)."""
    b, d, _ = sym.shape
    m = d // 2
    dim = 1 << m
    zrows = sym[:, m:]
    col0 = stabilizers_to_dense(zrows[..., :m], zrows[..., m:], signs[:, m:])
    u = np.zeros((b, dim, dim), dtype=complex)
    u[:, :, 0] = col0
    for xv in range(1, dim):
        j = (xv & -xv).bit_length() - 1
        prev = xv ^ (1 << j)
        img = sym[:, j]
        u[:, :, xv] = apply_pauli_dense(
            u[:, :, prev], img[:, :m], img[:, m:], 2 * signs[:, j].astype(np.int64)
        )
    return u


# --- single-object API -----------------------------------------------------------


@dataclass
class CliffordElement:
    n: int
    sym: np.ndarray  # [2n, 2n] uint8
    signs: np.ndarray  # [2n] uint8

    @classmethod
    def identity(cls, n: int) -> "CliffordElement":
        return cls(n, np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, dtype=np.uint8))

    def is_symplectic(self) -> bool:
        n = self.n
        s = self.sym.astype(np.int64)
        omega = np.zeros((2 * n, 2 * n), dtype=np.int64)
        omega[:n, n:] = np.eye(n, dtype=np.int64)
        omega[n:, :n] = np.eye(n, dtype=np.int64)
        return np.array_equal((s @ omega @ s.T) % 2, omega)

    def inverse(self) -> "CliffordElement":
        n = self.n
        inv = _gf2_inverse(self.sym)
        # fix signs so that g(g^{-1}(P)) = +P on every generator
        x = inv[None, :, :n].copy()
        z = inv[None, :, n:].copy()
        r = np.zeros((1, 2 * n), dtype=np.uint8)
        apply_clifford_rows(x, z, r, self.sym[None], self.signs[None], range(n))
        if not (np.array_equal(x[0], np.eye(2 * n, dtype=np.uint8)[:, :n]) and np.array_equal(z[0], np.eye(2 * n, dtype=np.uint8)[:, n:])):
            raise InvariantViolation("symplectic inverse failed")
        return CliffordElement(n, inv, r[0].copy())

    def compose(self, other: "CliffordElement") -> "CliffordElement":
        """The Clifford ``self after other``."""
        n = self.n
        x = other.sym[None, :, :n].copy()
        z = other.sym[None, :, n:].copy()
        r = other.signs[None].copy()
        apply_clifford_rows(x, z, r, self.sym[None], self.signs[None], range(n))
        return CliffordElement(n, np.concatenate([x[0], z[0]], axis=1), r[0])

    def to_dense(self) -> np.ndarray:
        return clifford_to_dense_batch(self.sym[None], self.signs[None])[0]


def random_clifford(n: int, rng: np.random.Generator) -> CliffordElement:
    """Uniform n-qubit Clifford modulo phase, drawn from ``rng``."""
    if n < 1:
        raise UnsupportedParameter("n must be >= 1")
    sym, signs = random_clifford_batch(n, 1, rng)
    return CliffordElement(n, sym[0], signs[0])


@dataclass
class StabilizerTableau:
    """Destabilizer rows 0..n-1 followed by stabilizer rows n..2n-1."""

    n: int
    x: np.ndarray
    z: np.ndarray
    r: np.ndarray

    @classmethod
    def zero_state(cls, n: int) -> "StabilizerTableau":
        eye = np.eye(n, dtype=np.uint8)
        zero = np.zeros((n, n), dtype=np.uint8)
        return cls(
            n,
            np.concatenate([eye, zero]),
            np.concatenate([zero, eye]),
            np.zeros(2 * n, dtype=np.uint8),
        )

    @classmethod
    def from_clifford(cls, g: CliffordElement) -> "StabilizerTableau":
        n = g.n
        return cls(n, g.sym[:, :n].copy(), g.sym[:, n:].copy(), g.signs.copy())

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, self.x.copy(), self.z.copy(), self.r.copy())

    @property
    def stabilizers(self):
        n = self.n
        return self.x[n:], self.z[n:], self.r[n:]

    def is_valid(self) -> bool:
        n = self.n
        rows = np.concatenate([self.x, self.z], axis=1)
        sp = symplectic_product(rows[:, None, :], rows[None, :, :], n)
        expected = np.zeros((2 * n, 2 * n), dtype=np.int64)
        expected[np.arange(n), n + np.arange(n)] = 1
        expected[n + np.arange(n), np.arange(n)] = 1
        return np.array_equal(sp, expected)

    def to_clifford(self) -> CliffordElement:
        return CliffordElement(self.n, np.concatenate([self.x, self.z], axis=1), self.r.copy())

    def to_hex(self) -> list[str]:
        """One hex word per row: bits are x then z then the sign."""
        out = []
        for i in range(2 * self.n):
            bits = list(self.x[i]) + list(self.z[i]) + [self.r[i]]
            v = 0
            for j, bit in enumerate(bits):
                v |= int(bit) << j
            out.append(format(v, "x"))
        return out


def _check_support(n: int, support: Sequence[int], m: int) -> list[int]:
    support = [int(q) for q in support]
    if len(support) != m:
        raise UnsupportedParameter(f"support has {len(support)} qubits, Clifford acts on {m}")
    if len(set(support)) != m or any(q < 0 or q >= n for q in support):
        raise IndexError(f"support {support} invalid for {n} qubits")
    return support


def apply_clifford(tab: StabilizerTableau, g: CliffordElement, support: Sequence[int]) -> StabilizerTableau:
    support = _check_support(tab.n, support, g.n)
    out = tab.copy()
    x, z, r = out.x[None], out.z[None], out.r[None]
    apply_clifford_rows(x, z, r, g.sym[None], g.signs[None], support)
    return out


def tableau_to_dense(tab: StabilizerTableau) -> np.ndarray:
    x, z, r = tab.stabilizers
    return stabilizers_to_dense(x[None], z[None], r[None])[0]


def overlap_sq(a: StabilizerTableau, b: StabilizerTableau) -> Fraction:
    """Exact |<a|b>|^2 from tableaux: map a to |0> and test b there."""
    if a.n != b.n:
        raise UnsupportedParameter("tableaux have different qubit counts")
    ginv = a.to_clifford().inverse()
    c = apply_clifford(b, ginv, range(a.n))
    x, z, r = c.stabilizers
    p = zero_overlap_sq(x[None], z[None], r[None])[0]
    return Fraction(p).limit_denominator(1 << a.n) if p else Fraction(0)


def stab_inner_product(a: StabilizerTableau, b: StabilizerTableau) -> complex:
    """<a|b> with each state in the dense phase convention.

    The magnitude comes from tableau algebra for any n; the phase needs the
    dense amplitudes, so above the dense cap only the magnitude is returned.
    """
    mag2 = overlap_sq(a, b)
    if mag2 == 0:
        return 0j
    mag = float(mag2) ** 0.5
    if a.n > DENSE_CAP_QUBITS:
        return complex(mag)
    amp = complex(np.vdot(tableau_to_dense(a), tableau_to_dense(b)))
    if abs(abs(amp) - mag) > 1e-9:
        raise InvariantViolation("dense and tableau overlaps disagree")
    return amp


__all__ = [
    "CliffordElement",
    "StabilizerTableau",
    "random_symplectic_batch",
    "random_clifford_batch",
    "random_clifford",
    "apply_clifford_rows",
    "apply_clifford",
    "zero_overlap_sq",
    "basis_overlap_sq",
    "stabilizers_to_dense",
    "clifford_to_dense_batch",
    "tableau_to_dense",
    "overlap_sq",
    "stab_inner_product",
    "symplectic_product",
    "pauli_product_phase",
    "apply_pauli_dense",
]
