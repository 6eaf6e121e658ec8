"""Dense state vectors, architecture sampling and exact twirl channels.

Basis ordering: qubit 0 is the least significant bit of an amplitude index.
On the k-fold replica space the copies are blocked contiguously (copy-major):
replica c, qubit q sits at bit n(k-1-c) + q, which is what
``np.kron(psi, psi, ...)`` produces. Moment operators are plain square numpy
arrays of size 2^{nk} in that ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Optional, Sequence, Union

import numpy as np

from . import commutant, stabsim
from .errors import ConfigError, ResourceCapError, UnsupportedParameter

STATE_CAP_QUBITS = 14
MOMENT_CAP_DIM = 4096


# --- Haar sampling ------------------------------------------------------------------


def haar_unitary_batch(d: int, batch: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitaries [batch, d, d]: Ginibre, QR, then a positive R diagonal."""
    g = (rng.normal(size=(batch, d, d)) + 1j * rng.normal(size=(batch, d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d < 1 or d & (d - 1):
        raise UnsupportedParameter(f"d must be a power of two, got {d}")
    return haar_unitary_batch(d, 1, rng)[0]


# --- states ------------------------------------------------------------------------


@dataclass
class DenseState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n,):
            raise ConfigError("amplitude vector has the wrong length")
        if abs(np.linalg.norm(self.amplitudes) - 1) > 1e-12:
            raise ConfigError("state is not normalized")


def zero_state(n: int) -> np.ndarray:
    v = np.zeros(1 << n, dtype=complex)
    v[0] = 1
    return v


def apply_on_support(states: np.ndarray, gates: np.ndarray, support: Sequence[int], n: int) -> np.ndarray:
    """Apply gates [B, 2^m, 2^m] to states [B, 2^n] on the listed qubits.

    Bit j of the gate index addresses qubit support[j].
    """
    b = states.shape[0]
    m = len(support)
    psi = states.reshape((b,) + (2,) * n)
    axes = [1 + n - 1 - q for q in support]  # batch axis comes first
    g = gates.reshape((b,) + (2,) * (2 * m))
    # contract gate input axes (bit j -> axis 1 + 2m-1-j) with the state axes
    out_axes = [1 + m - 1 - j for j in range(m)]
    in_axes = [1 + 2 * m - 1 - j for j in range(m)]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    s_idx = ["Z"] + [letters[i] for i in range(n)]
    g_idx = ["Z"] + [None] * (2 * m)
    new = list(s_idx)
    for j in range(m):
        ax = axes[j]
        g_idx[in_axes[j]] = s_idx[ax]
        fresh = letters[n + j]
        g_idx[out_axes[j]] = fresh
        new[ax] = fresh
    expr = "".join(g_idx) + "," + "".join(s_idx) + "->" + "".join(new)
    return np.einsum(expr, g, psi).reshape(b, 1 << n)


# --- architecture specs ---------------------------------------------------------------


@dataclass(frozen=True)
class CliffordBlocks:
    """Independent uniform Cliffords on disjoint blocks."""

    blocks: tuple


@dataclass(frozen=True)
class TwoLayerClifford:
    """Brickwork of two Clifford layers with blocks of 2*xi qubits offset by xi.

    ``open`` truncates the edge blocks of both layers at the chain ends;
    ``periodic`` wraps the offset layer around.
    """

    xi: int
    boundary: str = "open"

    def expand(self, n: int) -> list[CliffordBlocks]:
        xi = self.xi
        if xi < 1:
            raise ConfigError("xi must be >= 1")
        if self.boundary not in ("open", "periodic"):
            raise ConfigError(f"unknown boundary mode {self.boundary!r}")
        a = tuple(tuple(range(s, min(s + 2 * xi, n))) for s in range(0, n, 2 * xi))
        if self.boundary == "open":
            b = [tuple(range(0, min(xi, n)))]
            b += [tuple(range(s, min(s + 2 * xi, n))) for s in range(xi, n, 2 * xi)]
        else:
            if n % (2 * xi):
                raise ConfigError("periodic two-layer circuits need n divisible by 2*xi")
            b = [tuple(q % n for q in range(s, s + 2 * xi)) for s in range(xi, n + xi, 2 * xi)]
        return [CliffordBlocks(a), CliffordBlocks(tuple(blk for blk in b if blk))]


@dataclass(frozen=True)
class GlobalClifford:
    pass


@dataclass(frozen=True)
class HaarClusterLayer:
    clusters: tuple


@dataclass(frozen=True)
class SingleQubitHaarLayer:
    positions: tuple

    @property
    def count(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class FixedProductInput:
    """Product input state; ``states`` holds one 2-vector per qubit."""

    states: tuple


@dataclass(frozen=True)
class FixedInput:
    """Arbitrary dense input state (for example an EPR pair for Choi states)."""

    amplitudes: tuple


Layer = Union[CliffordBlocks, TwoLayerClifford, GlobalClifford, HaarClusterLayer, SingleQubitHaarLayer, FixedProductInput, FixedInput]


@dataclass
class ArchitectureSpec:
    n: int
    layers: list = field(default_factory=list)
    role: str = "state"

    def primitive_layers(self) -> list[tuple[str, object]]:
        """Layers as ("input", vector) | ("clifford", blocks) | ("haar", clusters)."""
        n = self.n
        if n < 1:
            raise ConfigError("n must be >= 1")
        if self.role not in ("state", "unitary"):
            raise ConfigError(f"unknown role {self.role!r}")
        out: list[tuple[str, object]] = []
        for i, layer in enumerate(self.layers):
            if isinstance(layer, (FixedProductInput, FixedInput)):
                if i:
                    raise ConfigError("a fixed input must be the first layer")
                if isinstance(layer, FixedProductInput):
                    if len(layer.states) != n:
                        raise ConfigError("product input needs one state per qubit")
                    vecs = [np.asarray(s, dtype=complex) for s in layer.states]
                    vec = reduce(np.kron, vecs[::-1])
                else:
                    vec = np.asarray(layer.amplitudes, dtype=complex)
                if vec.shape != (1 << n,) or abs(np.linalg.norm(vec) - 1) > 1e-12:
                    raise ConfigError("input state has the wrong size or norm")
                out.append(("input", vec))
            elif isinstance(layer, TwoLayerClifford):
                out += [("clifford", lay.blocks) for lay in layer.expand(n)]
            elif isinstance(layer, GlobalClifford):
                out.append(("clifford", (tuple(range(n)),)))
            elif isinstance(layer, CliffordBlocks):
                out.append(("clifford", tuple(tuple(b) for b in layer.blocks)))
            elif isinstance(layer, HaarClusterLayer):
                out.append(("haar", tuple(tuple(c) for c in layer.clusters)))
            elif isinstance(layer, SingleQubitHaarLayer):
                out.append(("haar", tuple((q,) for q in layer.positions)))
            else:
                raise ConfigError(f"unsupported layer {layer!r}")
        for kind, blocks in out:
            if kind == "input":
                continue
            seen: set[int] = set()
            for blk in blocks:
                if not blk:
                    raise ConfigError("empty block")
                for q in blk:
                    if q < 0 or q >= n or q in seen:
                        raise ConfigError(f"blocks overlap or leave the register: {blocks}")
                    seen.add(q)
        return out

    def is_clifford_only(self) -> bool:
        return all(kind == "clifford" for kind, _ in self.primitive_layers())


def magic_architecture(
    n: int,
    xi: int,
    n_magic: int,
    placement: str = "final",
    boundary: str = "open",
    positions: Optional[Sequence[int]] = None,
) -> ArchitectureSpec:
    """Two-layer Clifford circuit with single-qubit Haar gates before, after or both.

    Magic gates default to the leftmost qubits.
    """
    if not 0 <= n_magic <= n:
        raise ConfigError("need 0 <= N_M <= n")
    pos = tuple(positions) if positions is not None else tuple(range(n_magic))
    if len(pos) != n_magic:
        raise ConfigError("positions must list N_M qubits")
    clif = TwoLayerClifford(xi, boundary)
    magic = [SingleQubitHaarLayer(pos)] if n_magic else []
    if placement == "final":
        layers = [clif] + magic
    elif placement == "initial":
        layers = magic + [clif]
    elif placement == "sandwich":
        layers = [clif] + magic + [clif]
    else:
        raise ConfigError(f"unknown magic placement {placement!r}")
    return ArchitectureSpec(n, layers)


def relative_architecture(n: int, xi: int, ell: int, boundary: str = "open") -> ArchitectureSpec:
    """Two-layer Clifford circuit followed by Haar gates on clusters of ell qubits."""
    clusters = tuple(tuple(range(s, min(s + ell, n))) for s in range(0, n, ell))
    return ArchitectureSpec(n, [TwoLayerClifford(xi, boundary), HaarClusterLayer(clusters)])


# --- sampling -----------------------------------------------------------------------------


def _check_state_cap(n: int, cap: int) -> None:
    if n > cap:
        raise ResourceCapError(f"{n} qubits exceed the dense state cap {cap}")


def sample_state(spec: ArchitectureSpec, rng: np.random.Generator, cap: int = STATE_CAP_QUBITS) -> DenseState:
    """One draw from the ensemble.

    The Clifford prefix runs on a tableau, one ``random_clifford`` per block in
    layer order, and is densified at the first non-Clifford layer, so a
    Clifford-only spec reproduces the stabsim trajectory for the same stream.
    """
    n = spec.n
    _check_state_cap(n, cap)
    layers = spec.primitive_layers()
    tab = stabsim.StabilizerTableau.zero_state(n)
    vec: Optional[np.ndarray] = None
    for kind, obj in layers:
        if kind == "input":
            vec = obj.copy()
        elif kind == "clifford":
            for blk in obj:
                g = stabsim.random_clifford(len(blk), rng)
                if vec is None:
                    tab = stabsim.apply_clifford(tab, g, blk)
                else:
                    vec = apply_on_support(vec[None], g.to_dense()[None], blk, n)[0]
        else:
            if vec is None:
                vec = stabsim.tableau_to_dense(tab)
            for blk in obj:
                u = haar_unitary(1 << len(blk), rng)
                vec = apply_on_support(vec[None], u[None], blk, n)[0]
    if vec is None:
        vec = stabsim.tableau_to_dense(tab)
    return DenseState(n, vec)


def sample_tableau(spec: ArchitectureSpec, rng: np.random.Generator) -> stabsim.StabilizerTableau:
    """Clifford-only specs: the tableau of one draw (same stream use as sample_state)."""
    if not spec.is_clifford_only():
        raise UnsupportedParameter("spec contains non-Clifford layers")
    tab = stabsim.StabilizerTableau.zero_state(spec.n)
    for _, blocks in spec.primitive_layers():
        for blk in blocks:
            tab = stabsim.apply_clifford(tab, stabsim.random_clifford(len(blk), rng), blk)
    return tab


def _clifford_rows_batch(n: int, layers, batch: int, rng: np.random.Generator):
    x = np.zeros((batch, n, n), dtype=np.uint8)
    z = np.broadcast_to(np.eye(n, dtype=np.uint8), (batch, n, n)).copy()
    r = np.zeros((batch, n), dtype=np.uint8)
    for blocks in layers:
        for blk in blocks:
            sym, signs = stabsim.random_clifford_batch(len(blk), batch, rng)
            stabsim.apply_clifford_rows(x, z, r, sym, signs, blk)
    return x, z, r


def sample_states_batch(
    spec: ArchitectureSpec, batch: int, rng: np.random.Generator, cap: int = STATE_CAP_QUBITS
) -> np.ndarray:
    """``batch`` i.i.d. draws as a [batch, 2^n] array (vectorized; its own stream use)."""
    n = spec.n
    _check_state_cap(n, cap)
    layers = spec.primitive_layers()
    i = 0
    prefix = []
    while i < len(layers) and layers[i][0] == "clifford":
        prefix.append(layers[i][1])
        i += 1
    if i < len(layers) and layers[i][0] == "input":
        vec = np.broadcast_to(layers[i][1], (batch, 1 << n)).copy()
        i += 1
    else:
        x, z, r = _clifford_rows_batch(n, prefix, batch, rng)
        vec = stabsim.stabilizers_to_dense(x, z, r)
    for kind, blocks in layers[i:]:
        for blk in blocks:
            if kind == "clifford":
                sym, signs = stabsim.random_clifford_batch(len(blk), batch, rng)
                gates = stabsim.clifford_to_dense_batch(sym, signs)
            else:
                gates = haar_unitary_batch(1 << len(blk), batch, rng)
            vec = apply_on_support(vec, gates, blk, n)
    return vec


def folded_overlap_batch(spec: ArchitectureSpec, batch: int, rng: np.random.Generator) -> np.ndarray:
    """Samples of |<psi|phi>|^2 for independent psi, phi from the ensemble.

    Every layer distribution here is invariant under inversion and under
    multiplication by an independent copy, so <0|V^dag V'|0> has the law of
    <0|L_1^dag...L_{m-1}^dag L_m L_{m-1}...L_1|0> with fresh independent
    layers: the circuit is folded around its last layer. Clifford-only specs
    stay on tableaux.
    """
    n = spec.n
    layers = spec.primitive_layers()
    if layers and layers[0][0] == "input":
        inp = layers[0][1]
        layers = layers[1:]
    else:
        inp = None
    folded = layers + layers[-2::-1] if layers else []
    if inp is None and all(kind == "clifford" for kind, _ in folded):
        x, z, r = _clifford_rows_batch(n, [blk for _, blk in folded], batch, rng)
        return stabsim.zero_overlap_sq(x, z, r)
    spec2 = ArchitectureSpec(n, ([FixedInput(tuple(inp))] if inp is not None else []) + [_as_layer(k, b) for k, b in folded])
    vec = sample_states_batch(spec2, batch, rng)
    ref = inp if inp is not None else zero_state(n)
    return np.abs(vec @ np.conj(ref)) ** 2


def _as_layer(kind: str, blocks) -> Layer:
    return CliffordBlocks(blocks) if kind == "clifford" else HaarClusterLayer(blocks)


def sample_unitary(spec: ArchitectureSpec, rng: np.random.Generator, cap: int = 10) -> np.ndarray:
    """Dense unitary of one draw of a unitary ensemble (inputs not allowed)."""
    n = spec.n
    if n > cap:
        raise ResourceCapError(f"{n} qubits exceed the dense unitary cap {cap}")
    u = np.eye(1 << n, dtype=complex)
    for kind, blocks in spec.primitive_layers():
        if kind == "input":
            raise ConfigError("unitary ensembles take no input state")
        for blk in blocks:
            if kind == "clifford":
                g = stabsim.random_clifford(len(blk), rng).to_dense()
            else:
                g = haar_unitary(1 << len(blk), rng)
            # apply to every column
            u = apply_on_support(u.T, np.broadcast_to(g, (1 << n,) + g.shape), blk, n).T
    return u


# --- exact twirls ------------------------------------------------------------------------


def replica_power(vec: np.ndarray, k: int) -> np.ndarray:
    return reduce(np.kron, [vec] * k)


@lru_cache(maxsize=None)
def _operator_indices(k: int, m: int, kind: str):
    cat = commutant.enumerate_sigma(k)
    if kind == "clifford":
        els = cat.elements
        w = commutant.clifford_twirl_float(k, m)
    else:
        els = [cat.elements[cat.perm_index(p)] for p in commutant.permutations(k)]
        w = commutant.haar_twirl_float(k, 1 << m)
    idx = [commutant.r_indices(t, m) for t in els]
    return idx, w


def _support_axes(support: Sequence[int], n: int, k: int) -> list[int]:
    m = len(support)
    # tensor axis of replica c, qubit q is n*c + n-1-q; r(T) on the support
    # uses m*c + m-1-j for the j-th support qubit
    return [n * c + n - 1 - support[m - 1 - jj] for c in range(k) for jj in range(m)]


def twirl_block(rho: np.ndarray, support: Sequence[int], n: int, k: int, kind: str) -> np.ndarray:
    """Exact k-fold twirl of a moment operator over one block."""
    m = len(support)
    sup = _support_axes(support, n, k)
    rest = [a for a in range(n * k) if a not in sup]
    nk = n * k
    perm = sup + rest + [nk + a for a in sup] + [nk + a for a in rest]
    da, dr = 1 << (m * k), 1 << (nk - m * k)
    x4 = rho.reshape((2,) * (2 * nk)).transpose(perm).reshape(da, dr, da, dr)
    idx, w = _operator_indices(k, m, kind)
    coeff = np.stack([x4[ri, :, ci, :].sum(axis=0) for ri, ci in idx])
    y = np.tensordot(w, coeff, axes=(1, 0))
    out = np.zeros_like(x4)
    for (ri, ci), yt in zip(idx, y):
        out[ri, :, ci, :] += yt
    inv = np.argsort(perm)
    return out.reshape((2,) * (2 * nk)).transpose(inv).reshape(rho.shape)


def exact_twirl_moment(spec: ArchitectureSpec, k: int, cap: int = MOMENT_CAP_DIM) -> np.ndarray:
    """Exact k-th moment of the ensemble by composing twirl channels."""
    n = spec.n
    dim = 1 << (n * k)
    if dim > cap:
        raise ResourceCapError(f"replica dimension 2^{n * k} exceeds the moment cap {cap}")
    layers = spec.primitive_layers()
    if layers and layers[0][0] == "input":
        vec = layers[0][1]
        layers = layers[1:]
    else:
        vec = zero_state(n)
    psi = replica_power(vec, k)
    if np.isrealobj(psi) or not np.any(psi.imag):
        psi = psi.real
    rho = np.outer(psi, np.conj(psi))
    for kind, blocks in layers:
        for blk in blocks:
            rho = twirl_block(rho, blk, n, k, kind)
    return rho


__all__ = [
    "haar_unitary",
    "haar_unitary_batch",
    "DenseState",
    "zero_state",
    "apply_on_support",
    "CliffordBlocks",
    "TwoLayerClifford",
    "GlobalClifford",
    "HaarClusterLayer",
    "SingleQubitHaarLayer",
    "FixedProductInput",
    "FixedInput",
    "ArchitectureSpec",
    "magic_architecture",
    "relative_architecture",
    "sample_state",
    "sample_tableau",
    "sample_states_batch",
    "folded_overlap_batch",
    "sample_unitary",
    "replica_power",
    "twirl_block",
    "exact_twirl_moment",
]
