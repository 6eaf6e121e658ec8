"""Design-error analytics on moment operators and sampled ensembles.

Trace distances follow the convention ||A||_1 = sum of |eigenvalues|, with no
factor 1/2. Moment operators are dense arrays in the copy-major replica order
of ``densesim``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import commutant, densesim, stabsim
from .errors import ConfigError, InvalidMoment, ResourceCapError, UnsupportedParameter

LEAKAGE_TOL = 1e-8
SRE_CAP_QUBITS = 12
MC_CHUNK = 20_000

PROVENANCE = ("closed-form", "dense", "transfer-matrix", "monte-carlo")


# --- constants ------------------------------------------------------------------


def d_sym(N: int, k: int) -> int:
    return math.comb(2**N + k - 1, k)


def haar_D(N: int, k: int) -> int:
    """D_{N,k} = prod_{i<k} (2^N + i) = k! d_sym."""
    return math.prod(2**N + i for i in range(k))


def clifford_Z(n: int, k: int) -> int:
    """Z_{n,k} = 2^n prod_{i=0}^{k-2} (2^n + 2^i)."""
    return 2**n * math.prod(2**n + 2**i for i in range(k - 1))


@dataclass(frozen=True)
class HaarConstants:
    N: int
    k: int

    @property
    def d_sym(self) -> int:
        return d_sym(self.N, self.k)

    @property
    def D(self) -> int:
        return haar_D(self.N, self.k)

    @property
    def Z(self) -> int:
        return clifford_Z(self.N, self.k)


# --- moment operators -----------------------------------------------------------


def _check_dim(N: int, k: int, cap: int) -> None:
    if (1 << (N * k)) > cap:
        raise ResourceCapError(f"replica dimension 2^{N * k} exceeds cap {cap}")


def haar_moment(N: int, k: int, cap: int = densesim.MOMENT_CAP_DIM) -> np.ndarray:
    """P_sym / d_sym, with P_sym the average of the k! replica permutations."""
    _check_dim(N, k, cap)
    cat = commutant.enumerate_sigma(k)
    dim = 1 << (N * k)
    out = np.zeros((dim, dim))
    for p in commutant.permutations(k):
        r, c = commutant.r_indices(cat.elements[cat.perm_index(p)], N)
        out[r, c] += 1
    return out / haar_D(N, k)


def clifford_moment(N: int, k: int, cap: int = densesim.MOMENT_CAP_DIM) -> np.ndarray:
    """Z_{N,k}^{-1} sum over Sigma_{k,k} of r(T)^{tensor N}."""
    _check_dim(N, k, cap)
    cat = commutant.enumerate_sigma(k)
    dim = 1 << (N * k)
    out = np.zeros((dim, dim))
    for t in cat.elements:
        r, c = commutant.r_indices(t, N)
        out[r, c] += 1
    return out / clifford_Z(N, k)


def frame_potential_exact(ensemble: str, N: int, k: int) -> Fraction:
    if ensemble == "haar":
        return Fraction(1, d_sym(N, k))
    if ensemble == "clifford":
        return Fraction(commutant.sigma_count(k), clifford_Z(N, k))
    raise ConfigError(f"unknown ensemble {ensemble!r}")


def collision_exact_clifford(N: int, k: int) -> Fraction:
    """E |<x|V|0>|^{2k} over global Cliffords, the same for every x."""
    return Fraction(commutant.sigma_count(k), clifford_Z(N, k))


# --- Monte Carlo estimators ---------------------------------------------------------


@dataclass
class MCEstimate:
    mean: float
    stderr: float
    samples: int

    def within(self, value: float, nsigma: float = 3.0) -> bool:
        return abs(self.mean - value) <= nsigma * self.stderr


class _Accumulator:
    def __init__(self):
        self.n = 0
        self.s1 = 0.0
        self.s2 = 0.0

    def add(self, vals: np.ndarray) -> None:
        self.n += vals.size
        self.s1 += float(np.sum(vals))
        self.s2 += float(np.sum(vals * vals))

    def result(self) -> MCEstimate:
        mean = self.s1 / self.n
        var = max(self.s2 / self.n - mean * mean, 0.0) * self.n / max(self.n - 1, 1)
        return MCEstimate(mean, math.sqrt(var / self.n), self.n)


def _chunks(samples: int, chunk: int = MC_CHUNK):
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        yield b
        done += b


def frame_potential_mc(
    spec: densesim.ArchitectureSpec,
    k: int,
    samples: int,
    rng: np.random.Generator,
    method: str = "folded",
) -> MCEstimate:
    """Estimate E |<psi|phi>|^{2k} from i.i.d. pairs.

    ``pairs`` draws two independent dense states per sample. ``folded`` draws
    one folded circuit per sample whose overlap with the input has exactly the
    law of a pair overlap (see ``densesim.folded_overlap_batch``); it runs on
    tableaux for Clifford-only specs.
    """
    if samples < 2:
        raise ConfigError("need at least two samples")
    acc = _Accumulator()
    for b in _chunks(samples):
        if method == "folded":
            p = densesim.folded_overlap_batch(spec, b, rng)
        elif method == "pairs":
            a = densesim.sample_states_batch(spec, b, rng)
            c = densesim.sample_states_batch(spec, b, rng)
            p = np.abs(np.einsum("bi,bi->b", np.conj(a), c)) ** 2
        else:
            raise ConfigError(f"unknown method {method!r}")
        acc.add(p**k)
    return acc.result()


def collision_probability(
    spec: densesim.ArchitectureSpec, x: int, k: int, samples: int, rng: np.random.Generator
) -> MCEstimate:
    """Estimate E |<x|psi>|^{2k} for the basis state labelled by the bits of x."""
    n = spec.n
    if not 0 <= x < (1 << n):
        raise ConfigError("bitstring out of range")
    layers = spec.primitive_layers()
    clifford = all(kind == "clifford" for kind, _ in layers)
    acc = _Accumulator()
    for b in _chunks(samples):
        if clifford:
            xs, zs, rs = densesim._clifford_rows_batch(n, [blk for _, blk in layers], b, rng)
            p = stabsim.basis_overlap_sq(xs, zs, rs, x)
        else:
            p = np.abs(densesim.sample_states_batch(spec, b, rng)[:, x]) ** 2
        acc.add(p**k)
    return acc.result()


@dataclass
class MomentEstimate:
    matrix: np.ndarray
    sigma: float  # sqrt(E ||X - rho||_F^2 / M), the 2-norm standard error
    samples: int


def mc_moment(spec: densesim.ArchitectureSpec, k: int, samples: int, rng: np.random.Generator) -> MomentEstimate:
    """Empirical k-th moment from i.i.d. states with its 2-norm standard error."""
    _check_dim(spec.n, k, densesim.MOMENT_CAP_DIM)
    dim = 1 << (spec.n * k)
    acc = np.zeros((dim, dim), dtype=complex)
    vecs = []
    for b in _chunks(samples):
        st = densesim.sample_states_batch(spec, b, rng)
        rep = st
        for _ in range(k - 1):
            rep = np.einsum("bi,bj->bij", rep, st).reshape(b, -1)
        acc += rep.T @ np.conj(rep)
        vecs.append(rep)
    rho = acc / samples
    fro2 = float(np.sum(np.abs(rho) ** 2))
    dev = 0.0
    for rep in vecs:
        quad = np.einsum("bi,ij,bj->b", np.conj(rep), rho, rep).real
        dev += float(np.sum(1 - 2 * quad + fro2))
    sigma = math.sqrt(max(dev, 0.0) / samples / samples)
    return MomentEstimate(rho, sigma, samples)


# --- distances ---------------------------------------------------------------------------


def additive_error_bound(F_E: float, F_H: float, N: int, k: int, return_flag: bool = False):
    """sqrt(2^{Nk} (F_E - F_H)); negative differences are clipped to zero."""
    diff = float(F_E) - float(F_H)
    clipped = diff < 0
    if clipped:
        warnings.warn("frame potential below the Haar value; clipping to zero", RuntimeWarning)
        diff = 0.0
    val = math.sqrt(math.ldexp(diff, N * k))
    return (val, clipped) if return_flag else val


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ConfigError(f"dimension mismatch {a.shape} vs {b.shape}")
    d = a - b
    d = (d + np.conj(d.T)) / 2
    return float(np.sum(np.abs(np.linalg.eigvalsh(d))))


@lru_cache(maxsize=None)
def symmetric_basis(N: int, k: int) -> np.ndarray:
    """Orthonormal basis of the symmetric subspace, one column per multiset."""
    d = 1 << N
    dim = 1 << (N * k)
    cols = []
    for multiset in itertools.combinations_with_replacement(range(d), k):
        words = set(itertools.permutations(multiset))
        v = np.zeros(dim)
        for w in words:
            v[sum(s << (N * (k - 1 - c)) for c, s in enumerate(w))] = 1
        cols.append(v / math.sqrt(len(words)))
    return np.array(cols).T


def relative_error_state(rho: np.ndarray, N: int, k: int) -> float:
    """Smallest eps with (1-eps) rho_H <= rho <= (1+eps) rho_H."""
    _check_dim(N, k, densesim.MOMENT_CAP_DIM)
    if rho.shape != (1 << (N * k),) * 2:
        raise ConfigError("moment has the wrong dimension")
    Q = symmetric_basis(N, k)
    inner = np.conj(Q.T) @ rho @ Q
    leak = np.linalg.norm(rho - Q @ inner @ np.conj(Q.T))
    if leak > LEAKAGE_TOL:
        raise InvalidMoment(f"moment leaks {leak:.3g} outside the symmetric subspace")
    lam = np.linalg.eigvalsh((inner + np.conj(inner.T)) / 2)
    return float(np.max(np.abs(d_sym(N, k) * lam - 1)))


def check_moment(rho: np.ndarray, N: int, k: int, tol: float = 1e-10) -> None:
    """Raise InvalidMoment unless rho is Hermitian, PSD, trace one and symmetric."""
    if np.max(np.abs(rho - np.conj(rho.T))) > tol:
        raise InvalidMoment("moment is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidMoment("moment does not have unit trace")
    if np.linalg.eigvalsh((rho + np.conj(rho.T)) / 2).min() < -tol:
        raise InvalidMoment("moment is not positive semidefinite")
    relative_error_state(rho, N, k)


# --- Pauli spectrum and stabilizer Renyi entropy -------------------------------------------


def _wht(f: np.ndarray, n: int) -> np.ndarray:
    """Walsh-Hadamard transform along the last axis (no normalization)."""
    shape = f.shape
    g = f.reshape(-1, *([2] * n))
    for ax in range(1, n + 1):
        a = np.take(g, 0, axis=ax)
        b = np.take(g, 1, axis=ax)
        g = np.stack([a + b, a - b], axis=ax)
    return g.reshape(shape)


def pauli_spectrum(psi: np.ndarray, chunk: int = 512) -> np.ndarray:
    """<psi| X^x Z^z |psi> up to the phase i^{x.z}, as a [2^n, 2^n] array [x, z].

    Its modulus is the modulus of the Hermitian Pauli expectation value.
    """
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    if n > SRE_CAP_QUBITS:
        raise ResourceCapError(f"Pauli enumeration over {n} qubits exceeds cap {SRE_CAP_QUBITS}")
    idx = np.arange(dim)
    out = np.empty((dim, dim), dtype=complex)
    for s in range(0, dim, chunk):
        xs = idx[s : s + chunk]
        f = np.conj(psi[idx[None, :] ^ xs[:, None]]) * psi[None, :]
        out[s : s + chunk] = _wht(f, n)
    return out


def sre_pauli_moment(psi: np.ndarray, k: int = 4) -> float:
    """2^{-N} sum_P <psi|P|psi>^k over all 4^N Pauli strings (k even)."""
    if k % 2:
        raise UnsupportedParameter("k must be even")
    psi = np.asarray(psi, dtype=complex)
    n = psi.shape[0].bit_length() - 1
    spec = np.abs(pauli_spectrum(psi))
    return float(np.sum(spec**k)) / 2**n


def sre2(psi: np.ndarray) -> float:
    return -math.log2(sre_pauli_moment(psi, 4))


def haar_pauli_moment(N: int) -> Fraction:
    return Fraction(4, 2**N + 3)


def renyi2_entropy(psi: np.ndarray, region: Sequence[int], n: int) -> float:
    """Second Renyi entropy (base 2) of the reduced state on ``region``."""
    t = np.asarray(psi).reshape([2] * n)
    axes = [n - 1 - q for q in region]
    rest = [a for a in range(n) if a not in axes]
    m = t.transpose(axes + rest).reshape(1 << len(axes), -1)
    red = m @ np.conj(m.T)
    # purity can exceed 1 by rounding; entropies are clamped at zero
    return max(0.0, -math.log2(float(np.sum(np.abs(red) ** 2))))


def nogo_terms(entropies: Sequence[tuple[float, int]]) -> float:
    """sum_i 2^{-2 S_i} (1 - 2^{S_i - N_i})."""
    total = 0.0
    for s, ni in entropies:
        if s < 0 or ni < 1:
            raise ConfigError("need S_i >= 0 and N_i >= 1")
        total += 2.0 ** (-2 * s) * (1 - 2.0 ** (s - ni))
    return total


def nogo_lower_bound(entropies: Sequence[tuple[float, int]]) -> float:
    """Lower bound on the relative error; values <= 0 are vacuous."""
    return (nogo_terms(entropies) - 3) / 24


def intermediate_bound(entropies: Sequence[tuple[float, int]], N: int) -> float:
    """Right-hand side 2^{-N} [1 + sum_i ...] of the per-state Pauli-moment bound."""
    return (1 + nogo_terms(entropies)) / 2**N


def shallow_circuit_state(n: int, rng: np.random.Generator, depth: int = 1) -> np.ndarray:
    """|0> under ``depth`` brickwork layers of two-qubit Haar gates."""
    vec = densesim.zero_state(n)[None]
    for layer in range(depth):
        for s in range(layer % 2, n - 1, 2):
            u = densesim.haar_unitary(4, rng)
            vec = densesim.apply_on_support(vec, u[None], (s, s + 1), n)
    return vec[0]


# --- Choi states -----------------------------------------------------------------------------


def epr_state(n: int) -> np.ndarray:
    """2^{-n/2} sum_j |j>|j>, system qubits 0..n-1, reference qubits n..2n-1."""
    v = np.zeros(1 << (2 * n), dtype=complex)
    j = np.arange(1 << n)
    v[j | (j << n)] = 2 ** (-n / 2)
    return v


def choi_spec(spec: densesim.ArchitectureSpec) -> densesim.ArchitectureSpec:
    """State ensemble {(U x I)|EPR>} on 2n qubits for a unitary ensemble."""
    prims = spec.primitive_layers()
    if any(kind == "input" for kind, _ in prims):
        raise ConfigError("unitary ensembles take no input state")
    # layers are expanded on the n system qubits so that global layers leave the reference alone
    layers = [densesim._as_layer(kind, blocks) for kind, blocks in prims]
    return densesim.ArchitectureSpec(2 * spec.n, [densesim.FixedInput(tuple(epr_state(spec.n)))] + layers)


def choi_state_moment(
    spec: densesim.ArchitectureSpec,
    k: int,
    samples: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """k-th moment of the Choi-state ensemble; exact twirls unless samples is given."""
    cs = choi_spec(spec)
    if samples is None:
        return densesim.exact_twirl_moment(cs, k)
    if rng is None:
        raise ConfigError("sampling needs an rng")
    return mc_moment(cs, k, samples, rng).matrix


def choi_envelope(eps_prime: float, N: int, k: int) -> float:
    """(1+eps')(1+k^2 2^{-N})(1+k^2 2^{-2N}) - 1."""
    return (1 + eps_prime) * (1 + k * k * 2.0**-N) * (1 + k * k * 2.0 ** (-2 * N)) - 1


# --- report rows --------------------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, Fraction):
        return {"fraction": f"{v.numerator}/{v.denominator}", "float": float(v)}
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(a): _jsonable(b) for a, b in v.items()}
    return v


@dataclass
class DesignReportEntry:
    quantity: str
    provenance: str
    exact: object = None
    estimate: Optional[float] = None
    stderr: Optional[float] = None
    samples: Optional[int] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise ConfigError(f"unknown provenance tag {self.provenance!r}")

    @classmethod
    def from_mc(cls, quantity: str, est: MCEstimate, exact=None, **params) -> "DesignReportEntry":
        return cls(quantity, "monte-carlo", exact, est.mean, est.stderr, est.samples, params)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


__all__ = [
    "d_sym",
    "haar_D",
    "clifford_Z",
    "HaarConstants",
    "haar_moment",
    "clifford_moment",
    "frame_potential_exact",
    "collision_exact_clifford",
    "MCEstimate",
    "frame_potential_mc",
    "collision_probability",
    "MomentEstimate",
    "mc_moment",
    "additive_error_bound",
    "trace_distance",
    "symmetric_basis",
    "relative_error_state",
    "check_moment",
    "pauli_spectrum",
    "sre_pauli_moment",
    "sre2",
    "haar_pauli_moment",
    "renyi2_entropy",
    "nogo_terms",
    "nogo_lower_bound",
    "intermediate_bound",
    "shallow_circuit_state",
    "epr_state",
    "choi_spec",
    "choi_state_moment",
    "choi_envelope",
    "DesignReportEntry",
]
