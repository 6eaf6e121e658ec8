import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magicdesign import commutant, densesim, stabsim
from magicdesign.densesim import ArchitectureSpec, FixedInput, GlobalClifford, HaarClusterLayer
from magicdesign.errors import ConfigError, InvalidMoment, ResourceCapError, UnsupportedParameter
from magicdesign.moments import (
    DesignReportEntry,
    HaarConstants,
    MCEstimate,
    additive_error_bound,
    check_moment,
    choi_envelope,
    choi_state_moment,
    clifford_Z,
    clifford_moment,
    collision_exact_clifford,
    collision_probability,
    d_sym,
    frame_potential_exact,
    frame_potential_mc,
    haar_D,
    haar_moment,
    haar_pauli_moment,
    intermediate_bound,
    mc_moment,
    nogo_lower_bound,
    relative_error_state,
    renyi2_entropy,
    shallow_circuit_state,
    sre2,
    sre_pauli_moment,
    trace_distance,
)


def stabilizer_states(n, seed=0):
    """All n-qubit stabilizer states up to phase, found by sampling random Cliffords."""
    total = 2**n * math.prod(2**i + 1 for i in range(1, n + 1))
    rng = np.random.default_rng(seed)
    found = {}
    while len(found) < total:
        t = stabsim.apply_clifford(stabsim.StabilizerTableau.zero_state(n), stabsim.random_clifford(n, rng), range(n))
        v = stabsim.tableau_to_dense(t)
        found[tuple(np.round(v, 8))] = v
    return list(found.values())


def pure_moment(vecs, k):
    out = 0
    for v in vecs:
        p = densesim.replica_power(v, k)
        out = out + np.outer(p, np.conj(p))
    return out / len(vecs)


# --- constants ---------------------------------------------------------------


def test_constants():
    assert d_sym(1, 3) == 4
    assert haar_D(2, 3) == 4 * 5 * 6
    assert clifford_Z(2, 2) == 20 and clifford_Z(3, 3) == 8 * 9 * 10
    h = HaarConstants(2, 4)
    assert (h.d_sym, h.D, h.Z) == (35, 4 * 5 * 6 * 7, 4 * 5 * 6 * 8)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_Z_upper_bound(k):
    for n in range(1, 12):
        if n >= k + math.log2(k) - 2:
            assert clifford_Z(n, k) <= 2 ** (n * k) * (1 + k * 2 ** (k - n))


# --- exact moments ---------------------------------------------------------


def test_haar_moment_n1_k2():
    ev = np.sort(np.linalg.eigvalsh(haar_moment(1, 2)))
    assert np.allclose(ev, [0, 1 / 3, 1 / 3, 1 / 3], atol=1e-12)


def test_haar_moment_projector():
    rho = haar_moment(2, 3)
    assert abs(np.trace(rho) - 1) < 1e-12
    p = rho * d_sym(2, 3)
    assert np.max(np.abs(p @ p - p)) < 1e-12


def test_clifford_equals_haar_n1_k2():
    assert np.max(np.abs(clifford_moment(1, 2) - haar_moment(1, 2))) < 1e-12


def test_clifford_moment_is_state_moment():
    rho = clifford_moment(2, 4)
    check_moment(rho, 2, 4)
    assert np.linalg.eigvalsh(rho).min() > -1e-10


@pytest.mark.parametrize("k", [3, 4])
def test_clifford_moment_zero_entry(k):
    rho = clifford_moment(2, k)
    expected = Fraction(commutant.sigma_count(k), clifford_Z(2, k))
    assert abs(rho[0, 0] - float(expected)) < 1e-14


def test_clifford_moment_matches_stabilizer_average():
    # route 2: average over all 60 two-qubit stabilizer states
    states = stabilizer_states(2)
    assert len(states) == 60
    for k in (2, 3, 4):
        assert np.max(np.abs(clifford_moment(2, k) - pure_moment(states, k))) < 1e-12


def test_caps():
    with pytest.raises(ResourceCapError):
        haar_moment(4, 4)


# --- frame potentials -----------------------------------------------------


def test_frame_potential_exact_examples():
    assert frame_potential_exact("haar", 1, 2) == Fraction(1, 3)
    assert frame_potential_exact("clifford", 1, 2) == Fraction(1, 3)
    assert frame_potential_exact("clifford", 2, 4) == Fraction(30, clifford_Z(2, 4))
    with pytest.raises(ConfigError):
        frame_potential_exact("unitary", 1, 2)


def test_frame_potential_is_purity():
    for ens, mom in (("haar", haar_moment), ("clifford", clifford_moment)):
        rho = mom(2, 3)
        assert abs(np.trace(rho @ rho).real - float(frame_potential_exact(ens, 2, 3))) < 1e-12


def test_frame_potential_single_state():
    spec = ArchitectureSpec(2, [FixedInput((0.6, 0.8, 0, 0))])
    for method in ("folded", "pairs"):
        est = frame_potential_mc(spec, 3, 100, np.random.default_rng(0), method=method)
        assert est.mean == pytest.approx(1, abs=1e-12) and est.stderr < 1e-12


def test_frame_potential_mc_global_clifford():
    est = frame_potential_mc(ArchitectureSpec(2, [GlobalClifford()]), 3, 100_000, np.random.default_rng(1))
    assert est.within(float(frame_potential_exact("clifford", 2, 3)))


def test_frame_potential_mc_haar_global():
    est = frame_potential_mc(ArchitectureSpec(2, [HaarClusterLayer(((0, 1),))]), 3, 100_000, np.random.default_rng(2))
    assert est.within(float(frame_potential_exact("haar", 2, 3)))


def test_frame_potential_mc_seed_batches():
    # exact ensembles land within 3 sigma in almost every independent batch
    spec = ArchitectureSpec(2, [GlobalClifford()])
    exact = float(frame_potential_exact("clifford", 2, 2))
    hits = sum(
        frame_potential_mc(spec, 2, 2_000, np.random.default_rng(1000 + s)).within(exact) for s in range(100)
    )
    assert hits >= 97


def test_magic_frame_potential_excess_n8():
    # eight single-qubit Haar gates after the two-layer Clifford circuit, N=8, k=3
    rng = np.random.default_rng(3)
    haar = math.factorial(3) * 2.0 ** (-24)
    plain = frame_potential_mc(densesim.magic_architecture(8, 2, 0), 3, 40_000, rng)
    magic = frame_potential_mc(densesim.magic_architecture(8, 2, 8), 3, 40_000, rng)
    assert magic.mean - haar <= plain.mean - haar + 3 * math.hypot(plain.stderr, magic.stderr)


# --- distances --------------------------------------------------------------------


def test_additive_error_bound():
    assert additive_error_bound(0.25, 0.25, 2, 2) == 0
    fh = frame_potential_exact("haar", 1, 2)
    assert additive_error_bound(frame_potential_exact("clifford", 1, 2), fh, 1, 2) == 0
    fe, fh = frame_potential_exact("clifford", 2, 4), frame_potential_exact("haar", 2, 4)
    expected = math.sqrt(float(2**8 * (fe - fh)))
    assert additive_error_bound(fe, fh, 2, 4) == pytest.approx(expected, rel=1e-12) and expected > 0
    with pytest.warns(RuntimeWarning):
        val, flag = additive_error_bound(0.1, 0.2, 1, 2, return_flag=True)
    assert val == 0 and flag


def test_trace_distance_examples():
    rho = haar_moment(1, 2)
    assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-12)
    a, b = np.diag([1.0, 0, 0, 0]), np.diag([0, 0, 0, 1.0])
    assert trace_distance(a, b) == pytest.approx(2)
    with pytest.raises(ConfigError):
        trace_distance(a, np.eye(2))


def test_trace_distance_clifford_vs_haar():
    # stabilizer states form an exact 3-design, so the first strictly positive case is k=4
    assert trace_distance(clifford_moment(2, 3), haar_moment(2, 3)) < 1e-12
    assert trace_distance(clifford_moment(2, 4), haar_moment(2, 4)) == pytest.approx(3 / 14, abs=1e-12)


def test_relative_error_examples():
    assert relative_error_state(haar_moment(2, 3), 2, 3) < 1e-12
    assert relative_error_state(clifford_moment(2, 4), 2, 4) == pytest.approx(0.75, abs=1e-12)
    # route 2: the stabilizer-state average on the symmetric subspace
    assert relative_error_state(pure_moment(stabilizer_states(2), 4), 2, 4) == pytest.approx(0.75, abs=1e-12)


def test_relative_error_architecture():
    # at k=2 both ensembles are exact designs; at k=4 the Haar clusters remove the error
    arch2 = densesim.exact_twirl_moment(densesim.relative_architecture(2, 1, 2), 2)
    assert relative_error_state(arch2, 2, 2) < 1e-12
    assert relative_error_state(clifford_moment(2, 2), 2, 2) < 1e-12
    # n=3, k=4: Haar clusters of one or two qubits after the two-layer Clifford circuit
    base = densesim.exact_twirl_moment(ArchitectureSpec(3, [densesim.TwoLayerClifford(1)]), 4)
    eps_base = relative_error_state(base, 3, 4)
    eps = [relative_error_state(densesim.exact_twirl_moment(densesim.relative_architecture(3, 1, ell), 4), 3, 4) for ell in (1, 2, 3)]
    assert eps == pytest.approx([1.31, 0.23, 0], abs=1e-9) and eps_base == pytest.approx(2.3, abs=1e-9)


def test_relative_error_rejects_leakage():
    rho = np.zeros((16, 16))
    rho[1, 1] = 1  # |00>|01> is not symmetric
    with pytest.raises(InvalidMoment):
        relative_error_state(rho, 2, 2)
    with pytest.raises(InvalidMoment):
        check_moment(2 * haar_moment(1, 2), 1, 2)


@pytest.mark.parametrize("N,k", [(1, 2), (1, 3), (2, 2), (2, 3), (2, 4), (3, 2)])
def test_distance_chain(N, k):
    rho_c, rho_h = clifford_moment(N, k), haar_moment(N, k)
    td = trace_distance(rho_c, rho_h)
    fe = np.trace(rho_c @ rho_c).real
    assert td <= additive_error_bound(fe, float(frame_potential_exact("haar", N, k)), N, k) + 1e-9
    assert td <= 2 * relative_error_state(rho_c, N, k) + 1e-9


# --- Monte Carlo moments ------------------------------------------------------


def test_mc_moment_2_3():
    est = mc_moment(ArchitectureSpec(2, [GlobalClifford()]), 3, 100_000, np.random.default_rng(4))
    assert np.linalg.norm(est.matrix - clifford_moment(2, 3)) <= 3 * est.sigma


def test_mc_estimate_within():
    e = MCEstimate(1.0, 0.1, 10)
    assert e.within(1.25) and not e.within(1.4)


# --- collision probabilities -----------------------------------------------------


def test_collision_exact():
    assert collision_exact_clifford(2, 2) == Fraction(1, 10)


def test_collision_mc_independent_of_x():
    spec = ArchitectureSpec(2, [GlobalClifford()])
    rng = np.random.default_rng(5)
    for x in range(4):
        est = collision_probability(spec, x, 2, 50_000, rng)
        assert est.within(0.1)


def test_collision_dense_route_agrees():
    spec = ArchitectureSpec(2, [GlobalClifford(), densesim.SingleQubitHaarLayer(())])
    est = collision_probability(spec, 3, 2, 50_000, np.random.default_rng(6))
    assert est.within(0.1)


def test_collision_xi_scan():
    rng = np.random.default_rng(7)
    pc = float(collision_exact_clifford(6, 3))
    prev = None
    for xi in (1, 2, 3):
        est = collision_probability(ArchitectureSpec(6, [densesim.TwoLayerClifford(xi)]), 0, 3, 200_000, rng)
        dev, err = abs(est.mean - pc) / pc, est.stderr / pc
        if prev is not None:
            assert dev <= prev[0] + 3 * math.hypot(err, prev[1])
        prev = (dev, err)


# --- stabilizer Renyi entropy ----------------------------------------------------


def test_sre_stabilizer_states():
    rng = np.random.default_rng(8)
    for n in (1, 3, 5):
        for _ in range(5):
            t = stabsim.apply_clifford(stabsim.StabilizerTableau.zero_state(n), stabsim.random_clifford(n, rng), range(n))
            psi = stabsim.tableau_to_dense(t)
            assert sre_pauli_moment(psi) == pytest.approx(1, abs=1e-12)
            assert abs(sre2(psi)) < 1e-12


def test_sre_t_state():
    psi = np.array([1, np.exp(1j * np.pi / 4)]) / math.sqrt(2)
    # direct enumeration: <I>=1, <X>=<Y>=1/sqrt2, <Z>=0
    direct = (1 + 2 * 0.5**2) / 2
    assert sre_pauli_moment(psi) == pytest.approx(direct, abs=1e-14) == 0.75
    assert sre2(psi) == pytest.approx(math.log2(4 / 3), abs=1e-14)


def test_sre_haar_average():
    rng = np.random.default_rng(9)
    u = densesim.haar_unitary_batch(8, 10_000, rng)
    vals = np.array([sre_pauli_moment(v) for v in u[:, :, 0]])
    assert abs(vals.mean() - float(haar_pauli_moment(3))) <= 3 * vals.std(ddof=1) / math.sqrt(len(vals))
    assert haar_pauli_moment(3) == Fraction(4, 11)


def test_sre_matches_naive_pauli_sum():
    rng = np.random.default_rng(10)
    psi = densesim.haar_unitary(8, rng)[:, 0]
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    total = 0
    for a in paulis:
        for b in paulis:
            for c in paulis:
                p = np.kron(np.kron(a, b), c)
                total += abs(np.vdot(psi, p @ psi)) ** 4
    assert sre_pauli_moment(psi) == pytest.approx(total / 8, rel=1e-12)


def test_sre_odd_k_rejected():
    with pytest.raises(UnsupportedParameter):
        sre_pauli_moment(np.array([1, 0]), k=3)


# --- no-go bounds ----------------------------------------------------------------------


def test_nogo_examples():
    assert nogo_lower_bound([(0.0, 1)] * 24) == pytest.approx(0.375)
    assert nogo_lower_bound([(2.0, 2), (1.0, 1)]) == pytest.approx(-3 / 24)
    with pytest.raises(ConfigError):
        nogo_lower_bound([(-1.0, 1)])


def test_intermediate_inequality_product_states():
    # for V|0>^N the expectation is 1, which dominates the bound
    n = 6
    ent = [(renyi2_entropy(densesim.zero_state(n), (q,), n), 1) for q in range(n)]
    assert 1 >= intermediate_bound(ent, n)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 8))
def test_intermediate_inequality_shallow(seed, n):
    psi = shallow_circuit_state(n, np.random.default_rng(seed))
    pairs = [tuple(range(s, min(s + 2, n))) for s in range(0, n, 2)]
    ent = [(renyi2_entropy(psi, r, n), len(r)) for r in pairs]
    assert sre_pauli_moment(psi) >= intermediate_bound(ent, n) - 1e-12


def test_renyi_entropy_bell():
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert renyi2_entropy(bell, (0,), 2) == pytest.approx(1)
    assert renyi2_entropy(bell, (0, 1), 2) == pytest.approx(0, abs=1e-12)


# --- Choi states -----------------------------------------------------------------------


def test_choi_identity_ensemble():
    rho = choi_state_moment(ArchitectureSpec(1, []), 2)
    assert relative_error_state(rho, 2, 2) == pytest.approx(d_sym(2, 2) - 1)


def test_choi_haar_envelope():
    eps = []
    for n in (1, 2):
        rho = choi_state_moment(ArchitectureSpec(n, [HaarClusterLayer((tuple(range(n)),))]), 2)
        eps.append(relative_error_state(rho, 2 * n, 2))
        assert eps[-1] <= choi_envelope(0.0, n, 2)
    assert eps == pytest.approx([1.5, 5 / 12], abs=1e-12) and eps[1] < eps[0]
    # Clifford unitaries are a 2-design, so their Choi moment is the same
    rho_c = choi_state_moment(ArchitectureSpec(1, [GlobalClifford()]), 2)
    assert relative_error_state(rho_c, 2, 2) == pytest.approx(1.5, abs=1e-12)


def test_choi_exact_matches_sampling():
    spec = ArchitectureSpec(1, [HaarClusterLayer(((0,),))])
    exact = choi_state_moment(spec, 2)
    est = mc_moment(densesim_choi(spec), 2, 40_000, np.random.default_rng(11))
    assert np.linalg.norm(est.matrix - exact) <= 3 * est.sigma


def densesim_choi(spec):
    from magicdesign.moments import choi_spec

    return choi_spec(spec)


def test_choi_rejects_inputs():
    with pytest.raises(ConfigError):
        choi_state_moment(ArchitectureSpec(1, [FixedInput((1, 0))]), 2)


def test_sandwich_state_error_bounded_away():
    # Clifford, single-qubit Haar, Clifford; the Choi register at n=2, k=4 is past the
    # dense cap, so the state ensemble (a lower bound for the unitary error) is used
    rho = densesim.exact_twirl_moment(densesim.magic_architecture(2, 1, 2, placement="sandwich"), 4)
    assert relative_error_state(rho, 2, 4) == pytest.approx(0.162, abs=1e-9)


# --- report rows -------------------------------------------------------------------------


def test_report_entry():
    est = MCEstimate(0.1, 0.01, 100)
    row = DesignReportEntry.from_mc("F", est, exact=Fraction(1, 10), n=2, k=2).to_dict()
    assert row["exact"] == {"fraction": "1/10", "float": 0.1}
    assert row["provenance"] == "monte-carlo" and row["params"] == {"n": 2, "k": 2}
    with pytest.raises(ConfigError):
        DesignReportEntry("F", "guess")
