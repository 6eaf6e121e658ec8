import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magicdesign import commutant as cm
from magicdesign import exact
from magicdesign.errors import RankError, UnsupportedParameter
from magicdesign.gf2 import popcount, rank


def frac_inverse(rows):
    """Plain Gauss-Jordan over Fractions, independent of flint."""
    n = len(rows)
    a = [[Fraction(v) for v in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        p = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [v / piv for v in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [r[n:] for r in a]


@pytest.mark.parametrize("k,count", [(1, 1), (2, 2), (3, 6), (4, 30), (5, 270)])
def test_counts(k, count):
    cat = cm.enumerate_sigma(k)
    assert len(cat) == count == cm.sigma_count(k)
    assert len(cat.perm_indices) == math.factorial(k)


def test_k2_is_identity_and_swap():
    cat = cm.enumerate_sigma(2)
    assert sorted(t.perm for t in cat.elements) == [(0, 1), (1, 0)]


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_bruteforce_oracle_matches(k):
    a = cm.enumerate_sigma(k)
    b = cm.enumerate_sigma_bruteforce(k)
    assert [t.basis for t in a.elements] == [t.basis for t in b.elements]
    assert [t.perm for t in a.elements] == [t.perm for t in b.elements]


def test_bruteforce_k3_all_permutations():
    b = cm.enumerate_sigma_bruteforce(3)
    assert len(b) == 6 and all(t.is_perm for t in b.elements)


def test_out_of_range():
    with pytest.raises(UnsupportedParameter):
        cm.enumerate_sigma(7)
    with pytest.raises(UnsupportedParameter):
        cm.enumerate_sigma_bruteforce(5)


def test_catalog_is_sorted_and_canonical():
    cat = cm.enumerate_sigma(5)
    keys = [t.basis for t in cat.elements]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_elements_valid_with_random_span_samples(k):
    rng = np.random.default_rng(k)
    for t in cm.enumerate_sigma(k).elements:
        assert t.is_valid(samples=1000 if k >= 4 else 50, rng=rng)
        assert t.defect_dim == t.right_defect_dim()


def test_stochastic_rotations_against_definition():
    # oracle: every invertible k x k matrix checked on all x
    for k in range(1, 5):
        found = set()
        full = (1 << k) - 1
        for cols in itertools.product(range(1, 1 << k), repeat=k):
            ok = True
            for x in range(1 << k):
                y = 0
                for j in range(k):
                    if (x >> j) & 1:
                        y ^= cols[j]
                if (popcount(y) - popcount(x)) % 4:
                    ok = False
                    break
            if not ok:
                continue
            acc = 0
            for c in cols:
                acc ^= c
            if acc == full and rank(cols) == k:
                found.add(cols)
        assert found == set(cm.stochastic_rotations(k))


def test_rotations_measured():
    assert [len(cm.stochastic_rotations(k)) for k in range(1, 7)] == [1, 2, 6, 24, 120, 1440]


def test_defect_examples():
    ident = cm.LagrangianSubspace.from_perm((0, 1, 2, 3))
    assert cm.defect_dimension(ident) == 0
    t_s = cm.defect_operator_subspace((0b1111,), 4)
    assert cm.defect_dimension(t_s) == 1
    assert t_s in cm.enumerate_sigma(4).elements


def test_r_dense_swap():
    cat = cm.enumerate_sigma(2)
    swap = cat.elements[cat.perm_index((1, 0))]
    m = cm.r_dense(swap, 1)
    expected = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert np.array_equal(m, expected)
    assert np.trace(m) == 2


def test_r_dense_of_pauli_projector():
    # T_S on one site is 2^{-1} sum_P P^{x4}
    t_s = cm.defect_operator_subspace((0b1111,), 4)
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    acc = sum(np.kron(np.kron(p, p), np.kron(p, p)) for p in paulis) / 2
    assert np.allclose(cm.r_dense(t_s, 1), acc)


def test_r_dense_copy_major_ordering():
    # a permutation operator must map kron(a, b, c) to the permuted kron
    rng = np.random.default_rng(0)
    cat = cm.enumerate_sigma(3)
    vs = [rng.normal(size=4) for _ in range(3)]
    for t in cat.elements:
        m = cm.r_dense(t, 2)
        p = t.perm
        out = [None] * 3
        for j in range(3):
            out[p[j]] = vs[j]
        lhs = m @ np.kron(np.kron(vs[0], vs[1]), vs[2])
        rhs = np.kron(np.kron(out[0], out[1]), out[2])
        assert np.allclose(lhs, rhs)


@pytest.mark.parametrize("k,n", [(3, 1), (2, 2), (4, 1), (3, 2)])
def test_gram_matches_dense_trace(k, n):
    cat = cm.enumerate_sigma(k)
    dense = [cm.r_dense(t, n).astype(np.int64) for t in cat.elements]
    inter = cat.intersection_dims
    for i, a in enumerate(dense):
        for j, b in enumerate(dense):
            assert int(np.sum(a * b)) == 2 ** (n * int(inter[i, j]))


def test_intersection_table_properties():
    for k in range(2, 6):
        cat = cm.enumerate_sigma(k)
        inter = cat.intersection_dims
        assert np.array_equal(inter, inter.T)
        assert np.all(np.diag(inter) == k)
        off = inter[~np.eye(len(cat), dtype=bool)]
        assert off.max() <= k - 1 and off.min() >= 1
    inter4 = cm.enumerate_sigma(4).intersection_dims
    assert inter4[~np.eye(30, dtype=bool)].min() == 1


def test_intersection_table_matches_rank():
    cat = cm.enumerate_sigma(4)
    for i, a in enumerate(cat.elements):
        for j, b in enumerate(cat.elements):
            assert cm.intersection_dim(a, b) == cat.intersection_dims[i, j]


def test_schatten_norms_k4():
    for t in cm.enumerate_sigma(4).elements:
        m = cm.r_dense(t, 1)
        s = np.linalg.svd(m.astype(float), compute_uv=False)
        assert abs(s.sum() - 2 ** (4 - t.defect_dim)) < 1e-10
        assert abs(s.max() - 2**t.defect_dim) < 1e-10
        tr, op = cm.schatten_norms_exact(m)
        assert tr == 2 ** (4 - t.defect_dim) and op == 2**t.defect_dim


def test_weingarten_small_values():
    for n in (1, 2, 3):
        w = cm.clifford_weingarten(1, n).fractions()
        assert w == [[Fraction(1, 2**n)]]
    w = cm.clifford_weingarten(2, 1).fractions()
    assert w == [[Fraction(1, 3), Fraction(-1, 6)], [Fraction(-1, 6), Fraction(1, 3)]]


def test_weingarten_identity_and_symmetry():
    tab = cm.clifford_weingarten(4, 4)
    assert tab.check_identity()
    w = tab.values
    assert w == w.transpose()


def test_weingarten_matches_fraction_oracle():
    cat = cm.enumerate_sigma(3)
    n = 2
    g = [[2 ** (n * int(d)) for d in row] for row in cat.intersection_dims]
    assert cm.clifford_weingarten(3, n).fractions() == frac_inverse(g)


def test_weingarten_rank_error():
    with pytest.raises(RankError):
        cm.clifford_weingarten(4, 2)


def test_twirl_pseudo_inverse_is_projector_coefficients():
    # W G W = W and G W G = G even when the Gram matrix is singular
    import flint

    for k, n in [(3, 1), (4, 1), (4, 2)]:
        g = flint.fmpq_mat(cm.clifford_gram(cm.enumerate_sigma(k), n))
        w = cm.clifford_twirl_exact(k, n)
        assert g * w * g == g
        assert w * g * w == w
        assert w == w.transpose()


@pytest.mark.parametrize("k", [2, 3, 4])
def test_weingarten_asymptotic_envelope(k):
    diag_q, off_q = [], []
    for n in range(4, 11):
        w = cm.clifford_weingarten(k, n).as_float()
        d = np.diag(w)
        scale = 2.0 ** (n * k + n)
        diag_q.append(scale * np.max(np.abs(d - 2.0 ** (-n * k))))
        off_q.append(scale * np.max(np.abs(w - np.diag(d))))
    for q in (diag_q, off_q):
        assert all(b <= a * (1 + 1e-12) for a, b in zip(q, q[1:]))


def test_unitary_weingarten_values():
    assert exact.to_fractions(cm.unitary_weingarten(1, 5)) == [[Fraction(1, 5)]]
    assert exact.to_fractions(cm.unitary_weingarten(2, 4)) == [
        [Fraction(1, 15), Fraction(-1, 60)],
        [Fraction(-1, 60), Fraction(1, 15)],
    ]


def test_unitary_weingarten_identity():
    import flint

    w = cm.unitary_weingarten(3, 8)
    g = flint.fmpq_mat(cm.permutation_gram(3, 8))
    assert w * g == flint.fmpq_mat(6, 6, [int(i == j) for i in range(6) for j in range(6)])
    with pytest.raises(RankError):
        cm.unitary_weingarten(3, 2)


def test_permutation_gram_matches_catalog():
    for k in (2, 3, 4):
        cat = cm.enumerate_sigma(k)
        g = cm.permutation_gram(k, 2)
        perms = cm.permutations(k)
        for a, s in enumerate(perms):
            for b, t in enumerate(perms):
                i, j = cat.perm_index(s), cat.perm_index(t)
                assert g[a, b] == 2 ** int(cat.intersection_dims[i, j])


def test_haar_twirl_diagonal():
    for k in range(1, 6):
        tab = cm.haar_twirl_table(k)
        cat = cm.enumerate_sigma(k)
        diag = tab.diagonal()
        for i, t in enumerate(cat.elements):
            if t.is_perm:
                assert diag[i] == 2**k
            else:
                assert diag[i] * 8 <= 7 * 2**k
    assert cm.haar_twirl_table(1).diagonal() == [2]


def test_haar_twirl_idempotent_in_catalog_basis():
    import flint

    for k in (2, 3, 4):
        m = cm.haar_twirl_table(k).values
        g = flint.fmpq_mat(cm.clifford_gram(cm.enumerate_sigma(k), 1))
        gp = exact.pseudo_inverse(g)
        assert m * gp * m == m
        assert m == m.transpose()


def test_haar_twirl_matches_numeric_projector():
    # oracle: numeric projector onto span{vec r(sigma)} via least squares
    for k in (2, 3, 4):
        cat = cm.enumerate_sigma(k)
        vecs = np.array([cm.r_dense(t, 1).ravel() for t in cat.elements], dtype=float)
        perm_vecs = vecs[cat.perm_indices].T
        proj = perm_vecs @ np.linalg.pinv(perm_vecs)
        numeric = vecs @ proj @ vecs.T
        assert np.allclose(numeric, cm.haar_twirl_table(k).as_float(), atol=1e-9)
        assert np.allclose(proj @ proj, proj, atol=1e-9)


def test_diamond_formula_examples():
    cat = cm.enumerate_sigma(4)
    ident = cat.elements[cat.identity_index]
    assert cm.diamond_norm_formula(ident, ident) == 16
    t_s = cm.defect_operator_subspace((0b1111,), 4)
    assert cm.diamond_norm_formula(t_s, ident) == 8


def test_diamond_witness_all_pairs_k4():
    cat = cm.enumerate_sigma(4)
    for a in cat.elements:
        for b in cat.elements:
            assert cm.diamond_norm_witness(a, b) == cm.diamond_norm_formula(a, b)


def test_catalog_cache_roundtrip(tmp_path):
    for k in (2, 4, 5):
        cat = cm.enumerate_sigma(k)
        path = cm.save_catalog(cat, tmp_path)
        assert path.name == f"sigma-k{k}.cat"
        back = cm.load_catalog(path)
        assert [t.basis for t in back.elements] == [t.basis for t in cat.elements]
        assert [t.perm for t in back.elements] == [t.perm for t in cat.elements]
        assert np.array_equal(back.intersection_dims, cat.intersection_dims)
        assert back.checksum() == cat.checksum()
        assert back.n_rotations == cat.n_rotations


@given(st.integers(2, 5), st.data())
def test_norm_product_and_defect_symmetry(k, data):
    cat = cm.enumerate_sigma(k)
    i = data.draw(st.integers(0, len(cat) - 1))
    t = cat.elements[i]
    assert 2 ** (k - t.defect_dim) * 2**t.defect_dim == 2**k
    assert t.defect_dim == t.right_defect_dim()
    j = data.draw(st.integers(0, len(cat) - 1))
    d = cat.intersection_dims[i, j]
    assert d == cat.intersection_dims[j, i] == cm.intersection_dim(t, cat.elements[j])
    assert (d == k) == (i == j)
