# coding: utf-8

# # The Clifford commutant, one replica count at a time
#
# Operators commuting with every V^{⊗k} for Clifford V are spanned by r(T), one
# for each stochastic Lagrangian subspace T of F2^{2k}. This walkthrough builds
# the catalog, looks at which elements are not permutations, and checks a few of
# the closed forms against dense matrices.

# In[1]:

import numpy as np

from magicdesign import commutant


# ## Counting elements
#
# The count grows like a product of (2^i + 1); permutations make up all of it
# up to k = 3.

# In[2]:

for k in range(1, 6):
    cat = commutant.enumerate_sigma(k)
    print(k, len(cat), commutant.sigma_count(k), "permutations:", len(cat.perm_indices))


# ## Defect dimensions
#
# The defect subspace N of an element controls its Schatten norms. At k = 4 the
# six extra elements all carry a one-dimensional defect.

# In[3]:

cat = commutant.enumerate_sigma(4)
print(np.bincount(cat.defect_dims))


# In[4]:

t = next(e for e in cat.elements if not e.is_perm)
r = commutant.r_dense(t, 1).astype(float)
s = np.linalg.svd(r, compute_uv=False)
print("trace norm", s.sum(), "expected", 2 ** (4 - t.defect_dim))
print("operator norm", s.max(), "expected", 2 ** t.defect_dim)


# ## Exact Weingarten tables
#
# The Gram matrix of the r(T)^{⊗n} is inverted over the rationals. The
# off-diagonal entries shrink like 2^{-nk-n}.

# In[5]:

for n in range(3, 8):
    w = commutant.clifford_weingarten(4, n)
    assert w.check_identity()
    f = w.as_float()
    off = np.max(np.abs(f - np.diag(np.diag(f))))
    print(n, off * 2.0 ** (4 * n + n))


# ## The single-qubit Haar twirl
#
# Twirling one qubit with Haar gates keeps permutations and damps every other
# element; the largest surviving weight relative to 2^k is 7/10.

# In[6]:

diag = commutant.haar_twirl_table(4).diagonal()
print(max(diag[i] for i in range(len(cat)) if i not in set(cat.perm_indices)) / 16)
