# coding: utf-8

# # Frame potentials of two-layer Clifford circuits
#
# A brick of Clifford blocks of 2 xi qubits, followed by a shifted brick, is
# compared with the global Clifford group. The transfer matrix gives exact frame
# potentials on long chains; Monte Carlo over stabilizer tableaux checks them.

# In[1]:

import numpy as np

from magicdesign import densesim, moments, statmech


# ## Exact values along a chain
#
# Excess over the global Clifford value falls quickly once the blocks reach
# k - 1 qubits on each side.

# In[2]:

k = 3
for xi in (2, 3, 4, 5):
    chain = statmech.ChainSpec(k, xi, 2)
    f = float(statmech.frame_potential_transfer(chain))
    fc = float(moments.frame_potential_exact("clifford", chain.N, k))
    print(xi, chain.N, f / fc - 1)


# ## Monte Carlo cross-check
#
# At N = 8 the estimate from sampled stabilizer states should match the
# transfer-matrix value within a few standard errors.

# In[3]:

chain = statmech.ChainSpec(3, 2, 2)
est = moments.frame_potential_mc(chain.architecture(), 3, 100_000, np.random.default_rng(0))
print(float(statmech.frame_potential_transfer(chain)), est.mean, est.stderr)


# ## Adding magic
#
# At k = 3 single-qubit Haar gates leave the frame potential unchanged, since
# every commutant element is already a permutation. At k = 4 they pull it
# towards the Haar value.

# In[4]:

haar = float(statmech.haar_frame_potential(12, 4))
for n_magic in (0, 4, 8, 12):
    sites = tuple(s for s in ((0, min(n_magic, 6)), (1, max(0, n_magic - 6))) if s[1])
    chain = statmech.ChainSpec(4, 3, 2, magic=sites)
    print(n_magic, float(statmech.frame_potential_transfer(chain)) / haar - 1)


# ## Collision probabilities
#
# The same circuits anticoncentrate: E|<0|V|0>|^{2k} approaches the global value.

# In[5]:

pc = float(moments.collision_exact_clifford(6, 3))
for xi in (1, 2, 3):
    spec = densesim.ArchitectureSpec(6, [densesim.TwoLayerClifford(xi)])
    est = moments.collision_probability(spec, 0, 3, 50_000, np.random.default_rng(xi))
    print(xi, est.mean / pc - 1, est.stderr / pc)
