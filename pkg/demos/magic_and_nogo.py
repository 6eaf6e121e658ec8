# coding: utf-8

# # Pauli moments, entanglement and relative error
#
# Stabilizer states have flat Pauli spectra, which keeps their fourth moment at
# exactly 1. Relative-error designs need that moment near the Haar value, and
# weakly entangled states cannot get there.

# In[1]:

import numpy as np

from magicdesign import densesim, moments, stabsim


# ## Stabilizer and Haar states

# In[2]:

rng = np.random.default_rng(1)
tab = stabsim.apply_clifford(stabsim.StabilizerTableau.zero_state(4), stabsim.random_clifford(4, rng), range(4))
print("stabilizer", moments.sre_pauli_moment(stabsim.tableau_to_dense(tab)))
u = densesim.haar_unitary_batch(8, 2000, rng)[:, :, 0]
print("Haar", np.mean([moments.sre_pauli_moment(v) for v in u]), float(moments.haar_pauli_moment(3)))


# ## Entropy bounds
#
# Each region contributes a term set by its Rényi-2 entropy. Product states with
# many regions give a positive lower bound on the relative error.

# In[3]:

for regions in (8, 16, 24, 48):
    print(regions, moments.nogo_lower_bound([(0.0, 1)] * regions))


# In[4]:

psi = moments.shallow_circuit_state(8, rng, 2)
regions = [(0, 1), (2, 3), (4, 5), (6, 7)]
ent = [(moments.renyi2_entropy(psi, r, 8), 2) for r in regions]
print(ent)
print(moments.sre_pauli_moment(psi), ">=", moments.intermediate_bound(ent, 8))


# ## Relative error of exact twirls
#
# The stabilizer fourth moment sits far from Haar in relative error. Haar
# clusters on top of the Clifford layers close most of the gap.

# In[5]:

print(moments.relative_error_state(moments.clifford_moment(2, 4), 2, 4))
for ell in (1, 2, 3):
    rho = densesim.exact_twirl_moment(densesim.relative_architecture(3, 1, ell), 4)
    print(ell, moments.relative_error_state(rho, 3, 4))
