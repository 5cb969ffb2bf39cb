"""The two-spin singlet and the operator sigma . sigma.

Run: python3 demos/01_singlet_spectrum.py
"""

# %%
import numpy as np

from belllab.qmath import hermitian_eigen, tensor_product
from belllab.spin import dot_operator, pauli, singlet_state

# %% [markdown]
# Build sigma_1 . sigma_2 from Kronecker products of the Pauli matrices and
# diagonalize it with the Jacobi solver.

# %%
eta = sum(tensor_product(pauli(k), pauli(k)) for k in "xyz")
print(np.real_if_close(eta))
assert np.allclose(eta, dot_operator())

spec = hermitian_eigen(eta)
print("eigenvalues:", np.round(spec.values, 12))
print("multiplicities:", [(round(v, 9), k) for v, k in spec.multiplicities()])

# %% [markdown]
# The lowest eigenvalue is simple and its eigenvector is the singlet, up to
# a phase.  The other three form the triplet.

# %%
psi = singlet_state()
v = spec.vectors[:, 0]
print("singlet amplitudes:", psi.amplitudes)
print("|<psi|v>| =", abs(np.vdot(psi.amplitudes, v)))

# spin components along the same axis are always opposite
zz = tensor_product(pauli("z"), pauli("z"))
print("<psi| sz (x) sz |psi> =", psi.expectation(zz))
