"""Related variables: one is the other seen through a transformation.

Run: python3 demos/05_relatedness.py
"""

# %%
import numpy as np

from belllab import qmath
from belllab.relatedness import (
    OperatorPair,
    TransformationGroup,
    circle_sign_cos_variable,
    conjugation_residual,
    hypercube_sign_flip_group,
    hypercube_signed_permutation_group,
    relating_unitary,
    theorem2_variables,
    value_multisets_equal,
    variables_related_under_group,
)

# %% [markdown]
# Operators.  Two Hermitian matrices with the same simple spectrum are
# conjugate by a unitary built from their eigenbases.

# %%
rng = np.random.default_rng(5)
U = qmath.random_unitary(4, rng)
A = np.diag([-2.0, 0.5, 1.0, 3.0])
B = U.conj().T @ A @ U
W = relating_unitary(OperatorPair(A, B))
print("residual |W^+ A W - B| =", conjugation_residual(A, B, W))

# %% [markdown]
# Variables on a 360-point circle.  sign(cos(t - a)) at different a are all
# rotations of each other.

# %%
G = TransformationGroup.cyclic(360)
A0, B45 = circle_sign_cos_variable(0), circle_sign_cos_variable(45)
print("rotation relating a=0 to b=45:", variables_related_under_group(A0, B45, G))

# %% [markdown]
# Charlie's space {+1,-1}^4.  D = |A (B + B')| - 1 takes the values of A'
# equally often, yet no sign flip or signed permutation carries A' to D.

# %%
v = theorem2_variables()
print("same value multiset:", value_multisets_equal(v["A'"], v["D"]))
for group in (hypercube_sign_flip_group(), hypercube_signed_permutation_group()):
    g = variables_related_under_group(v["A'"], v["D"], group)
    print(f"{group.name} ({len(group)} elements): related = {g is not None}")
