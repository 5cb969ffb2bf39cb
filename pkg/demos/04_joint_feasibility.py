"""Can one probability space carry A, A', B and B' at once?

Run: python3 demos/04_joint_feasibility.py
"""

# %%
import numpy as np

from belllab.bellsim import TSIRELSON_SETTINGS, feasibility_for_pmfs, joint_pairwise_pmf
from belllab.models import SettingsQuad, model_pmfs
from belllab.relatedness import HYPERCUBE

# %% [markdown]
# Quantum pairwise pmfs at the optimal angles: the exact simplex finds no
# 16-atom joint, and one CHSH variant is out of range.

# %%
res = feasibility_for_pmfs(model_pmfs("qm", TSIRELSON_SETTINGS))
print("qm feasible:", res.feasible)
print("violated:", res.violated_inequality, "value", res.violated_value)

# %% [markdown]
# The sign-cos model at the same angles is feasible, and the solver returns a joint.

# %%
pmfs = model_pmfs("lhv-cos", TSIRELSON_SETTINGS)
res = feasibility_for_pmfs(pmfs)
print("sign-cos feasible:", res.feasible)
for w, pt in zip(res.joint, HYPERCUBE):
    if w > 1e-9:
        print(f"  P(A, A', B, B' = {pt}) = {w:.4f}")
print("reproduces p(a, b):", np.allclose(joint_pairwise_pmf(res.joint, "ab").p, pmfs[(0, 0)].p))

# %% [markdown]
# Scan random quantum settings: the simplex verdict and the eight
# inequalities always agree.

# %%
rng = np.random.default_rng(4)
agree, infeasible = 0, 0
for _ in range(200):
    r = feasibility_for_pmfs(model_pmfs("qm", SettingsQuad(*rng.uniform(0, 360, 4))))
    agree += r.feasible == r.criterion_feasible
    infeasible += not r.feasible
print(f"agreement {agree}/200, infeasible {infeasible}")
