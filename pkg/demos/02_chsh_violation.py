"""Deterministic strategies cap S at 2; the singlet reaches 2 sqrt 2.

Run: python3 demos/02_chsh_violation.py
"""

# %%
import math

from belllab.bellsim import (
    TSIRELSON_SETTINGS,
    ExperimentConfig,
    analytic_chsh,
    enumerate_deterministic_strategies,
    estimate_chsh,
    optimize_angles,
    run_protocol,
)
from belllab.models import SettingsQuad

# %% [markdown]
# Every one of the 16 response tables gives S = +2 or -2.

# %%
en = enumerate_deterministic_strategies()
print("max |S| over tables:", en.max_abs_S)
for t in en.argmax:
    print("  S = +2 for", t.as_tuple())

# %% [markdown]
# The quantum prediction at (a, a', b, b') = (0, 90, 45, 315) degrees.

# %%
print("analytic S, qm:     ", analytic_chsh("qm", TSIRELSON_SETTINGS))
print("analytic S, sign-cos:", analytic_chsh("lhv-cos", TSIRELSON_SETTINGS))
print("-2 sqrt 2 =", -2 * math.sqrt(2))

# %% [markdown]
# A simulated run of one million rounds, with settings picked by fair coins.

# %%
log = run_protocol(ExperimentConfig("qm", TSIRELSON_SETTINGS, 1_000_000, seed=1))
est = estimate_chsh(log)
print("cell correlations:", {k: round(v, 4) for k, v in est.E.items()})
print(f"S = {est.S:.4f} +- {est.SE:.4f}, {est.sigma_above_2:.0f} SE beyond the bound")

# %% [markdown]
# Coordinate search over the four angles finds the same optimum from a nearby start.

# %%
res = optimize_angles("qm", SettingsQuad(0, 90, 40, 310))
print("optimized angles:", [round(x, 6) for x in res.settings.as_tuple()], "|S| =", res.abs_S)
print("sign-cos optimum:", optimize_angles("lhv-cos", SettingsQuad(0, 90, 40, 310)).abs_S)
