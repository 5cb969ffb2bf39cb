"""Locality in the simulator: who may talk to whom, and what the data show.

Run: python3 demos/06_protocol_hygiene.py
"""

# %%
import numpy as np

from belllab.bellsim import (
    TSIRELSON_SETTINGS,
    ExperimentConfig,
    message_graph,
    no_signaling_test,
    run_protocol,
)
from belllab.models import TrialLog

# %% [markdown]
# Channels.  In quantum mode a separate nature node sees both settings; it is
# the only place where both are known.

# %%
for model in ("lhv-cos", "qm"):
    print(model, sorted(message_graph(model)))

# %% [markdown]
# No-signaling on honest runs: Alice's outcome frequencies do not depend on
# Bob's setting, and vice versa.

# %%
for model in ("qm", "lhv-cos"):
    log = run_protocol(ExperimentConfig(model, TSIRELSON_SETTINGS, 200_000, seed=6))
    res = no_signaling_test(log)
    print(f"{model:8s} p(alice) = {res.alice_p:.3f}  p(bob) = {res.bob_p:.3f}")

# %% [markdown]
# A log in which Alice's outcome copies Bob's setting is flagged at once.

# %%
r = np.random.default_rng(0)
n = 50_000
ai, bi = r.integers(0, 2, n).astype(np.int8), r.integers(0, 2, n).astype(np.int8)
forged = TrialLog("qm", TSIRELSON_SETTINGS, np.arange(n), ai, bi,
                  np.where(bi == 0, 1, -1).astype(np.int8), r.choice([-1, 1], n).astype(np.int8))
print("forged log p(alice) =", no_signaling_test(forged).alice_p)

# %% [markdown]
# The same seed gives the same log regardless of how many workers run the blocks.

# %%
cfg = ExperimentConfig("qm", TSIRELSON_SETTINGS, 20_000, seed=11)
print("identical across workers:", run_protocol(cfg).csv_text() == run_protocol(cfg, workers=3).csv_text())
