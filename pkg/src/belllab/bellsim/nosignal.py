"""No-signaling check: each actor's outcome frequencies must not depend on the other's setting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientData
from ..models import TrialLog


@dataclass(frozen=True)
class NoSignalingResult:
    alice_p: float
    bob_p: float
    z_scores: dict[str, float]

    def to_json(self) -> dict:
        return {"alice_p": self.alice_p, "bob_p": self.bob_p, "z_scores": dict(self.z_scores)}


def two_proportion_z(k1: int, n1: int, k2: int, n2: int) -> tuple[float, float]:
    """Pooled two-proportion z statistic and its two-sided normal p-value."""
    pooled = (k1 + k2) / (n1 + n2)
    denom = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    if denom == 0.0:
        return 0.0, 1.0
    z = (k1 / n1 - k2 / n2) / denom
    return z, math.erfc(abs(z) / math.sqrt(2.0))


def _actor_p(own_idx, other_idx, outcome, own_name: str, other_labels, z_scores: dict) -> float:
    ps = []
    for i in (0, 1):
        sel = own_idx == i
        counts = []
        for j in (0, 1):
            m = sel & (other_idx == j)
            n = int(m.sum())
            if n == 0:
                raise InsufficientData(f"no {own_name} rounds at own setting {i} with other setting {other_labels[j]}")
            counts.append((int(np.sum(outcome[m] == 1)), n))
        z, p = two_proportion_z(*counts[0], *counts[1])
        z_scores[f"{own_name}[{i}]"] = z
        ps.append(p)
    # Bonferroni over the actor's two own settings
    return min(1.0, 2.0 * min(ps))


def no_signaling_test(log) -> NoSignalingResult:
    """Two-proportion z-tests of P(outcome = +1) across the other actor's setting.

    Run separately for each of the actor's own settings; the actor's p-value
    is the Bonferroni combination of the two.
    """
    if not isinstance(log, TrialLog):
        log = TrialLog.from_records(log)
    z = {}
    pa = _actor_p(log.alice_idx, log.bob_idx, log.outcome_a, "alice", ("b", "b'"), z)
    pb = _actor_p(log.bob_idx, log.alice_idx, log.outcome_b, "bob", ("a", "a'"), z)
    return NoSignalingResult(alice_p=pa, bob_p=pb, z_scores=z)
