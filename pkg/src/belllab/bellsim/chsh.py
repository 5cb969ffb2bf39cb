"""CHSH estimation, deterministic-strategy enumeration and angle optimization.

``S = E(ab) + E(a'b) + E(ab') - E(a'b')`` throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from ..errors import InsufficientData
from ..models import (
    ALL_TABLES,
    JointPMF,
    Model,
    SettingsQuad,
    StrategyTable,
    TrialLog,
    TrialRecord,
    lhv_cos_responses,
    model_pmfs,
    model_tag,
    qm_joint_pmf,
    sample_hidden_many,
)
from ..spin import Direction

# (name, alice setting index, bob setting index, sign in S)
CELLS = (("ab", 0, 0, 1), ("a'b", 1, 0, 1), ("ab'", 0, 1, 1), ("a'b'", 1, 1, -1))
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ChshEstimate:
    E: dict[str, float]
    counts: dict[str, int] | None
    S: float
    SE: float
    sigma_above_2: float

    def to_json(self) -> dict:
        return {"E": dict(self.E), "counts": self.counts, "S": self.S, "SE": self.SE,
                "sigma_above_2": self.sigma_above_2}


def _as_log(logs) -> TrialLog:
    if isinstance(logs, TrialLog):
        return logs
    return TrialLog.from_records(logs)


def _sigma_above_2(S: float, SE: float) -> float:
    excess = abs(S) - 2.0
    if SE > 0:
        return excess / SE
    return 0.0 if excess == 0 else math.copysign(math.inf, excess)


def estimate_chsh(logs: TrialLog | Iterable[TrialRecord]) -> ChshEstimate:
    """Per-cell conditional means of ``outcome_a * outcome_b`` combined into ``S``.

    ``SE`` is the square root of the summed variances of the four cell means
    (sample variance, ddof=1).  Raises :class:`InsufficientData` naming an
    empty setting cell.
    """
    log = _as_log(logs)
    prod = log.outcome_a.astype(np.int64) * log.outcome_b.astype(np.int64)
    E, counts = {}, {}
    S = 0.0
    var = 0.0
    for name, i, j, sign in CELLS:
        mask = (log.alice_idx == i) & (log.bob_idx == j)
        n = int(mask.sum())
        if n == 0:
            raise InsufficientData(f"no rounds with setting pair {name}")
        x = prod[mask]
        mean = float(x.mean())
        E[name] = mean
        counts[name] = n
        S += sign * mean
        if n > 1:
            var += float(x.var(ddof=1)) / n
    SE = math.sqrt(var)
    return ChshEstimate(E=E, counts=counts, S=S, SE=SE, sigma_above_2=_sigma_above_2(S, SE))


def estimate_chsh_from_pmfs(pmfs: Mapping[tuple[int, int], JointPMF]) -> ChshEstimate:
    """Infinite-sample version of :func:`estimate_chsh` (no sampling, ``SE = 0``)."""
    E = {name: pmfs[(i, j)].correlation for name, i, j, _ in CELLS}
    S = sum(sign * E[name] for name, _, _, sign in CELLS)
    return ChshEstimate(E=E, counts=None, S=S, SE=0.0, sigma_above_2=_sigma_above_2(S, 0.0))


def analytic_chsh(model: Model, settings: SettingsQuad) -> float:
    return estimate_chsh_from_pmfs(model_pmfs(model, settings)).S


@dataclass(frozen=True)
class StrategyEnumeration:
    max_abs_S: int
    max_S: int
    argmax: tuple[StrategyTable, ...]
    values: dict[StrategyTable, int]

    def to_json(self) -> dict:
        return {
            "max_S": self.max_S,
            "max_abs_S": self.max_abs_S,
            "argmax_count": len(self.argmax),
            "argmax": [list(t.as_tuple()) for t in self.argmax],
        }


def enumerate_deterministic_strategies() -> StrategyEnumeration:
    """Evaluate ``S`` on all 16 deterministic strategies.

    ``argmax`` lists the tables reaching the signed maximum ``max_S``; the
    sign-flipped tables reach ``-max_S``.
    """
    values = {t: t.chsh() for t in ALL_TABLES}
    max_S = max(values.values())
    return StrategyEnumeration(
        max_abs_S=max(abs(v) for v in values.values()),
        max_S=max_S,
        argmax=tuple(t for t in ALL_TABLES if values[t] == max_S),
        values=values,
    )


def mixture_chsh(weights) -> float:
    """``S`` of a mixture over :data:`ALL_TABLES` with the given weights."""
    w = np.asarray(weights, dtype=float)
    return float(w @ np.array([t.chsh() for t in ALL_TABLES], dtype=float))


# -- optimization -------------------------------------------------------------

def qm_correlation_deg(delta_deg):
    return -np.cos(np.radians(delta_deg))


def lhv_cos_correlation_deg(delta_deg):
    d = np.abs((np.asarray(delta_deg, dtype=float) + 180.0) % 360.0 - 180.0)
    return -1.0 + 2.0 * d / 180.0


def chsh_function(model: str) -> Callable[[np.ndarray], float]:
    """``S`` as a function of the four angles in degrees, from the analytic correlations."""
    tag = model_tag(model)
    if tag == "lhv-table":
        raise ValueError("angle optimization needs 'qm' or 'lhv-cos'")
    corr = qm_correlation_deg if tag == "qm" else lhv_cos_correlation_deg

    def S(x) -> float:
        a, a2, b, b2 = x
        return float(corr(a - b) + corr(a2 - b) + corr(a - b2) - corr(a2 - b2))

    return S


def _golden_max(f, lo: float, hi: float, xtol: float = 1e-10) -> tuple[float, float]:
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


@dataclass(frozen=True)
class OptimizationResult:
    settings: SettingsQuad
    S: float
    sweeps: int

    @property
    def abs_S(self) -> float:
        return abs(self.S)

    def to_json(self) -> dict:
        return {"settings_deg": list(self.settings.as_tuple()), "S": self.S, "S_abs": abs(self.S),
                "sweeps": self.sweeps}


def _coordinate_ascent(f, x0, tol: float, max_sweeps: int, grid: int) -> tuple[np.ndarray, float, int]:
    x = np.array(x0, dtype=float)
    fx = f(x)
    step = 360.0 / grid
    for sweep in range(1, max_sweeps + 1):
        start = fx
        for k in range(4):
            def g(t, k=k):
                y = x.copy()
                y[k] = t
                return f(y)

            # coarse scan over a full turn, then golden section around the best point
            ts = x[k] + step * np.arange(grid)
            vals = [g(t) for t in ts]
            best = ts[int(np.argmax(vals))]
            t, ft = _golden_max(g, best - step, best + step)
            if ft > fx:
                x[k], fx = t, ft
        if fx - start < tol:
            return x, fx, sweep
    return x, fx, max_sweeps


def optimize_angles(model: str, start: SettingsQuad, tol: float = 1e-12,
                    max_sweeps: int = 500, grid: int = 72) -> OptimizationResult:
    """Maximize ``|S|`` over the four angles by cyclic coordinate search.

    Each coordinate move scans ``grid`` points over a full turn and refines
    the best one by golden-section search; a move is kept only if it
    improves.  Both signs of ``S`` are optimized and the larger ``|S|`` wins.
    Sweeps stop once a full sweep improves by less than ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    S = chsh_function(model)
    best = None
    for sign in (1.0, -1.0):
        x, fx, sweeps = _coordinate_ascent(lambda y: sign * S(y), start.as_tuple(), tol, max_sweeps, grid)
        if best is None or fx > best[1]:
            best = (x, fx, sweeps)
    x, _, sweeps = best
    settings = SettingsQuad(*x)
    return OptimizationResult(settings=settings, S=S(np.array(settings.as_tuple())), sweeps=sweeps)


def grid_search_max_abs_chsh(model: str, step_deg: float = 1.0) -> float:
    """Brute-force ``max |S|`` with ``a = 0`` fixed (``S`` depends only on angle differences)."""
    corr = qm_correlation_deg if model_tag(model) == "qm" else lhv_cos_correlation_deg
    t = np.arange(0.0, 360.0, step_deg)
    a2 = t[:, None, None]
    b = t[None, :, None]
    b2 = t[None, None, :]
    vals = corr(-b) + corr(a2 - b) + corr(-b2) - corr(a2 - b2)
    return float(np.max(np.abs(vals)))


def correlation_sweep(model: str, thetas_deg, rounds: int, seed: int) -> list[dict]:
    """Model correlation vs. a sampled estimate at each angle between the two directions.

    Each angle uses ``rounds`` hidden-variable or quantum draws from its own
    seeded stream.  Rows are ``{"theta_deg", "E_model", "E_empirical"}``.
    """
    tag = model_tag(model)
    rows = []
    for k, th in enumerate(thetas_deg):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(k,)))
        a, b = Direction.from_degrees(0.0), Direction.from_degrees(float(th))
        if tag == "qm":
            pmf = qm_joint_pmf(a, b)
            counts = rng.multinomial(rounds, pmf.flat())
            emp = float((counts[0] - counts[1] - counts[2] + counts[3]) / rounds)
            model_E = float(qm_correlation_deg(th))
        elif tag == "lhv-cos":
            phi = sample_hidden_many(rng, rounds)
            prod = lhv_cos_responses(a, phi).astype(np.int64) * lhv_cos_responses(b, -phi)
            emp = float(prod.mean())
            model_E = float(lhv_cos_correlation_deg(th))
        else:
            raise ValueError("sweeps need 'qm' or 'lhv-cos'")
        rows.append({"theta_deg": float(th), "E_model": model_E, "E_empirical": emp})
    return rows
