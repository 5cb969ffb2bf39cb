"""Outcome statistics for the Bell experiment.

Two families of models are covered: the quantum singlet model, whose joint
outcome pmf is computed from explicit 4x4 projector algebra, and local hidden
variable (LHV) models, where each outcome is a function of the local setting
and a hidden state shipped with the particle.  The LHV family includes the
sign-cos spin model (outcome ``sign(a . phi)``, ``phi`` uniform on the sphere,
Bob holding ``-phi``) and finite mixtures of deterministic strategy tables.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from . import qmath
from .errors import OutOfRange
from .spin import Direction, singlet_state, spin_component_operator

OUTCOMES = (1, -1)
ALICE_LABELS = ("a", "a'")
BOB_LABELS = ("b", "b'")
MODEL_TAGS = ("qm", "lhv-cos", "lhv-table")
PMF_TOL = 1e-12


@dataclass(frozen=True)
class SettingsQuad:
    """The four CHSH measurement angles in degrees, normalized to [0, 360)."""

    a: float
    a_prime: float
    b: float
    b_prime: float

    def __post_init__(self):
        for name in ("a", "a_prime", "b", "b_prime"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"setting {name} is not finite")
            v = v % 360.0
            # -1e-17 % 360 rounds to 360.0
            object.__setattr__(self, name, 0.0 if v == 360.0 else v)

    @classmethod
    def parse(cls, text: str) -> "SettingsQuad":
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 4:
            raise ValueError(f"expected four comma-separated angles, got {text!r}")
        return cls(*(float(p) for p in parts))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.a_prime, self.b, self.b_prime)

    def alice_deg(self, idx: int) -> float:
        return (self.a, self.a_prime)[idx]

    def bob_deg(self, idx: int) -> float:
        return (self.b, self.b_prime)[idx]

    def alice(self, idx: int) -> Direction:
        return Direction.from_degrees(self.alice_deg(idx))

    def bob(self, idx: int) -> Direction:
        return Direction.from_degrees(self.bob_deg(idx))


@dataclass(frozen=True)
class JointPMF:
    """Joint pmf of (alpha, beta) in {+1, -1}^2.

    ``p[i, j]`` is the probability of ``(OUTCOMES[i], OUTCOMES[j])``, so the
    flat order is (+,+), (+,-), (-,+), (-,-).
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(2, 2)
        if not np.all(np.isfinite(p)):
            raise ValueError("pmf has non-finite entries")
        if p.min() < -PMF_TOL:
            raise ValueError(f"pmf has a negative entry {p.min()!r}")
        p = np.where(p < 0, 0.0, p)
        if abs(p.sum() - 1.0) > PMF_TOL:
            raise ValueError(f"pmf sums to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_moments(cls, mean_a: float, mean_b: float, corr: float) -> "JointPMF":
        """pmf with the given outcome means and correlation ``E[alpha beta]``."""
        p = [[(1 + x * mean_a + y * mean_b + x * y * corr) / 4 for y in OUTCOMES] for x in OUTCOMES]
        return cls(np.array(p))

    def prob(self, alpha: int, beta: int) -> float:
        return float(self.p[OUTCOMES.index(alpha), OUTCOMES.index(beta)])

    def flat(self) -> np.ndarray:
        return self.p.reshape(-1).copy()

    @property
    def correlation(self) -> float:
        return float(self.p[0, 0] - self.p[0, 1] - self.p[1, 0] + self.p[1, 1])

    @property
    def marginal_a(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def marginal_b(self) -> np.ndarray:
        return self.p.sum(axis=0)

    @property
    def mean_a(self) -> float:
        m = self.marginal_a
        return float(m[0] - m[1])

    @property
    def mean_b(self) -> float:
        m = self.marginal_b
        return float(m[0] - m[1])


@dataclass(frozen=True)
class HiddenState:
    """Spin vector ``phi`` of Alice's particle; Bob's particle carries ``-phi``."""

    phi: tuple[float, float, float]

    def __post_init__(self):
        v = np.asarray(self.phi, dtype=float)
        if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > PMF_TOL:
            raise ValueError(f"hidden state must be a unit 3-vector, got {self.phi!r}")
        object.__setattr__(self, "phi", tuple(float(c) for c in v))

    @property
    def bob_phi(self) -> tuple[float, float, float]:
        return tuple(-c for c in self.phi)


@dataclass(frozen=True)
class StrategyTable:
    """One deterministic local strategy: the four +-1 responses."""

    a: int
    a_prime: int
    b: int
    b_prime: int

    def __post_init__(self):
        for v in self.as_tuple():
            if v not in (1, -1):
                raise ValueError(f"strategy responses must be +1 or -1, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.a_prime, self.b, self.b_prime)

    def alice(self, idx: int) -> int:
        return (self.a, self.a_prime)[idx]

    def bob(self, idx: int) -> int:
        return (self.b, self.b_prime)[idx]

    def chsh(self) -> int:
        return self.a * self.b + self.a_prime * self.b + self.a * self.b_prime - self.a_prime * self.b_prime


ALL_TABLES = tuple(StrategyTable(*t) for t in itertools.product(OUTCOMES, repeat=4))


@dataclass(frozen=True)
class StrategyEnsemble:
    """Finite mixture of strategy tables (the hidden variable is the table index)."""

    tables: tuple[StrategyTable, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        tables = tuple(self.tables)
        w = np.asarray(self.weights, dtype=float)
        if len(tables) == 0 or w.shape != (len(tables),):
            raise ValueError("need one weight per strategy table")
        if w.min() < 0 or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("ensemble weights must be nonnegative and sum to 1")
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "weights", tuple(float(x) for x in w / w.sum()))

    @classmethod
    def constant(cls, table: StrategyTable) -> "StrategyEnsemble":
        return cls((table,), (1.0,))

    def response_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(alice, bob) arrays of shape (n_tables, 2) indexed by setting."""
        alice = np.array([[t.a, t.a_prime] for t in self.tables], dtype=np.int8)
        bob = np.array([[t.b, t.b_prime] for t in self.tables], dtype=np.int8)
        return alice, bob

    def joint_pmf(self, alice_idx: int, bob_idx: int) -> JointPMF:
        p = np.zeros((2, 2))
        for t, w in zip(self.tables, self.weights):
            p[OUTCOMES.index(t.alice(alice_idx)), OUTCOMES.index(t.bob(bob_idx))] += w
        return JointPMF(p)

    def to_json(self) -> list:
        return [{"table": list(t.as_tuple()), "weight": w} for t, w in zip(self.tables, self.weights)]

    @classmethod
    def from_json(cls, data) -> "StrategyEnsemble":
        if isinstance(data, dict):
            data = data["strategies"]
        tables = tuple(StrategyTable(*entry["table"]) for entry in data)
        return cls(tables, tuple(float(entry["weight"]) for entry in data))


Model = Union[str, StrategyEnsemble]


def model_tag(model: Model) -> str:
    if isinstance(model, StrategyEnsemble):
        return "lhv-table"
    if model in ("qm", "lhv-cos"):
        return model
    raise ValueError(f"unknown model {model!r}; use 'qm', 'lhv-cos' or a StrategyEnsemble")


# -- quantum singlet ---------------------------------------------------------

def _projector(direction: Direction, outcome: int) -> np.ndarray:
    return 0.5 * (np.eye(2) + outcome * spin_component_operator(direction))


def qm_joint_pmf(a, b) -> JointPMF:
    """``p(alpha, beta) = <psi| P_alpha(a) (x) P_beta(b) |psi>`` for the singlet."""
    a = Direction.coerce(a)
    b = Direction.coerce(b)
    psi = singlet_state()
    p = np.empty((2, 2))
    for i, alpha in enumerate(OUTCOMES):
        for j, beta in enumerate(OUTCOMES):
            op = qmath.tensor_product(_projector(a, alpha), _projector(b, beta))
            p[i, j] = psi.expectation(op)
    return JointPMF(p)


def qm_correlation(a, b) -> float:
    return qm_joint_pmf(a, b).correlation


# -- sign-cos hidden variable model -----------------------------------------

def lhv_cos_response(a, h: HiddenState | Sequence[float]) -> int:
    """``sign(a . phi)`` with the measure-zero tie resolved to +1."""
    a = Direction.coerce(a)
    phi = h.phi if isinstance(h, HiddenState) else h
    d = a.x * phi[0] + a.y * phi[1] + a.z * phi[2]
    return 1 if d >= 0 else -1


def lhv_cos_responses(a, phis: np.ndarray) -> np.ndarray:
    """Vectorized :func:`lhv_cos_response` over an ``(n, 3)`` array of hidden vectors."""
    d = np.asarray(phis) @ Direction.coerce(a).as_array()
    return np.where(d >= 0, 1, -1).astype(np.int8)


def sample_hidden_many(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` points uniform on the unit sphere, shape ``(n, 3)``.

    Archimedes: ``z`` uniform on [-1, 1] and azimuth uniform on [0, 2 pi).
    """
    u = rng.random((n, 2))
    z = 2.0 * u[:, 0] - 1.0
    t = 2.0 * math.pi * u[:, 1]
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = np.column_stack([r * np.cos(t), r * np.sin(t), z])
    return phi / np.linalg.norm(phi, axis=1, keepdims=True)


def sample_hidden(rng: np.random.Generator) -> HiddenState:
    return HiddenState(tuple(sample_hidden_many(rng, 1)[0]))


def lhv_cos_correlation(theta: float) -> float:
    """Analytic ``E(AB)`` of the sign-cos model at angle ``theta`` in [0, pi]."""
    if not (0.0 <= theta <= math.pi):
        raise OutOfRange(f"angle {theta!r} outside [0, pi]")
    return -1.0 + 2.0 * theta / math.pi


def angle_between(a, b) -> float:
    a = Direction.coerce(a)
    b = Direction.coerce(b)
    return math.acos(max(-1.0, min(1.0, a.dot(b))))


def lhv_cos_joint_pmf(a, b) -> JointPMF:
    """Exact pmf of the sign-cos model: uniform marginals, correlation ``-1 + 2 theta / pi``."""
    return JointPMF.from_moments(0.0, 0.0, lhv_cos_correlation(angle_between(a, b)))


def lhv_cos_strategy_mixture(settings: SettingsQuad) -> StrategyEnsemble:
    """The sign-cos model at planar settings as an exact mixture of strategy tables.

    For in-plane directions only the azimuth ``t`` of ``phi`` matters and it
    is uniform on the circle.  Every response is constant between the
    breakpoints ``angle +- 90 deg``, so the weight of a table is the total arc
    length on which the four responses equal that table, divided by 360.
    """
    alice = [settings.a, settings.a_prime]
    # Bob holds -phi: his response at b is sign(cos(t - b - 180))
    bob = [settings.b + 180.0, settings.b_prime + 180.0]
    cuts = sorted({(x + s) % 360.0 for x in alice + bob for s in (90.0, 270.0)})
    cuts.append(cuts[0] + 360.0)
    weights: dict[StrategyTable, float] = {}
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 0:
            continue
        mid = math.radians(0.5 * (lo + hi))
        resp = [1 if math.cos(mid - math.radians(x)) >= 0 else -1 for x in alice + bob]
        t = StrategyTable(*resp)
        weights[t] = weights.get(t, 0.0) + (hi - lo) / 360.0
    tables = tuple(sorted(weights, key=ALL_TABLES.index))
    return StrategyEnsemble(tables, tuple(weights[t] for t in tables))


def model_joint_pmf(model: Model, settings: SettingsQuad, alice_idx: int, bob_idx: int) -> JointPMF:
    """Exact pmf for a setting pair under any supported model."""
    tag = model_tag(model)
    if tag == "lhv-table":
        return model.joint_pmf(alice_idx, bob_idx)
    a, b = settings.alice(alice_idx), settings.bob(bob_idx)
    return qm_joint_pmf(a, b) if tag == "qm" else lhv_cos_joint_pmf(a, b)


def model_pmfs(model: Model, settings: SettingsQuad) -> dict[tuple[int, int], JointPMF]:
    return {(i, j): model_joint_pmf(model, settings, i, j) for i in (0, 1) for j in (0, 1)}


# -- trial records -----------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    round: int
    setting_a: str
    setting_a_deg: float
    setting_b: str
    setting_b_deg: float
    outcome_a: int
    outcome_b: int
    model: str
    hidden: HiddenState | StrategyTable | None = None

    @property
    def alice_idx(self) -> int:
        return ALICE_LABELS.index(self.setting_a)

    @property
    def bob_idx(self) -> int:
        return BOB_LABELS.index(self.setting_b)


def _choice_index(choice, labels: Sequence[str]) -> int:
    if choice in (0, 1):
        return int(choice)
    try:
        return labels.index(choice)
    except ValueError:
        raise ValueError(f"setting choice {choice!r} not in {labels}") from None


def sample_trial(model: Model, settings: SettingsQuad, setting_choice, rng: np.random.Generator,
                 round_index: int = 0) -> TrialRecord:
    """Draw one round for a fixed choice of setting labels, e.g. ``("a", "b'")``."""
    tag = model_tag(model)
    i = _choice_index(setting_choice[0], ALICE_LABELS)
    j = _choice_index(setting_choice[1], BOB_LABELS)
    a, b = settings.alice(i), settings.bob(j)
    hidden = None
    if tag == "qm":
        k = rng.choice(4, p=qm_joint_pmf(a, b).flat())
        out_a, out_b = OUTCOMES[k // 2], OUTCOMES[k % 2]
    elif tag == "lhv-cos":
        hidden = sample_hidden(rng)
        out_a = lhv_cos_response(a, hidden)
        out_b = lhv_cos_response(b, hidden.bob_phi)
    else:
        t = model.tables[rng.choice(len(model.tables), p=model.weights)]
        hidden = t
        out_a, out_b = t.alice(i), t.bob(j)
    return TrialRecord(
        round=round_index,
        setting_a=ALICE_LABELS[i],
        setting_a_deg=settings.alice_deg(i),
        setting_b=BOB_LABELS[j],
        setting_b_deg=settings.bob_deg(j),
        outcome_a=out_a,
        outcome_b=out_b,
        model=tag,
        hidden=hidden,
    )


CSV_COLUMNS = (
    "round", "setting_a_label", "setting_a_deg", "setting_b_label", "setting_b_deg",
    "outcome_a", "outcome_b", "phi_x", "phi_y", "phi_z", "model",
)


@dataclass
class TrialLog(Sequence[TrialRecord]):
    """Column-oriented log of trial rounds; indexing yields :class:`TrialRecord`.

    ``alice_idx``/``bob_idx`` hold 0 for the unprimed setting and 1 for the
    primed one.  ``phi`` is present for sign-cos runs and ``table_idx`` (into
    ``ensemble.tables``) for strategy-table runs.
    """

    model: str
    settings: SettingsQuad
    rounds: np.ndarray
    alice_idx: np.ndarray
    bob_idx: np.ndarray
    outcome_a: np.ndarray
    outcome_b: np.ndarray
    phi: np.ndarray | None = None
    table_idx: np.ndarray | None = None
    ensemble: StrategyEnsemble | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.rounds)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[i] for i in range(*k.indices(len(self)))]
        i, j = int(self.alice_idx[k]), int(self.bob_idx[k])
        hidden = None
        if self.phi is not None:
            hidden = HiddenState(tuple(self.phi[k].tolist()))
        elif self.table_idx is not None and self.ensemble is not None:
            hidden = self.ensemble.tables[int(self.table_idx[k])]
        return TrialRecord(
            round=int(self.rounds[k]),
            setting_a=ALICE_LABELS[i],
            setting_a_deg=self.settings.alice_deg(i),
            setting_b=BOB_LABELS[j],
            setting_b_deg=self.settings.bob_deg(j),
            outcome_a=int(self.outcome_a[k]),
            outcome_b=int(self.outcome_b[k]),
            model=self.model,
            hidden=hidden,
        )

    def __iter__(self) -> Iterator[TrialRecord]:
        for k in range(len(self)):
            yield self[k]

    @classmethod
    def concat(cls, parts: Sequence["TrialLog"]) -> "TrialLog":
        first = parts[0]

        def cat(name):
            cols = [getattr(p, name) for p in parts]
            return None if cols[0] is None else np.concatenate(cols)

        return cls(
            model=first.model,
            settings=first.settings,
            rounds=cat("rounds"),
            alice_idx=cat("alice_idx"),
            bob_idx=cat("bob_idx"),
            outcome_a=cat("outcome_a"),
            outcome_b=cat("outcome_b"),
            phi=cat("phi"),
            table_idx=cat("table_idx"),
            ensemble=first.ensemble,
        )

    @classmethod
    def from_records(cls, records: Iterable[TrialRecord]) -> "TrialLog":
        records = list(records)
        if not records:
            raise ValueError("no records")
        r0 = records[0]
        angles = {}
        for r in records:
            angles.setdefault(("A", r.alice_idx), r.setting_a_deg)
            angles.setdefault(("B", r.bob_idx), r.setting_b_deg)
        settings = SettingsQuad(
            angles.get(("A", 0), 0.0), angles.get(("A", 1), 0.0),
            angles.get(("B", 0), 0.0), angles.get(("B", 1), 0.0),
        )
        phi = None
        if all(isinstance(r.hidden, HiddenState) for r in records):
            phi = np.array([r.hidden.phi for r in records])
        return cls(
            model=r0.model,
            settings=settings,
            rounds=np.array([r.round for r in records], dtype=np.int64),
            alice_idx=np.array([r.alice_idx for r in records], dtype=np.int8),
            bob_idx=np.array([r.bob_idx for r in records], dtype=np.int8),
            outcome_a=np.array([r.outcome_a for r in records], dtype=np.int8),
            outcome_b=np.array([r.outcome_b for r in records], dtype=np.int8),
            phi=phi,
        )

    def csv_text(self) -> str:
        a_lab = [f"{ALICE_LABELS[i]},{self.settings.alice_deg(i)!r}" for i in (0, 1)]
        b_lab = [f"{BOB_LABELS[j]},{self.settings.bob_deg(j)!r}" for j in (0, 1)]
        if self.phi is not None:
            phis = [f"{x!r},{y!r},{z!r}" for x, y, z in self.phi.tolist()]
        else:
            phis = [",,"] * len(self)
        lines = [",".join(CSV_COLUMNS)]
        lines.extend(
            f"{r},{a_lab[i]},{b_lab[j]},{oa},{ob},{ph},{self.model}"
            for r, i, j, oa, ob, ph in zip(
                self.rounds.tolist(), self.alice_idx.tolist(), self.bob_idx.tolist(),
                self.outcome_a.tolist(), self.outcome_b.tolist(), phis,
            )
        )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())


def read_csv(path_or_text) -> TrialLog:
    """Parse a trial CSV (path or the text itself) back into a :class:`TrialLog`."""
    if isinstance(path_or_text, str) and path_or_text.startswith(CSV_COLUMNS[0] + ","):
        fh = io.StringIO(path_or_text)
    else:
        fh = open(path_or_text, newline="")
    with fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        rows = list(reader)
    records = []
    for row in rows:
        hidden = None
        if row["phi_x"]:
            hidden = HiddenState((float(row["phi_x"]), float(row["phi_y"]), float(row["phi_z"])))
        records.append(TrialRecord(
            round=int(row["round"]),
            setting_a=row["setting_a_label"],
            setting_a_deg=float(row["setting_a_deg"]),
            setting_b=row["setting_b_label"],
            setting_b_deg=float(row["setting_b_deg"]),
            outcome_a=int(row["outcome_a"]),
            outcome_b=int(row["outcome_b"]),
            model=row["model"],
            hidden=hidden,
        ))
    return TrialLog.from_records(records)
