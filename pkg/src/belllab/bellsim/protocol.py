"""Message-passing simulation of the Bell experiment.

Nodes and the only channels they may use::

    source -> alice, source -> bob        particle emission
    alice -> charlie, bob -> charlie      outcome reports
    alice <-> nature, bob <-> nature      quantum mode only

There is no alice <-> bob channel.  In the hidden-variable modes every
outcome is computed by the actor from its own setting and its own particle
payload.  In quantum mode the actors cannot do that: singlet statistics
depend on both settings, so each actor forwards its setting to ``nature``,
the one node allowed to see both, and receives its outcome back.  ``nature``
is never wired up in the hidden-variable modes.

Rounds are processed in fixed-size blocks.  Every node draws from its own
random stream keyed by ``(seed, block, node)``, so the log does not depend on
how blocks are spread across workers.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import LocalityViolation
from ..models import (
    OUTCOMES,
    Model,
    SettingsQuad,
    StrategyEnsemble,
    TrialLog,
    lhv_cos_responses,
    model_tag,
    qm_joint_pmf,
    sample_hidden_many,
)
from ..spin import Direction

BLOCK_ROUNDS = 4096
SEED_MASK = (1 << 64) - 1

LOCAL_EDGES = frozenset({
    ("source", "alice"), ("source", "bob"),
    ("alice", "charlie"), ("bob", "charlie"),
})
NATURE_EDGES = frozenset({
    ("alice", "nature"), ("bob", "nature"),
    ("nature", "alice"), ("nature", "bob"),
})
_STREAM_IDS = {"source": 0, "alice": 1, "bob": 2, "nature": 3}


@dataclass(frozen=True)
class ExperimentConfig:
    model: Model
    settings: SettingsQuad
    rounds: int
    seed: int = 0
    setting_rule: str = "fair-coins"
    block_rounds: int = BLOCK_ROUNDS

    def __post_init__(self):
        model_tag(self.model)
        if int(self.rounds) < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if self.setting_rule != "fair-coins":
            raise ValueError(f"unsupported setting rule {self.setting_rule!r}")
        if int(self.block_rounds) < 1:
            raise ValueError("block_rounds must be >= 1")

    @property
    def tag(self) -> str:
        return model_tag(self.model)

    def to_json(self) -> dict:
        return {
            "model": self.tag,
            "strategies": self.model.to_json() if isinstance(self.model, StrategyEnsemble) else None,
            "settings_deg": list(self.settings.as_tuple()),
            "rounds": int(self.rounds),
            "seed": int(self.seed),
            "setting_rule": self.setting_rule,
            "block_rounds": int(self.block_rounds),
        }


# -- messages ---------------------------------------------------------------

@dataclass(frozen=True)
class Emit:
    """Particles for rounds ``[round, round + count)``.

    ``payload`` is a dict: ``{"kind": "entangled"}`` in quantum mode,
    ``{"kind": "phi", "phi": array}`` or ``{"kind": "table", "index": array}``
    for hidden-variable modes.
    """

    round: int
    count: int
    payload: dict


@dataclass(frozen=True)
class SettingRequest:
    actor: str
    round: int
    setting: np.ndarray


@dataclass(frozen=True)
class NatureOutcome:
    round: int
    outcome: np.ndarray


@dataclass(frozen=True)
class OutcomeReport:
    actor: str
    round: int
    setting: np.ndarray
    outcome: np.ndarray
    hidden: Any = None


def message_graph(model: Model) -> frozenset[tuple[str, str]]:
    """Directed channels available for a model."""
    return LOCAL_EDGES | NATURE_EDGES if model_tag(model) == "qm" else LOCAL_EDGES


def has_alice_bob_edge(edges) -> bool:
    return any({src, dst} == {"alice", "bob"} for src, dst in edges)


class Network:
    """FIFO message loop over a fixed set of directed channels."""

    def __init__(self, edges):
        if has_alice_bob_edge(edges):
            raise LocalityViolation("topology contains a channel between alice and bob")
        self.edges = frozenset(edges)
        self.nodes: dict[str, Node] = {}
        self.queue: deque = deque()
        self.last_round: dict[tuple[str, str], int] = {}
        self.delivered = 0

    def add(self, node: "Node") -> None:
        self.nodes[node.name] = node

    def send(self, src: str, dst: str, msg) -> None:
        if (src, dst) not in self.edges:
            raise LocalityViolation(f"no channel {src} -> {dst}")
        last = self.last_round.get((src, dst), -1)
        if msg.round < last:
            raise RuntimeError(f"round order broken on {src} -> {dst}: {msg.round} after {last}")
        self.last_round[(src, dst)] = msg.round
        self.queue.append((src, dst, msg))

    def run(self) -> None:
        while self.queue:
            src, dst, msg = self.queue.popleft()
            self.delivered += 1
            self.nodes[dst].receive(src, msg, self)


class Node:
    name = "node"

    def receive(self, src: str, msg, net: Network) -> None:
        raise NotImplementedError


def _stream(seed: int, block: int, node: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & SEED_MASK, spawn_key=(block, _STREAM_IDS[node]))
    return np.random.default_rng(ss)


class Source(Node):
    name = "source"

    def __init__(self, model: Model, rng: np.random.Generator):
        self.model = model
        self.tag = model_tag(model)
        self.rng = rng

    def emit(self, start: int, count: int, net: Network) -> None:
        if self.tag == "qm":
            a = b = {"kind": "entangled"}
        elif self.tag == "lhv-cos":
            phi = sample_hidden_many(self.rng, count)
            a = {"kind": "phi", "phi": phi}
            b = {"kind": "phi", "phi": -phi}
        else:
            idx = self.rng.choice(len(self.model.tables), size=count, p=self.model.weights)
            a = b = {"kind": "table", "index": idx}
        net.send(self.name, "alice", Emit(start, count, a))
        net.send(self.name, "bob", Emit(start, count, b))


class Actor(Node):
    """Alice or Bob: picks a setting by fair coin and reports an outcome to charlie."""

    def __init__(self, name: str, angles_deg: tuple[float, float], model: Model,
                 rng: np.random.Generator):
        self.name = name
        self.angles_deg = angles_deg
        self.model = model
        self.rng = rng
        self.pending: dict[int, tuple[np.ndarray, Any]] = {}

    def _local_outcomes(self, setting: np.ndarray, payload: dict) -> np.ndarray:
        if payload["kind"] == "phi":
            outs = [lhv_cos_responses(Direction.from_degrees(d), payload["phi"]) for d in self.angles_deg]
            return np.where(setting == 0, outs[0], outs[1]).astype(np.int8)
        alice, bob = self.model.response_arrays()
        table = alice if self.name == "alice" else bob
        return table[payload["index"], setting].astype(np.int8)

    def receive(self, src: str, msg, net: Network) -> None:
        if isinstance(msg, Emit):
            setting = self.rng.integers(0, 2, size=msg.count).astype(np.int8)
            if msg.payload["kind"] == "entangled":
                self.pending[msg.round] = (setting, None)
                net.send(self.name, "nature", SettingRequest(self.name, msg.round, setting))
                return
            hidden = msg.payload.get("phi", msg.payload.get("index")) if self.name == "alice" else None
            outcome = self._local_outcomes(setting, msg.payload)
            net.send(self.name, "charlie", OutcomeReport(self.name, msg.round, setting, outcome, hidden))
        elif isinstance(msg, NatureOutcome):
            setting, _ = self.pending.pop(msg.round)
            net.send(self.name, "charlie", OutcomeReport(self.name, msg.round, setting, msg.outcome))
        else:
            raise TypeError(f"{self.name} cannot handle {type(msg).__name__}")


class Nature(Node):
    """Quantum-mode outcome source; the only node that sees both settings."""

    name = "nature"

    def __init__(self, settings: SettingsQuad, rng: np.random.Generator):
        self.rng = rng
        self.waiting: dict[int, dict[str, np.ndarray]] = {}
        cdf = np.empty((2, 2, 4))
        for i in (0, 1):
            for j in (0, 1):
                cdf[i, j] = np.cumsum(qm_joint_pmf(settings.alice(i), settings.bob(j)).flat())
        self.cdf = cdf

    def receive(self, src: str, msg, net: Network) -> None:
        got = self.waiting.setdefault(msg.round, {})
        got[msg.actor] = msg.setting
        if len(got) < 2:
            return
        del self.waiting[msg.round]
        sa, sb = got["alice"], got["bob"]
        u = self.rng.random(sa.size)
        c = self.cdf[sa, sb]
        # k indexes (+,+), (+,-), (-,+), (-,-)
        k = (u[:, None] >= c[:, :3]).sum(axis=1)
        out_a = np.where(k < 2, OUTCOMES[0], OUTCOMES[1]).astype(np.int8)
        out_b = np.where(k % 2 == 0, OUTCOMES[0], OUTCOMES[1]).astype(np.int8)
        net.send(self.name, "alice", NatureOutcome(msg.round, out_a))
        net.send(self.name, "bob", NatureOutcome(msg.round, out_b))


class Charlie(Node):
    """Collects both reports for each block and assembles the log."""

    name = "charlie"

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.reports: dict[int, dict[str, OutcomeReport]] = {}
        self.chunks: list[TrialLog] = []

    def receive(self, src: str, msg: OutcomeReport, net: Network) -> None:
        got = self.reports.setdefault(msg.round, {})
        got[msg.actor] = msg
        if len(got) < 2:
            return
        del self.reports[msg.round]
        ra, rb = got["alice"], got["bob"]
        n = ra.setting.size
        tag = self.config.tag
        self.chunks.append(TrialLog(
            model=tag,
            settings=self.config.settings,
            rounds=np.arange(msg.round, msg.round + n, dtype=np.int64),
            alice_idx=ra.setting,
            bob_idx=rb.setting,
            outcome_a=ra.outcome,
            outcome_b=rb.outcome,
            phi=ra.hidden if tag == "lhv-cos" else None,
            table_idx=ra.hidden if tag == "lhv-table" else None,
            ensemble=self.config.model if tag == "lhv-table" else None,
        ))


def build_network(config: ExperimentConfig, block: int) -> tuple[Network, Source, Charlie]:
    net = Network(message_graph(config.model))
    s = config.settings
    source = Source(config.model, _stream(config.seed, block, "source"))
    charlie = Charlie(config)
    net.add(source)
    net.add(Actor("alice", (s.a, s.a_prime), config.model, _stream(config.seed, block, "alice")))
    net.add(Actor("bob", (s.b, s.b_prime), config.model, _stream(config.seed, block, "bob")))
    net.add(charlie)
    if config.tag == "qm":
        net.add(Nature(s, _stream(config.seed, block, "nature")))
    return net, source, charlie


def _run_block(config: ExperimentConfig, block: int) -> TrialLog:
    start = block * config.block_rounds
    count = min(config.block_rounds, config.rounds - start)
    net, source, charlie = build_network(config, block)
    source.emit(start, count, net)
    net.run()
    if len(charlie.chunks) != 1 or charlie.reports:
        raise RuntimeError(f"block {block} did not complete")
    return charlie.chunks[0]


def run_protocol(config: ExperimentConfig, workers: int = 1) -> TrialLog:
    """Run all rounds and return the assembled log, sorted by round.

    ``workers > 1`` runs blocks on a thread pool; the output is identical to
    the serial run.
    """
    n_blocks = -(-int(config.rounds) // config.block_rounds)
    blocks = range(n_blocks)
    if workers <= 1:
        chunks = [_run_block(config, b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda b: _run_block(config, b), blocks))
    return TrialLog.concat(chunks)
