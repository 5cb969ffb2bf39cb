import math
from fractions import Fraction

import numpy as np
import pytest

from belllab.bellsim import (
    TSIRELSON_SETTINGS,
    ExperimentConfig,
    Network,
    analytic_chsh,
    correlation_sweep,
    empirical_pmfs,
    enumerate_deterministic_strategies,
    estimate_chsh,
    estimate_chsh_from_pmfs,
    feasibility_for_pmfs,
    grid_search_max_abs_chsh,
    has_alice_bob_edge,
    joint_feasibility,
    joint_pairwise_pmf,
    message_graph,
    mixture_chsh,
    no_signaling_test,
    optimize_angles,
    phase_one_simplex,
    run_protocol,
)
from belllab.bellsim.protocol import Emit, build_network
from belllab.errors import InconsistentMarginals, InsufficientData, LocalityViolation
from belllab.models import (
    ALL_TABLES,
    JointPMF,
    SettingsQuad,
    StrategyEnsemble,
    StrategyTable,
    TrialLog,
    lhv_cos_strategy_mixture,
    model_pmfs,
    sample_trial,
)

SQRT8 = 2 * math.sqrt(2)
QUIET = SettingsQuad(0, 60, 30, 200)  # sign-cos |S| = 10/9 here, well inside the bound


def run(model, settings=TSIRELSON_SETTINGS, rounds=20_000, seed=1, workers=1):
    return run_protocol(ExperimentConfig(model, settings, rounds, seed), workers=workers)


class TestProtocol:
    def test_topology(self):
        for model in ("qm", "lhv-cos"):
            assert not has_alice_bob_edge(message_graph(model))
        assert ("alice", "nature") in message_graph("qm")
        assert ("alice", "nature") not in message_graph("lhv-cos")

    def test_network_rejects_alice_bob(self):
        with pytest.raises(LocalityViolation):
            Network({("alice", "bob")})
        net, _, _ = build_network(ExperimentConfig("lhv-cos", TSIRELSON_SETTINGS, 10), 0)
        with pytest.raises(LocalityViolation):
            net.send("alice", "bob", Emit(0, 1, {}))
        with pytest.raises(LocalityViolation):
            net.send("alice", "nature", Emit(0, 1, {}))

    def test_log_shape(self):
        log = run("qm", rounds=10_000)
        assert len(log) == 10_000
        np.testing.assert_array_equal(log.rounds, np.arange(10_000))
        assert set(np.unique(log.outcome_a)) == {-1, 1}
        assert log.phi is None

    def test_lhv_matching_settings_anticorrelated(self):
        s = SettingsQuad(30, 90, 30, 150)
        log = run("lhv-cos", s, rounds=100_000)
        m = (log.alice_idx == 0) & (log.bob_idx == 0)
        assert m.sum() > 20_000
        assert np.all(log.outcome_a[m] == -log.outcome_b[m])

    def test_lhv_outcomes_follow_hidden_state(self):
        log = run("lhv-cos", rounds=2000)
        for rec in log[:200]:
            a = np.radians(rec.setting_a_deg)
            d = math.cos(a) * rec.hidden.phi[0] + math.sin(a) * rec.hidden.phi[1]
            assert rec.outcome_a == (1 if d >= 0 else -1)

    def test_table_model(self):
        t = StrategyTable(1, -1, -1, 1)
        log = run(StrategyEnsemble.constant(t), rounds=5000)
        for i in (0, 1):
            assert np.all(log.outcome_a[log.alice_idx == i] == t.alice(i))
            assert np.all(log.outcome_b[log.bob_idx == i] == t.bob(i))

    def test_deterministic_and_worker_invariant(self):
        base = ExperimentConfig("lhv-cos", TSIRELSON_SETTINGS, 10_000, seed=42)
        ref = run_protocol(base).csv_text()
        assert run_protocol(base).csv_text() == ref
        assert run_protocol(base, workers=3).csv_text() == ref
        other = ExperimentConfig("lhv-cos", TSIRELSON_SETTINGS, 10_000, seed=43)
        assert run_protocol(other).csv_text() != ref

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig("qm", TSIRELSON_SETTINGS, 0)
        with pytest.raises(ValueError):
            ExperimentConfig("bohm", TSIRELSON_SETTINGS, 10)


class TestChsh:
    def test_qm_estimate(self):
        est = estimate_chsh(run("qm", rounds=1_000_000))
        assert abs(est.S + SQRT8) <= 3 * est.SE
        assert est.sigma_above_2 > 5
        assert sum(est.counts.values()) == 1_000_000
        assert all(-1 <= e <= 1 for e in est.E.values())

    def test_lhv_estimate_within_bound(self):
        est = estimate_chsh(run("lhv-cos", rounds=1_000_000))
        assert abs(est.S) <= 2 + 3 * est.SE

    def test_constant_table(self):
        est = estimate_chsh(run(StrategyEnsemble.constant(StrategyTable(1, 1, 1, 1)), rounds=2000))
        assert est.E == {"ab": 1.0, "a'b": 1.0, "ab'": 1.0, "a'b'": 1.0}
        assert est.S == 2.0 and est.SE == 0.0

    def test_empty_cell(self, rng):
        recs = [sample_trial("qm", TSIRELSON_SETTINGS, ("a", "b"), rng, k) for k in range(10)]
        with pytest.raises(InsufficientData, match="a'b"):
            estimate_chsh(recs)

    def test_accepts_records(self, rng):
        recs = [sample_trial("qm", TSIRELSON_SETTINGS, (k % 2, (k // 2) % 2), rng, k) for k in range(40)]
        assert estimate_chsh(recs).S == estimate_chsh(TrialLog.from_records(recs)).S

    def test_pmf_path(self):
        assert estimate_chsh_from_pmfs(model_pmfs("qm", TSIRELSON_SETTINGS)).S == pytest.approx(-SQRT8, abs=1e-12)
        assert analytic_chsh("lhv-cos", TSIRELSON_SETTINGS) == pytest.approx(-2.0, abs=1e-12)
        ens = StrategyEnsemble(ALL_TABLES[3:6], (0.5, 0.25, 0.25))
        weights = [dict(zip(ens.tables, ens.weights)).get(t, 0.0) for t in ALL_TABLES]
        assert analytic_chsh(ens, TSIRELSON_SETTINGS) == pytest.approx(mixture_chsh(weights), abs=1e-12)


class TestEnumeration:
    def test_bound(self):
        en = enumerate_deterministic_strategies()
        assert en.max_abs_S == 2 and en.max_S == 2
        assert len(en.argmax) == 8
        assert set(en.values.values()) == {-2, 2}
        assert StrategyTable(1, 1, 1, 1) in en.argmax

    def test_closed_form(self):
        for t in ALL_TABLES:
            A, A2, B, B2 = t.as_tuple()
            assert t.chsh() == A * (B + B2) + A2 * (B - B2)

    def test_mixtures(self, rng):
        W = rng.dirichlet(np.ones(16), size=1000)
        assert max(abs(mixture_chsh(w)) for w in W) <= 2 + 1e-12


class TestOptimizer:
    def test_qm_reaches_tsirelson(self):
        res = optimize_angles("qm", SettingsQuad(0, 90, 40, 310))
        assert res.abs_S == pytest.approx(SQRT8, abs=1e-6)

    def test_grid_oracle(self):
        assert grid_search_max_abs_chsh("qm") == pytest.approx(SQRT8, abs=1e-6)
        assert grid_search_max_abs_chsh("lhv-cos") <= 2 + 1e-9

    def test_lhv_never_exceeds_two(self, rng):
        for _ in range(10):
            res = optimize_angles("lhv-cos", SettingsQuad(*rng.uniform(0, 360, 4)))
            assert res.abs_S <= 2 + 1e-9

    def test_degenerate_start(self):
        start = SettingsQuad(0, 0, 45, 45)
        res = optimize_angles("qm", start)
        assert abs(analytic_chsh("qm", start)) <= res.abs_S + 1e-12
        assert res.sweeps < 500

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            optimize_angles("qm", TSIRELSON_SETTINGS, tol=0)


class TestSimplex:
    def test_feasible(self):
        F = Fraction
        x = phase_one_simplex([[F(1), F(1)], [F(1), F(-1)]], [F(1), F(0)])
        assert x == [F(1, 2), F(1, 2)]

    def test_infeasible(self):
        F = Fraction
        assert phase_one_simplex([[F(1), F(1)]], [F(-1)]) is None
        assert phase_one_simplex([[F(1), F(0)], [F(1), F(1)]], [F(2), F(1)]) is None

    def test_redundant_rows(self):
        F = Fraction
        x = phase_one_simplex([[F(1), F(1), F(1)], [F(2), F(2), F(2)]], [F(1), F(2)])
        assert x is not None and sum(x) == 1 and min(x) >= 0


def check_witness(result, pmfs):
    assert result.feasible
    j = result.joint
    assert j.min() >= 0 and abs(j.sum() - 1) <= 1e-12
    for name, key in (("ab", (0, 0)), ("ab'", (0, 1)), ("a'b", (1, 0)), ("a'b'", (1, 1))):
        assert np.max(np.abs(joint_pairwise_pmf(j, name).p - pmfs[key].p)) <= 1e-9


class TestFeasibility:
    def test_qm_tsirelson_infeasible(self):
        res = feasibility_for_pmfs(model_pmfs("qm", TSIRELSON_SETTINGS))
        assert not res.feasible and not res.criterion_feasible
        assert res.joint is None
        assert res.violated_value == pytest.approx(-SQRT8, abs=1e-9)

    @pytest.mark.parametrize("quad", [(0, 90, 45, 315), (0, 60, 30, 200), (10, 10, 100, 280)])
    def test_lhv_feasible(self, quad):
        pmfs = model_pmfs("lhv-cos", SettingsQuad(*quad))
        res = feasibility_for_pmfs(pmfs)
        check_witness(res, pmfs)
        assert res.violated_inequality is None

    def test_lhv_explicit_construction(self):
        # the hidden-variable measure itself is a witness; the solver must agree
        s = SettingsQuad(20, 140, 75, 300)
        ens = lhv_cos_strategy_mixture(s)
        joint = np.array([dict(zip(ens.tables, ens.weights)).get(t, 0.0) for t in ALL_TABLES])
        pmfs = model_pmfs("lhv-cos", s)
        for name, key in (("ab", (0, 0)), ("ab'", (0, 1)), ("a'b", (1, 0)), ("a'b'", (1, 1))):
            np.testing.assert_allclose(joint_pairwise_pmf(joint, name).p, pmfs[key].p, atol=1e-12)
        assert feasibility_for_pmfs(pmfs).feasible

    def test_uniform_feasible(self):
        u = JointPMF(np.full((2, 2), 0.25))
        res = joint_feasibility(u, u, u, u)
        check_witness(res, {k: u for k in ((0, 0), (0, 1), (1, 0), (1, 1))})
        # the product joint also solves the system
        prod = np.full(16, 1 / 16)
        for name in ("ab", "ab'", "a'b", "a'b'"):
            np.testing.assert_allclose(joint_pairwise_pmf(prod, name).p, u.p)

    def test_inconsistent_marginals(self):
        u = JointPMF(np.full((2, 2), 0.25))
        skew = JointPMF.from_moments(0.1, 0.0, 0.0)
        with pytest.raises(InconsistentMarginals):
            joint_feasibility(skew, u, u, u)

    def test_verdict_matches_criterion(self, rng):
        for _ in range(100):
            s = SettingsQuad(*rng.uniform(0, 360, 4))
            res = feasibility_for_pmfs(model_pmfs("qm", s))
            assert res.feasible == res.criterion_feasible
            if res.feasible:
                check_witness(res, model_pmfs("qm", s))

    def test_boundary_exact(self):
        # sign-cos at these angles sits exactly on |S| = 2
        res = feasibility_for_pmfs(model_pmfs("lhv-cos", TSIRELSON_SETTINGS))
        assert res.feasible and res.criterion_feasible

    def test_lhv_boundary_families(self, rng):
        # sign-cos correlations are irrational yet often sum to exactly +-2
        on_facet = 0
        for _ in range(200):
            s = SettingsQuad(*rng.uniform(0, 360, 4))
            pmfs = model_pmfs("lhv-cos", s)
            on_facet += abs(abs(estimate_chsh_from_pmfs(pmfs).S) - 2) < 1e-12
            check_witness(feasibility_for_pmfs(pmfs), pmfs)
        assert on_facet > 5

    def test_empirical_deterministic_cells(self):
        # perfectly correlated cells whose own marginals differ from the pooled ones
        ens = StrategyEnsemble((StrategyTable(1, 1, 1, 1), StrategyTable(1, -1, 1, -1)), (0.5, 0.5))
        pmfs = empirical_pmfs(run(ens, rounds=5000))
        for p in pmfs.values():
            assert p.p.min() >= 0
        assert feasibility_for_pmfs(pmfs).feasible

    def test_empirical_runs(self):
        lhv = feasibility_for_pmfs(empirical_pmfs(run("lhv-cos", QUIET, rounds=50_000)))
        assert lhv.feasible
        opt = optimize_angles("qm", SettingsQuad(0, 90, 40, 310)).settings
        qm = feasibility_for_pmfs(empirical_pmfs(run("qm", opt, rounds=50_000)))
        assert not qm.feasible and qm.violated_inequality is not None


class TestNoSignaling:
    def test_honest_lhv(self):
        res = no_signaling_test(run("lhv-cos", rounds=200_000))
        assert res.alice_p > 0.001 and res.bob_p > 0.001

    def test_planted_signal(self):
        r = np.random.default_rng(0)
        n = 100_000
        ai, bi = r.integers(0, 2, n).astype(np.int8), r.integers(0, 2, n).astype(np.int8)
        log = TrialLog("qm", TSIRELSON_SETTINGS, np.arange(n), ai, bi,
                       np.where(bi == 0, 1, -1).astype(np.int8), r.choice([-1, 1], n).astype(np.int8))
        res = no_signaling_test(log)
        assert res.alice_p < 1e-6
        assert res.bob_p > 1e-6

    def test_missing_cell(self, rng):
        recs = [sample_trial("qm", TSIRELSON_SETTINGS, ("a", "b"), rng, k) for k in range(10)]
        with pytest.raises(InsufficientData):
            no_signaling_test(recs)


def test_correlation_sweep():
    rows = correlation_sweep("lhv-cos", [0.0, 90.0, 180.0], 20_000, seed=3)
    assert [r["E_model"] for r in rows] == [-1.0, 0.0, 1.0]
    assert rows[0]["E_empirical"] == -1.0
    assert abs(rows[1]["E_empirical"]) < 4 / math.sqrt(20_000)
