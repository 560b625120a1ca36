"""
tests/test_oppe.py — Off-policy evaluation and checkpoint selection tests.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from opposd.data import collect_dataset
from opposd.mdp import (
    HardExample, PolicyTable, TabularEnv, TabularPolicy, UniformPolicy,
    exact_return, random_policy_table, random_tabular_mdp,
)
from opposd.mdp.hard_example import alpha_policy
from opposd.oppe import (
    EvaluationRecord, SelectionError, UndefinedCorrelationError, UnreliableEstimateError,
    correlation_report, evaluate_checkpoint, evaluate_checkpoints, onpolicy_mc_eval,
    oppe_estimate, read_evaluations, select_best, write_evaluations, write_scatter,
)
from opposd.ratio import RatioConfig, RatioModel, TabularRatio, exact_ratio_tabular, fit_ratio
from opposd.train import CheckpointStore, TrainConfig, train


class AlwaysRight:
    n_actions = 2

    def action_probs(self, states):
        return np.tile([0.0, 1.0], (np.atleast_2d(states).shape[0], 1))


def _hard_env():
    ex = HardExample()
    return TabularEnv(ex.mdp, name="hard_example", behavior=ex.behavior)


def _hard_dataset(n=200, seed=0, behavior=None):
    env = _hard_env()
    return collect_dataset(env, behavior or UniformPolicy(2), n, env.horizon,
                           np.random.default_rng(seed))


def _records(*estimates, mc=None):
    out = []
    for i, est in enumerate(estimates):
        rec = EvaluationRecord(f"ckpt-{i:06d}", i, est)
        if mc is not None:
            rec.mc_estimate, rec.mc_std, rec.n_mc_episodes = mc[i], 0.1, 10
        out.append(rec)
    return out


def _tiny_config(**overrides):
    values = dict(
        seed=0, batch_actor=32, batch_critic=32, batch_ratio=16,
        n_critic=2, n_ratio=2, bc_iterations=5, warm_start_critic=5, warm_start_ratio=5,
        total_actor_updates=4, checkpoint_interval=2,
        actor_hidden=[4], critic_hidden=[4], ratio_hidden=[4], n_trajectories=30,
    )
    values.update(overrides)
    return TrainConfig(**values)


# ─────────────────────────────────────────────
# ESTIMATOR
# ─────────────────────────────────────────────
class TestEstimator:
    def test_on_policy_is_mean_return(self):
        ds = _hard_dataset(n=300)
        estimate = oppe_estimate(UniformPolicy(2), ds, None, gamma=1.0)
        assert estimate == pytest.approx(ds.episode_returns().mean())

    def test_discounted_on_policy(self):
        ds = _hard_dataset(n=300, seed=1)
        estimate = oppe_estimate(UniformPolicy(2), ds, None, gamma=0.5)
        assert estimate == pytest.approx(ds.episode_returns(0.5).mean())

    def test_exact_ratio_recovers_target_value(self):
        ex = HardExample()
        ds = _hard_dataset(n=5000, seed=2)
        target = alpha_policy(1.0)
        ratio = TabularRatio(exact_ratio_tabular(ex.mdp, target, ex.behavior))
        estimate = oppe_estimate(TabularPolicy(target), ds, ratio, gamma=1.0)
        assert estimate == pytest.approx(1.0, abs=0.1)

    def test_no_overlap_is_unreliable(self):
        ds = _hard_dataset(n=50, behavior=TabularPolicy(alpha_policy(1.0)))
        with pytest.raises(UnreliableEstimateError, match="no overlap"):
            oppe_estimate(AlwaysRight(), ds, None, gamma=1.0)


class TestMonteCarlo:
    def test_deterministic_policy(self):
        result = onpolicy_mc_eval(TabularPolicy(alpha_policy(1.0)), _hard_env(), 30,
                                  np.random.default_rng(0))
        assert result.mean == 1.0
        assert result.std == 0.0
        assert result.n_episodes == 30
        assert not result.single_episode

    def test_single_episode(self):
        result = onpolicy_mc_eval(UniformPolicy(2), _hard_env(), 1, np.random.default_rng(0))
        assert result.single_episode
        assert result.std == 0.0

    def test_needs_episodes(self):
        with pytest.raises(ValueError, match="n_episodes"):
            onpolicy_mc_eval(UniformPolicy(2), _hard_env(), 0, np.random.default_rng(0))


# ─────────────────────────────────────────────
# SELECTION
# ─────────────────────────────────────────────
class TestSelection:
    def test_highest_estimate(self):
        assert select_best(_records(3.0, 7.0, 5.0)).checkpoint_id == "ckpt-000001"

    def test_tie_goes_to_later_checkpoint(self):
        assert select_best(_records(4.0, 4.0, 1.0)).checkpoint_id == "ckpt-000001"

    def test_empty(self):
        with pytest.raises(SelectionError, match="No evaluation records"):
            select_best([])

    def test_non_finite_estimate_rejected(self):
        with pytest.raises(SelectionError, match="not finite"):
            EvaluationRecord("ckpt-000000", 0, float("nan"))


class TestCorrelation:
    def test_perfect_positive(self):
        report = correlation_report(_records(1.0, 2.0, 3.0, mc=[10.0, 20.0, 30.0]))
        assert report.pearson_r == pytest.approx(1.0)
        assert report.scatter[0] == ("ckpt-000000", 1.0, 10.0)

    def test_perfect_negative(self):
        report = correlation_report(_records(1.0, 2.0, 3.0, mc=[3.0, 2.0, 1.0]))
        assert report.pearson_r == pytest.approx(-1.0)

    def test_too_few_points(self):
        with pytest.raises(UndefinedCorrelationError, match="at least 3"):
            correlation_report(_records(1.0, 2.0, mc=[1.0, 2.0]))

    def test_records_without_mc_are_skipped(self):
        records = _records(1.0, 2.0, 3.0, mc=[1.0, 2.0, 4.0]) + _records(9.0)
        assert len(correlation_report(records).scatter) == 3

    def test_zero_variance(self):
        with pytest.raises(UndefinedCorrelationError, match="Zero variance"):
            correlation_report(_records(1.0, 2.0, 3.0, mc=[5.0, 5.0, 5.0]))


class TestEvaluationsFile:
    def test_write_and_read(self, tmp_path):
        records = _records(1.0, 2.5, 2.0, mc=[1.0, 3.0, 2.0])
        r = write_evaluations(tmp_path / "evaluations.csv", records, {"gamma": 1.0})
        text = (tmp_path / "evaluations.csv").read_text()
        assert text.startswith("# gamma=1.0\n")
        assert "# pearson_r=" in text.splitlines()[-1]

        loaded, pearson = read_evaluations(tmp_path / "evaluations.csv")
        assert pearson == pytest.approx(r)
        assert [rec.oppe_estimate for rec in loaded] == [1.0, 2.5, 2.0]
        assert loaded[1].mc_estimate == 3.0
        assert loaded[1].n_mc_episodes == 10
        assert select_best(loaded).checkpoint_id == "ckpt-000001"

    def test_no_footer_without_correlation(self, tmp_path):
        assert write_evaluations(tmp_path / "e.csv", _records(1.0, 2.0)) is None
        loaded, pearson = read_evaluations(tmp_path / "e.csv")
        assert pearson is None
        assert loaded[0].mc_estimate is None
        assert loaded[0].n_mc_episodes == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(SelectionError, match="not found"):
            read_evaluations(tmp_path / "missing.csv")

    def test_malformed_row(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text(
            "checkpoint_id,update_index,oppe_estimate,mc_estimate,mc_std,n_mc_episodes\n"
            "ckpt-000000,zero,1.0,,,0\n"
        )
        with pytest.raises(SelectionError, match="malformed row"):
            read_evaluations(path)

    def test_scatter(self, tmp_path):
        report = correlation_report(_records(1.0, 2.0, 3.0, mc=[1.0, 2.0, 4.0]))
        write_scatter(tmp_path / "scatter.csv", report)
        lines = (tmp_path / "scatter.csv").read_text().splitlines()
        assert lines[0] == "checkpoint_id,oppe_estimate,mc_estimate"
        assert lines[3] == "ckpt-000002,3.0,4.0"


# ─────────────────────────────────────────────
# CHECKPOINT EVALUATION
# ─────────────────────────────────────────────
class TestEvaluateCheckpoints:
    def test_every_checkpoint_evaluated(self, tmp_path):
        config = _tiny_config()
        train(_hard_env(), config, tmp_path / "run")
        eval_ds = _hard_dataset(n=60, seed=11)
        summary = evaluate_checkpoints(tmp_path / "run" / "checkpoints", eval_ds, config,
                                       tmp_path / "eval", env=_hard_env(), mc_episodes=20)
        assert [r.checkpoint_id for r in summary.records] == [
            "ckpt-000000", "ckpt-000002", "ckpt-000004"]
        assert all(r.n_mc_episodes == 20 for r in summary.records)
        assert summary.best in summary.records

        header = summary.evaluations_path.read_text().splitlines()[0]
        assert "estimator=self-normalized" in header
        assert "n_eval_trajectories=60" in header
        loaded, _ = read_evaluations(summary.evaluations_path)
        assert len(loaded) == 3

    def test_offpac_checkpoints_get_a_fresh_ratio(self, tmp_path):
        config = _tiny_config(algorithm="offpac", total_actor_updates=2)
        train(_hard_env(), config, tmp_path / "run")
        summary = evaluate_checkpoints(tmp_path / "run" / "checkpoints", _hard_dataset(n=40),
                                       config, tmp_path / "eval")
        assert len(summary.records) == 2
        assert summary.pearson_r is None
        assert summary.scatter_path is None
        assert all(r.mc_estimate is None for r in summary.records)

    def test_record_is_reproducible(self, tmp_path):
        config = _tiny_config(total_actor_updates=2)
        train(_hard_env(), config, tmp_path / "run")
        store = CheckpointStore(tmp_path / "run" / "checkpoints")
        eval_ds = _hard_dataset(n=40, seed=3)
        a = evaluate_checkpoint(store, store.latest(), eval_ds, config)
        b = evaluate_checkpoint(store, store.latest(), eval_ds, config)
        assert a.oppe_estimate == b.oppe_estimate

    def test_no_checkpoints(self, tmp_path):
        with pytest.raises(SelectionError, match="No checkpoints found"):
            evaluate_checkpoints(tmp_path / "empty", _hard_dataset(n=5), _tiny_config(),
                                 tmp_path / "eval")


# ─────────────────────────────────────────────
# BENCHMARK AGAINST EXACT RETURNS
# ─────────────────────────────────────────────
def _softmax_tables(n_states, n_policies, rng, scale=2.0):
    logits = rng.normal(scale=scale, size=(n_policies, n_states, 2))
    probs = np.exp(logits - logits.max(axis=2, keepdims=True))
    return [PolicyTable(p / p.sum(axis=1, keepdims=True)) for p in probs]


class TestTabularBenchmark:
    def test_exact_ratio_tracks_exact_returns(self):
        ex = HardExample()
        ds = _hard_dataset(n=5000, seed=21)
        records = []
        for i, table in enumerate(_softmax_tables(6, 20, np.random.default_rng(22))):
            ratio = TabularRatio(exact_ratio_tabular(ex.mdp, table, ex.behavior))
            estimate = oppe_estimate(TabularPolicy(table), ds, ratio, gamma=1.0)
            rec = EvaluationRecord(f"ckpt-{i:06d}", i, estimate)
            rec.mc_estimate = exact_return(ex.mdp, table)
            records.append(rec)
        assert correlation_report(records).pearson_r >= 0.7

    @pytest.mark.slow
    def test_fitted_ratio_tracks_exact_returns(self):
        rng = np.random.default_rng(23)
        mdp = random_tabular_mdp(5, 2, rng, gamma=0.9, horizon=60)
        mu = random_policy_table(5, 2, rng)
        env = TabularEnv(mdp, behavior=mu)
        ds = collect_dataset(env, TabularPolicy(mu), 2000, env.horizon, rng)
        config = RatioConfig(batch_size=300, gamma=0.9, variant="discounted")
        records = []
        for i, table in enumerate(_softmax_tables(5, 20, rng)):
            policy = TabularPolicy(table)
            model = RatioModel.create(ds.state_dim, [], rng, learning_rate=1e-2)
            model.fit_bandwidth(ds, rng)
            fit_ratio(model, ds, policy, config, 1500, rng)
            rec = EvaluationRecord(f"ckpt-{i:06d}", i, oppe_estimate(policy, ds, model, 0.9))
            rec.mc_estimate = exact_return(mdp, table)
            records.append(rec)
        assert correlation_report(records).pearson_r >= 0.7
