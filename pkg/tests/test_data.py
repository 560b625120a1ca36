"""
tests/test_data.py — Logged dataset tests.

Collection, epsilon-smoothing, samplers, propensities, normalization,
the JSON-lines dataset format.
"""

import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from opposd.data import (
    Dataset, DatasetError, DatasetParseError, DiscountedSampler,
    UnsupportedVersionError, collect_dataset, compute_normalization,
    epsilon_smooth, importance_ratios, load_dataset, sample_minibatch_dgamma,
    save_dataset, target_probs, uniform_sampler,
)
from opposd.data.dataset import empty_steps
from opposd.data.io import dumps_dataset, loads_dataset
from opposd.mdp import CartPoleEnv, HardExample, TabularEnv, TabularPolicy, UniformPolicy
from opposd.mdp.hard_example import alpha_policy


class AlwaysLeft:
    n_actions = 2

    def action_probs(self, states):
        states = np.atleast_2d(states)
        return np.tile([1.0, 0.0], (states.shape[0], 1))


def _hard_env():
    ex = HardExample()
    return TabularEnv(ex.mdp, name="hard_example", behavior=ex.behavior)


def _hard_dataset(n=200, seed=0, behavior=None):
    env = _hard_env()
    behavior = behavior or UniformPolicy(2)
    return collect_dataset(env, behavior, n, env.horizon, np.random.default_rng(seed))


# ─────────────────────────────────────────────
# COLLECTION
# ─────────────────────────────────────────────
class TestCollect:
    def test_shapes(self):
        ds = _hard_dataset(n=10)
        assert ds.states.shape == (10, 4, 6)
        assert ds.n_trajectories == 10
        assert ds.horizon == 4
        assert ds.n_actions == 2
        assert ds.sentinel_ok

    def test_episodes_end_then_pad(self):
        ds = _hard_dataset(n=50)
        # s0 -> s1/s2 -> s3/s4 -> T: the third step terminates
        assert ds.terminal[:, 2].all()
        assert ds.padded[:, 3].all()
        assert not ds.padded[:, :3].any()
        assert np.all(ds.rewards[:, 3] == 0.0)
        np.testing.assert_array_equal(ds.states[:, 3], ds.next_states[:, 2])

    def test_behavior_probs_logged(self):
        ds = _hard_dataset(n=20)
        assert np.all(ds.behavior_probs == 0.5)
        assert ds.in_support.all()

    def test_mean_return_matches_behavior_value(self):
        ds = _hard_dataset(n=4000, seed=1)
        assert ds.episode_returns().mean() == pytest.approx(0.5, abs=0.03)

    def test_same_seed_same_dataset(self):
        a = _hard_dataset(n=30, seed=7)
        b = _hard_dataset(n=30, seed=7)
        np.testing.assert_array_equal(a.actions, b.actions)
        np.testing.assert_array_equal(a.states, b.states)

    def test_empty_rejected(self):
        with pytest.raises(DatasetError, match="empty"):
            collect_dataset(_hard_env(), UniformPolicy(2), 0, 4, np.random.default_rng(0))

    def test_cartpole_rewards_until_fall(self):
        env = CartPoleEnv(horizon=30)
        ds = collect_dataset(env, UniformPolicy(2), 20, 30, np.random.default_rng(2))
        returns = ds.episode_returns()
        lengths = 30 - ds.padded.sum(axis=1)
        np.testing.assert_array_equal(returns, lengths)


class TestDataset:
    def test_zero_propensity_rejected(self):
        steps = empty_steps(2, 3, 4)
        steps["behavior_probs"][0, 1] = 0.0
        with pytest.raises(DatasetError, match="positive behavior probability"):
            Dataset(**steps, n_actions=2)

    def test_field_shape_checked(self):
        steps = empty_steps(2, 3, 4)
        steps["rewards"] = np.zeros((2, 4))
        with pytest.raises(DatasetError, match="rewards must have shape"):
            Dataset(**steps, n_actions=2)

    def test_select_and_trajectory(self):
        ds = _hard_dataset(n=10)
        sub = ds.select(np.array([3, 5]))
        assert sub.n_trajectories == 2
        np.testing.assert_array_equal(sub.actions[1], ds.actions[5])
        traj = ds.trajectory(0)
        assert len(traj) == 4
        assert traj[0].timestep == 0
        assert traj[0].behavior_prob == 0.5

    def test_all_steps_is_trajectory_major(self):
        ds = _hard_dataset(n=3)
        steps = ds.all_steps()
        assert len(steps) == 12
        assert steps.traj_index.tolist()[:5] == [0, 0, 0, 0, 1]
        assert steps.timesteps.tolist()[:5] == [0, 1, 2, 3, 0]

    def test_normalization_skips_absorbing_rows(self):
        steps = empty_steps(1, 3, 2)
        steps["states"][0] = [[1.0, 2.0], [3.0, 2.0], [0.0, 0.0]]
        steps["absorbing"][0, 2] = True
        stats = compute_normalization(Dataset(**steps, n_actions=2))
        assert stats.mean.tolist() == [2.0, 2.0]
        # zero spread is floored
        assert stats.std[1] == pytest.approx(1e-6)
        assert stats.apply(np.array([[3.0, 2.0]]))[0, 0] == pytest.approx(1.0)


# ─────────────────────────────────────────────
# SMOOTHING
# ─────────────────────────────────────────────
class TestSmoothing:
    def _smoothed(self, eps=0.2, n=3000, seed=0):
        behavior = TabularPolicy(alpha_policy(1.0))  # never plays r
        ds = _hard_dataset(n=n, seed=seed, behavior=behavior)
        return ds, epsilon_smooth(ds, behavior, eps, np.random.default_rng(seed + 1))

    def test_zero_epsilon_is_a_copy(self):
        ds = _hard_dataset(n=10)
        out = epsilon_smooth(ds, UniformPolicy(2), 0.0, np.random.default_rng(0))
        np.testing.assert_array_equal(out.actions, ds.actions)
        assert out is not ds

    def test_injection_rate(self):
        _, out = self._smoothed()
        injected = out.next_absorbing[:, 0]
        assert injected.mean() == pytest.approx(0.2, abs=0.03)

    def test_propensities(self):
        _, out = self._smoothed()
        kept = out.in_support[:, 0]
        np.testing.assert_allclose(out.behavior_probs[kept, 0], 0.8)
        # one unsupported action: eps / 1
        np.testing.assert_allclose(out.behavior_probs[~kept, 0], 0.2)
        assert np.all(out.actions[~kept, 0] == 1)
        assert np.all(out.rewards[~kept, 0] == 0.0)

    def test_absorbing_is_sticky(self):
        _, out = self._smoothed()
        rows = out.next_absorbing[:, 0]
        assert out.absorbing[rows, 1:].all()
        assert np.all(out.states[rows, 1:] == 0.0)
        assert np.all(out.rewards[rows, 1:] == 0.0)
        assert np.all(out.behavior_probs[rows, 1:] == 0.5)

    def test_full_support_untouched(self):
        ds = _hard_dataset(n=50)
        out = epsilon_smooth(ds, UniformPolicy(2), 0.3, np.random.default_rng(0))
        np.testing.assert_array_equal(out.behavior_probs, ds.behavior_probs)
        assert not out.absorbing.any()
        assert out.smoothing_epsilon == 0.3

    def test_no_sentinel_rejected(self):
        env = CartPoleEnv(horizon=10)
        ds = collect_dataset(env, AlwaysLeft(), 5, 10, np.random.default_rng(0))
        with pytest.raises(DatasetError, match="sentinel"):
            epsilon_smooth(ds, AlwaysLeft(), 0.1, np.random.default_rng(0))

    def test_epsilon_range(self):
        with pytest.raises(DatasetError, match="epsilon"):
            epsilon_smooth(_hard_dataset(n=2), UniformPolicy(2), 1.0, np.random.default_rng(0))


class TestPropensity:
    def test_ratio_of_probabilities(self):
        ds = _hard_dataset(n=20)
        steps = ds.all_steps()
        pi = TabularPolicy(alpha_policy(1.0))
        rho = importance_ratios(pi, steps)
        expected = target_probs(pi, steps) / 0.5
        np.testing.assert_allclose(rho, expected)
        assert set(np.unique(rho)) <= {0.0, 2.0}

    def test_absorbing_rows_have_unit_ratio(self):
        behavior = TabularPolicy(alpha_policy(1.0))
        ds = _hard_dataset(n=500, behavior=behavior)
        out = epsilon_smooth(ds, behavior, 0.5, np.random.default_rng(3))
        steps = out.all_steps()
        rho = importance_ratios(TabularPolicy(alpha_policy(0.0)), steps)
        assert np.all(rho[steps.absorbing] == 1.0)


# ─────────────────────────────────────────────
# SAMPLERS
# ─────────────────────────────────────────────
class TestSampler:
    def test_discounted_weights(self):
        sampler = DiscountedSampler(gamma=0.5, horizon=4)
        np.testing.assert_allclose(sampler.weights, np.array([8, 4, 2, 1]) / 15)

    def test_discounted_frequencies(self):
        sampler = DiscountedSampler(gamma=0.5, horizon=4)
        steps = sampler.sample_steps(30000, np.random.default_rng(0))
        freq = np.bincount(steps, minlength=4) / len(steps)
        np.testing.assert_allclose(freq, sampler.weights, atol=0.01)

    def test_uniform_sampler(self):
        sampler = uniform_sampler(5)
        np.testing.assert_allclose(sampler.weights, 0.2)

    def test_gamma_range(self):
        with pytest.raises(DatasetError, match="gamma"):
            DiscountedSampler(gamma=1.5, horizon=3)

    def test_minibatch(self):
        ds = _hard_dataset(n=20)
        batch = sample_minibatch_dgamma(ds, uniform_sampler(4), 64, np.random.default_rng(0))
        assert len(batch) == 64
        np.testing.assert_array_equal(batch.states, ds.states[batch.traj_index, batch.timesteps])
        np.testing.assert_array_equal(batch.initial_states, ds.states[batch.traj_index, 0])

    def test_minibatch_horizon_mismatch(self):
        with pytest.raises(DatasetError, match="does not match"):
            sample_minibatch_dgamma(_hard_dataset(n=5), uniform_sampler(7), 4,
                                    np.random.default_rng(0))


# ─────────────────────────────────────────────
# FILE FORMAT
# ─────────────────────────────────────────────
class TestDatasetFile:
    def test_save_and_load(self, tmp_path):
        ds = _hard_dataset(n=15)
        save_dataset(ds, tmp_path / "d.jsonl")
        loaded = load_dataset(tmp_path / "d.jsonl")
        np.testing.assert_array_equal(loaded.states, ds.states)
        np.testing.assert_array_equal(loaded.padded, ds.padded)
        assert loaded.actions.dtype == ds.actions.dtype
        assert loaded.sentinel_ok
        assert loaded.meta == {"env": "hard_example"}

    def test_header_first(self):
        header = json.loads(dumps_dataset(_hard_dataset(n=2)).splitlines()[0])
        assert header["format"] == "opposd-dataset"
        assert header["n_trajectories"] == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="not found"):
            load_dataset(tmp_path / "none.jsonl")

    def test_newer_major_version(self):
        lines = dumps_dataset(_hard_dataset(n=2)).splitlines()
        header = json.loads(lines[0])
        header["version"] = "2.0.0"
        lines[0] = json.dumps(header)
        with pytest.raises(UnsupportedVersionError):
            loads_dataset("\n".join(lines))

    def test_truncated(self):
        lines = dumps_dataset(_hard_dataset(n=3)).splitlines()
        with pytest.raises(DatasetParseError, match="truncated"):
            loads_dataset("\n".join(lines[:2]))

    def test_bad_json_reports_line(self):
        lines = dumps_dataset(_hard_dataset(n=3)).splitlines()
        lines[2] = "{not json"
        with pytest.raises(DatasetParseError) as exc:
            loads_dataset("\n".join(lines))
        assert exc.value.line == 3

    def test_missing_field(self):
        lines = dumps_dataset(_hard_dataset(n=1)).splitlines()
        record = json.loads(lines[1])
        del record["rewards"]
        lines[1] = json.dumps(record)
        with pytest.raises(DatasetParseError, match="missing field 'rewards'"):
            loads_dataset("\n".join(lines))

    def test_not_a_dataset(self):
        with pytest.raises(DatasetParseError, match="not an opposd-dataset"):
            loads_dataset('{"format": "other"}\n')

    def test_invalid_utf8_reports_line(self, tmp_path):
        lines = dumps_dataset(_hard_dataset(n=3)).encode("utf-8").splitlines(keepends=True)
        lines[2] = b'{"states": "\xff\xfe"}\n'
        path = tmp_path / "d.jsonl"
        path.write_bytes(b"".join(lines))
        with pytest.raises(DatasetParseError, match="invalid UTF-8") as exc:
            load_dataset(path)
        assert exc.value.line == 3
        assert exc.value.offset == 12
