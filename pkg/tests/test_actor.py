"""
tests/test_actor.py — Actor tests.

Softmax actor with feature projections, the corrected policy gradient,
Off-PAC, behavior cloning.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from opposd.actor import (
    ActorModel, actor_gradient, behavior_clone, cloning_loss,
    load_actor_model, offpac_actor_gradient, save_actor_model,
)
from opposd.data import DatasetError, collect_dataset, importance_ratios
from opposd.errors import NumericError
from opposd.mdp import (
    HardExample, PolicyTable, TabularEnv, TabularPolicy, TabularSoftmaxFamily, UniformPolicy,
    exact_policy_gradient, exact_value,
)
from opposd.mdp.hard_example import S0, S1, S2, aliased_features, alpha_policy
from opposd.nn import adam_step, entropy_of_policy, gradient_check
from opposd.ratio import TabularRatio, exact_ratio_tabular


class ConstantRatio:
    def __init__(self, value):
        self.value = value

    def predict(self, states):
        return np.full(np.atleast_2d(states).shape[0], self.value)


class ScaledRatio:
    """w(s) = 1 + first coordinate."""

    def predict(self, states):
        return 1.0 + np.atleast_2d(states)[:, 0]


def _hard_dataset(n=200, seed=0, behavior=None):
    ex = HardExample()
    env = TabularEnv(ex.mdp, name="hard_example", behavior=ex.behavior)
    behavior = behavior or UniformPolicy(2)
    return collect_dataset(env, behavior, n, env.horizon, np.random.default_rng(seed))


def _actor(hidden=(8,), seed=0, projection=None):
    return ActorModel.create(6, 2, list(hidden), np.random.default_rng(seed),
                             learning_rate=0.05, projection=projection)


# ─────────────────────────────────────────────
# MODEL
# ─────────────────────────────────────────────
class TestActorModel:
    def test_probabilities(self):
        actor = _actor()
        probs = actor.action_probs(np.eye(6))
        assert probs.shape == (6, 2)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0)
        np.testing.assert_allclose(np.exp(actor.log_probs(np.eye(6))), probs)

    def test_projection_aliases_states(self):
        actor = _actor(hidden=(), seed=1, projection=aliased_features())
        probs = actor.action_probs(np.eye(6))
        np.testing.assert_allclose(probs[S1], probs[S2])
        assert actor.params.layer_sizes == [4, 2]

    def test_save_and_load_keeps_projection(self, tmp_path):
        actor = _actor(hidden=(), projection=aliased_features())
        save_actor_model(actor, tmp_path / "actor")
        loaded = load_actor_model(tmp_path / "actor")
        np.testing.assert_array_equal(loaded.projection, aliased_features())
        np.testing.assert_allclose(loaded.action_probs(np.eye(6)), actor.action_probs(np.eye(6)))

    def test_save_without_projection(self, tmp_path):
        actor = _actor()
        save_actor_model(actor, tmp_path / "actor")
        assert load_actor_model(tmp_path / "actor").projection is None


# ─────────────────────────────────────────────
# GRADIENT
# ─────────────────────────────────────────────
class TestActorGradient:
    def _inputs(self, seed=0):
        rng = np.random.default_rng(seed)
        batch = _hard_dataset(n=20, seed=seed).all_steps()
        q = rng.normal(size=len(batch))
        rho = rng.uniform(0.2, 2.0, size=len(batch))
        return batch, q, rho

    def test_matches_finite_differences(self):
        batch, q, rho = self._inputs()
        actor = _actor()
        ratio = ScaledRatio()
        z_w = float(np.mean(ratio.predict(batch.states)))

        def loss_fn(_):
            step = actor_gradient(actor, batch, ratio, q, rho, 0.1, z_w=z_w)
            return -step.objective, step.grads

        report = gradient_check(actor.params, loss_fn)
        assert report.passed, report

    def test_ratio_scale_cancels(self):
        batch, q, rho = self._inputs(1)
        actor = _actor()
        small = actor_gradient(actor, batch, ConstantRatio(0.5), q, rho, 0.0)
        large = actor_gradient(actor, batch, ConstantRatio(40.0), q, rho, 0.0)
        for a, b in zip(small.grads, large.grads):
            np.testing.assert_allclose(a, b)
        assert large.z_w == 40.0

    def test_offpac_is_unit_ratio(self):
        batch, q, rho = self._inputs(2)
        actor = _actor()
        offpac = offpac_actor_gradient(actor, batch, q, rho, 0.05)
        corrected = actor_gradient(actor, batch, ConstantRatio(1.0), q, rho, 0.05)
        for a, b in zip(offpac.grads, corrected.grads):
            np.testing.assert_allclose(a, b)
        assert offpac.objective == pytest.approx(corrected.objective)

    def test_non_positive_normalizer(self):
        batch, q, rho = self._inputs()
        with pytest.raises(NumericError, match="z_w"):
            actor_gradient(_actor(), batch, ConstantRatio(0.0), q, rho, 0.0)

    def test_ascent_on_positive_q(self):
        # Q > 0 only for action l at s0: an Adam step raises pi(l|s0)
        batch = _hard_dataset(n=100).all_steps()
        q = np.where((batch.timesteps == 0) & (batch.actions == 0), 1.0, 0.0)
        actor = _actor(hidden=())
        before = actor.action_probs(np.eye(6)[[S0]])[0, 0]
        step = offpac_actor_gradient(actor, batch, q, np.ones(len(batch)), 0.0)
        adam_step(actor.optimizer, actor.params, step.grads)
        assert actor.action_probs(np.eye(6)[[S0]])[0, 0] > before

    def test_entropy_bonus_raises_entropy(self):
        batch = _hard_dataset(n=50).all_steps()
        actor = _actor(hidden=(), seed=3)
        actor.params.biases[0][:] = [[2.0, -2.0]]
        before = entropy_of_policy(actor.action_probs(batch.states))[0].mean()
        for _ in range(5):
            step = offpac_actor_gradient(actor, batch, np.zeros(len(batch)),
                                         np.ones(len(batch)), 1.0)
            adam_step(actor.optimizer, actor.params, step.grads)
        after = entropy_of_policy(actor.action_probs(batch.states))[0].mean()
        assert after > before
        assert step.entropy > 0.0


class TestExactAgreement:
    """Sample gradients built from the exact ratio and exact Q."""

    @staticmethod
    def _exact_inputs(actor, n, seed):
        ex = HardExample()
        batch = _hard_dataset(n=n, seed=seed).all_steps()
        pi = PolicyTable(actor.action_probs(np.eye(6)))
        _, q_table = exact_value(ex.mdp, pi)
        q = q_table[np.argmax(batch.states, axis=1), batch.actions]
        rho = importance_ratios(actor, batch)
        ratio = TabularRatio(exact_ratio_tabular(ex.mdp, pi, ex.behavior))
        return ex, batch, q, rho, ratio

    def test_corrected_gradient_points_along_true_gradient(self):
        actor = _actor(hidden=(), seed=5)
        ex, batch, q, rho, ratio = self._exact_inputs(actor, 20000, 9)
        step = actor_gradient(actor, batch, ratio, q, rho, 0.0)
        estimated = -step.grads[0].ravel()

        # one-hot inputs: logits are W[s] + b, the tabular softmax parameters
        theta = (actor.params.weights[0] + actor.params.biases[0]).ravel()
        exact = exact_policy_gradient(ex.mdp, TabularSoftmaxFamily(6, 2), theta)
        cosine = estimated @ exact / (np.linalg.norm(estimated) * np.linalg.norm(exact))
        assert cosine >= 0.95
        assert np.linalg.norm(estimated) == pytest.approx(np.linalg.norm(exact), rel=0.2)

    def test_offpac_misses_the_aliased_improvement(self):
        actor = _actor(hidden=(), seed=6, projection=aliased_features())
        actor.params.weights[0][:] = 0.0
        actor.params.weights[0][0] = [3.0, -3.0]  # s0 goes left
        actor.params.biases[0][:] = 0.0
        _, batch, q, rho, ratio = self._exact_inputs(actor, 20000, 10)

        def aliased_ascent(step):
            # raises pi(l) at the aliased pair s1/s2
            g = step.grads[0]
            return -(g[1, 0] - g[1, 1])

        corrected = actor_gradient(actor, batch, ratio, q, rho, 0.0)
        offpac = offpac_actor_gradient(actor, batch, q, rho, 0.0)
        assert abs(aliased_ascent(offpac)) < 0.01
        assert aliased_ascent(corrected) > 0.03


# ─────────────────────────────────────────────
# BEHAVIOR CLONING
# ─────────────────────────────────────────────
class TestCloning:
    def test_loss_gradient(self):
        ds = _hard_dataset(n=20)
        actor = _actor()
        states, actions = ds.states[:, 0], ds.actions[:, 0]
        report = gradient_check(actor.params, lambda p: cloning_loss(actor, states, actions))
        assert report.passed, report

    def test_clones_deterministic_behavior(self):
        behavior = TabularPolicy(alpha_policy(1.0))
        ds = _hard_dataset(n=100, behavior=behavior)
        actor = _actor(hidden=())
        first = cloning_loss(actor, ds.states[:, 0], ds.actions[:, 0])[0]
        last = behavior_clone(actor, ds, 200, 64, np.random.default_rng(0))
        assert last < first
        assert actor.action_probs(np.eye(6)[[S0]])[0, 0] > 0.9

    def test_needs_logged_steps(self):
        ds = _hard_dataset(n=5)
        ds.in_support[:] = False
        with pytest.raises(DatasetError, match="No logged behavior steps"):
            behavior_clone(_actor(), ds, 10, 4, np.random.default_rng(0))
