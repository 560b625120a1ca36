"""
opposd.data.collect — Logging trajectories under a behavior policy.

All ``n`` episodes run in lock-step from one rng. An episode that ends
before the horizon is padded: the final state repeats, actions keep being
sampled from the behavior policy and rewards are 0.
"""

from __future__ import annotations

import logging

import numpy as np

from opposd.data.dataset import Dataset, DatasetError, empty_steps
from opposd.mdp.env import Env, Policy, sample_actions

logger = logging.getLogger(__name__)


def collect_dataset(
    env: Env,
    behavior: Policy,
    n_trajectories: int,
    horizon: int,
    rng: np.random.Generator,
) -> Dataset:
    if n_trajectories < 1:
        raise DatasetError(f"Cannot collect an empty dataset (n_trajectories={n_trajectories})")
    if horizon < 1:
        raise DatasetError(f"horizon must be >= 1, got {horizon}")

    steps = empty_steps(n_trajectories, horizon, env.state_dim)
    states = env.reset(n_trajectories, rng)
    alive = np.ones(n_trajectories, dtype=bool)

    for t in range(horizon):
        probs = behavior.action_probs(states)
        actions = sample_actions(probs, rng)
        next_states = states.copy()
        rewards = np.zeros(n_trajectories)
        done = np.zeros(n_trajectories, dtype=bool)
        if np.any(alive):
            nxt, rew, dn = env.step(states[alive], actions[alive], rng)
            next_states[alive] = nxt
            rewards[alive] = rew
            done[alive] = dn

        steps["states"][:, t] = states
        steps["actions"][:, t] = actions
        steps["rewards"][:, t] = rewards
        steps["next_states"][:, t] = next_states
        steps["behavior_probs"][:, t] = probs[np.arange(n_trajectories), actions]
        steps["terminal"][:, t] = done
        steps["padded"][:, t] = ~alive

        alive &= ~done
        states = next_states

    steps["in_support"][:] = True
    lengths = horizon - steps["padded"].sum(axis=1)
    logger.info(
        "Collected %d trajectories from %s (mean length %.1f, mean return %.3f)",
        n_trajectories, getattr(env, "name", "env"), lengths.mean(),
        steps["rewards"].sum(axis=1).mean(),
    )
    return Dataset(
        **steps,
        n_actions=env.n_actions,
        sentinel_ok=bool(getattr(env, "sentinel_ok", False)),
        meta={"env": getattr(env, "name", "env")},
    )
