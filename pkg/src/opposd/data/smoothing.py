"""
opposd.data.smoothing — Epsilon-smoothing of a logged dataset.

At every logged state where mu gives zero probability to k > 0 actions:

  - with probability 1 - eps the step is kept and its propensity becomes
    (1 - eps) mu(a|s)
  - with probability eps the action is replaced by a uniform draw over the
    k unsupported actions (propensity eps / k), the step leads to s_abs with
    reward 0, and every later step of the trajectory becomes an s_abs
    self-loop

so the result is a sample from mu~ = (1 - eps) mu + eps U on the augmented
MDP. States where mu has full support are untouched.
"""

from __future__ import annotations

import logging

import numpy as np

from opposd.data.dataset import Dataset, DatasetError
from opposd.mdp.env import Policy

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.05


def epsilon_smooth(
    dataset: Dataset,
    behavior: Policy,
    epsilon: float,
    rng: np.random.Generator,
) -> Dataset:
    if not 0.0 <= epsilon < 1.0:
        raise DatasetError(f"epsilon must be in [0, 1), got {epsilon}")
    out = dataset.copy()
    out.smoothing_epsilon = float(epsilon)
    if epsilon == 0.0:
        return out

    n, horizon = dataset.n_trajectories, dataset.horizon
    n_actions = dataset.n_actions

    zero_actions = np.stack(
        [behavior.action_probs(dataset.states[:, t]) <= 0.0 for t in range(horizon)],
        axis=1,
    )
    if np.any(zero_actions) and not dataset.sentinel_ok:
        raise DatasetError(
            "Behavior policy has unsupported actions but the environment has no "
            "absorbing sentinel state; epsilon-smoothing is not representable"
        )

    absorbed = np.zeros(n, dtype=bool)
    n_injected = 0
    for t in range(horizon):
        # s_abs self-loops after an injection
        if np.any(absorbed):
            out.states[absorbed, t] = 0.0
            out.next_states[absorbed, t] = 0.0
            out.actions[absorbed, t] = rng.integers(n_actions, size=int(absorbed.sum()))
            out.rewards[absorbed, t] = 0.0
            out.behavior_probs[absorbed, t] = 1.0 / n_actions
            out.absorbing[absorbed, t] = True
            out.next_absorbing[absorbed, t] = True
            out.in_support[absorbed, t] = False
            out.terminal[absorbed, t] = False
            out.padded[absorbed, t] = False

        zero = zero_actions[:, t]
        k = zero.sum(axis=1)
        eligible = ~absorbed & (k > 0)
        u = rng.uniform(size=n)
        inject = eligible & (u < epsilon)
        keep = eligible & ~inject

        out.behavior_probs[keep, t] *= 1.0 - epsilon

        if np.any(inject):
            # uniform pick among the zero-probability actions
            scores = np.where(zero[inject], rng.uniform(size=(int(inject.sum()), n_actions)), -1.0)
            out.actions[inject, t] = np.argmax(scores, axis=1)
            out.behavior_probs[inject, t] = epsilon / k[inject]
            out.next_states[inject, t] = 0.0
            out.rewards[inject, t] = 0.0
            out.next_absorbing[inject, t] = True
            out.in_support[inject, t] = False
            out.terminal[inject, t] = False
            n_injected += int(inject.sum())
        absorbed |= inject

    logger.info("Epsilon-smoothing (eps=%g) rerouted %d of %d trajectories to s_abs",
                epsilon, n_injected, n)
    return out
