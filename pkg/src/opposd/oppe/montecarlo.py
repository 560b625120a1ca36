"""
opposd.oppe.montecarlo — On-policy Monte-Carlo ground truth.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from opposd.mdp.env import Env, Policy, rollout_returns

logger = logging.getLogger(__name__)


@dataclass
class MonteCarloResult:
    mean: float
    std: float
    n_episodes: int
    single_episode: bool = False


def onpolicy_mc_eval(
    policy: Policy,
    env: Env,
    n_episodes: int,
    rng: np.random.Generator,
    gamma: float | None = None,
) -> MonteCarloResult:
    """Mean and population std of episode returns under ``policy``.

    With one episode the std is reported as 0 and ``single_episode`` is set.
    """
    if n_episodes < 1:
        raise ValueError(f"n_episodes must be >= 1, got {n_episodes}")
    returns = rollout_returns(env, policy, n_episodes, rng, gamma=gamma)
    if n_episodes == 1:
        logger.debug("Monte-Carlo evaluation with a single episode; std reported as 0")
        return MonteCarloResult(float(returns[0]), 0.0, 1, single_episode=True)
    return MonteCarloResult(float(returns.mean()), float(returns.std()), n_episodes)
