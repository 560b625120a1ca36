"""
opposd.data.propensity — Target probabilities and importance ratios.

rho(s, a) = pi(a|s) / mu~(a|s). Every policy acts uniformly at s_abs, so
absorbing rows always have rho = 1.
"""

from __future__ import annotations

import numpy as np

from opposd.data.dataset import TransitionBatch
from opposd.mdp.env import Policy
from opposd.utils import ensure_finite


def target_probs(policy: Policy, batch: TransitionBatch) -> np.ndarray:
    """pi(a_i | s_i) for each row."""
    probs = policy.action_probs(batch.states)
    out = probs[np.arange(len(batch)), batch.actions]
    return np.where(batch.absorbing, 1.0 / probs.shape[1], out)


def importance_ratios(policy: Policy, batch: TransitionBatch) -> np.ndarray:
    rho = target_probs(policy, batch) / batch.behavior_probs
    rho = np.where(batch.absorbing, 1.0, rho)
    ensure_finite("importance ratio", rho)
    return rho
