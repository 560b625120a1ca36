"""
opposd.oppe.estimator — Ratio-based off-policy evaluation.

Self-normalized estimate over every logged step, steps weighted by
omega_t = gamma^t / sum_u gamma^u:

    R^ = sum omega w(s) rho(s, a) r / sum omega w(s) rho(s, a) * sum_{t<H} gamma^t

With pi = mu and w = 1 this is the mean (discounted) return of the data.
"""

from __future__ import annotations

import numpy as np

from opposd.data.dataset import Dataset
from opposd.data.propensity import importance_ratios
from opposd.errors import OpposdError
from opposd.mdp.env import Policy
from opposd.mdp.tabular import discount_mass
from opposd.ratio.model import RatioModel
from opposd.ratio.oracle import TabularRatio

NORMALIZER_FLOOR = 1e-8


class UnreliableEstimateError(OpposdError):
    """The importance weights carry (almost) no mass on the data."""
    pass


def oppe_estimate(
    policy: Policy,
    dataset: Dataset,
    ratio: RatioModel | TabularRatio | None,
    gamma: float,
) -> float:
    """Estimated episodic return of ``policy``; ``ratio=None`` means w = 1."""
    steps = dataset.all_steps()
    mass = discount_mass(gamma, dataset.horizon)
    omega = gamma ** steps.timesteps.astype(np.float64) / mass
    w = np.ones(len(steps)) if ratio is None else ratio.predict(steps.states)
    rho = importance_ratios(policy, steps)
    weights = omega * w * rho
    normalizer = weights.sum() / dataset.n_trajectories
    if not normalizer >= NORMALIZER_FLOOR:
        raise UnreliableEstimateError(
            f"Importance-weight normalizer {normalizer:.3e} is below {NORMALIZER_FLOOR:g}; "
            f"the policy has no overlap with the logged actions"
        )
    mean_reward = float(weights @ steps.rewards / weights.sum())
    return mean_reward * mass
