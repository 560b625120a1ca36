"""
opposd.critic.returns — Off-policy lambda-returns.

Backward recursion along each trajectory, with R_H = 0:

    R_t = r_t + (1 - m_t) [ (1 - lam) gamma V(s'_t) + lam gamma c(rho_{t+1}) R_{t+1} ]

m_t cuts the bootstrap when the episode ends at t, at the horizon, when
the step is padding, or when s'_t is s_abs. c clips each ratio at
``rho_clip``. Padded and absorbing steps get R_t = 0. The bootstrap values
come from a frozen critic; no gradient flows through them.
"""

from __future__ import annotations

import numpy as np

from opposd.data.dataset import Dataset
from opposd.data.propensity import importance_ratios
from opposd.mdp.env import Policy
from opposd.utils import ensure_finite

RHO_CLIP = 10.0


def lambda_returns(
    rewards: np.ndarray,
    next_values: np.ndarray,
    rho: np.ndarray,
    lam: float,
    gamma: float,
    mask: np.ndarray | None = None,
    rho_clip: float = RHO_CLIP,
) -> np.ndarray:
    """R^lambda for (n, H) arrays (a single trajectory may be 1-D).

    Args:
        rewards: r_t
        next_values: frozen V(s'_t)
        rho: pi(a_t|s_t) / mu~(a_t|s_t) of the logged actions
        lam: lambda in [0, 1]
        gamma: discount
        mask: True where the bootstrap is cut (the last step always is)
    """
    single = np.ndim(rewards) == 1
    r = np.atleast_2d(np.asarray(rewards, dtype=np.float64))
    v = np.atleast_2d(np.asarray(next_values, dtype=np.float64))
    p = np.atleast_2d(np.asarray(rho, dtype=np.float64))
    ensure_finite("importance ratio", p)
    n, horizon = r.shape
    cut = np.zeros((n, horizon), dtype=bool) if mask is None else np.atleast_2d(mask).copy()
    cut[:, -1] = True
    clipped = np.minimum(p, rho_clip)

    out = np.zeros((n, horizon))
    following = np.zeros(n)
    for t in range(horizon - 1, -1, -1):
        rho_next = clipped[:, t + 1] if t + 1 < horizon else np.zeros(n)
        tail = (1.0 - lam) * gamma * v[:, t] + lam * gamma * rho_next * following
        out[:, t] = r[:, t] + np.where(cut[:, t], 0.0, tail)
        following = out[:, t]
    return out[0] if single else out


def dataset_lambda_returns(
    dataset: Dataset,
    value_fn,
    policy: Policy | None,
    lam: float,
    gamma: float,
) -> np.ndarray:
    """(n, H) lambda-returns over a whole dataset.

    ``value_fn`` maps a (B, state_dim) array to (B,) values. With
    ``policy=None`` every ratio is 1 (on-policy regression).
    """
    n, horizon = dataset.n_trajectories, dataset.horizon
    flat_next = dataset.next_states.reshape(n * horizon, -1)
    next_values = np.asarray(value_fn(flat_next)).reshape(n, horizon)
    if policy is None:
        rho = np.ones((n, horizon))
    else:
        rho = importance_ratios(policy, dataset.all_steps()).reshape(n, horizon)
    mask = dataset.terminal | dataset.padded | dataset.next_absorbing | dataset.absorbing
    returns = lambda_returns(dataset.rewards, next_values, rho, lam, gamma, mask)
    return np.where(dataset.padded | dataset.absorbing, 0.0, returns)


def masked_q(lambda_return: np.ndarray, in_support: np.ndarray) -> np.ndarray:
    """R^lambda on logged (s, a) in the behavior support, 0 elsewhere."""
    return np.where(in_support, lambda_return, 0.0)
