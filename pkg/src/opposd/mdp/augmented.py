"""
opposd.mdp.augmented — The behavior-support MDP.

Given an MDP M and behavior policy mu, the augmented MDP M_mu keeps every
state-action pair in the support

    SA_mu = {(s, a) : d^mu(s) > tol and mu(a|s) > tol}

unchanged and sends every other pair to a new absorbing zero-reward state
s_abs (index S). s_abs self-loops under every action and p0(s_abs) = 0.
Policies on M extend to M_mu by acting uniformly at s_abs.
"""

from __future__ import annotations

import numpy as np

from opposd.mdp.tabular import MdpError, PolicyTable, TabularMdp, exact_occupancy

SUPPORT_TOL = 1e-12


def support_set(
    mdp: TabularMdp,
    behavior: PolicyTable,
    tol: float = SUPPORT_TOL,
) -> np.ndarray:
    """Boolean (S, A) mask of SA_mu."""
    d_mu = exact_occupancy(mdp, behavior)
    return (d_mu[:, None] > tol) & (behavior.probs > tol)


def build_augmented_mdp(
    mdp: TabularMdp,
    behavior: PolicyTable,
    tol: float = SUPPORT_TOL,
) -> TabularMdp:
    """M_mu with S + 1 states; the last one is s_abs."""
    support = support_set(mdp, behavior, tol)
    if not np.any(support):
        raise MdpError("Behavior support is empty; cannot build the augmented MDP")
    s, a = mdp.n_states, mdp.n_actions
    abs_idx = s

    transition = np.zeros((s + 1, a, s + 1))
    transition[:s, :, :s] = mdp.transition
    reward = np.zeros((s + 1, a))
    reward[:s] = mdp.reward

    outside = ~support
    transition[:s][outside] = 0.0
    transition[:s][outside, abs_idx] = 1.0
    reward[:s][outside] = 0.0
    transition[abs_idx, :, abs_idx] = 1.0

    p0 = np.append(mdp.initial_dist, 0.0)
    return TabularMdp(
        transition, reward, mdp.gamma, p0, horizon=mdp.horizon,
        meta={"absorbing_index": abs_idx, "support": support},
    )


def extend_policy(policy: PolicyTable) -> PolicyTable:
    """Append a uniform row for s_abs."""
    n_actions = policy.n_actions
    row = np.full((1, n_actions), 1.0 / n_actions)
    return PolicyTable(np.vstack([policy.probs, row]))
