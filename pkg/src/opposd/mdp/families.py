"""
opposd.mdp.families — Differentiable policy families over tabular MDPs,
and exact policy gradients.

A family maps a flat parameter vector theta to a PolicyTable and exposes
the Jacobian d pi[s][a] / d theta as an (S, A, P) array.

    exact_policy_gradient   sum_s d^pi(s) sum_a grad pi(a|s) Q^pi(s, a)
    offpac_gradient_exact   same, with d^pi replaced by the behavior
                            occupancy d^mu

Both are gradients of the *normalized* return (divided by the discount
mass), since the occupancy they use is normalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from opposd.mdp.tabular import (
    MdpError, PolicyTable, TabularMdp, discount_mass, exact_occupancy, exact_value,
)
from opposd.nn.functional import softmax


class PolicyFamily(Protocol):
    n_params: int

    def policy(self, theta: np.ndarray) -> PolicyTable: ...

    def jacobian(self, theta: np.ndarray) -> np.ndarray: ...


@dataclass
class FeatureSoftmaxFamily:
    """pi(a|s) = softmax_a(phi(s) @ Theta), Theta of shape (F, A).

    States that share a feature row share their action distribution.
    """
    features: np.ndarray
    n_actions: int

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise MdpError(f"features must be (S, F), got {self.features.shape}")

    @property
    def n_params(self) -> int:
        return self.features.shape[1] * self.n_actions

    def _probs(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.n_params,):
            raise MdpError(f"theta must have {self.n_params} entries, got {theta.shape}")
        logits = self.features @ theta.reshape(self.features.shape[1], self.n_actions)
        return softmax(logits)

    def policy(self, theta: np.ndarray) -> PolicyTable:
        return PolicyTable(self._probs(theta))

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        p = self._probs(theta)
        # d pi_sa / d logit_sb = pi_sa (delta_ab - pi_sb)
        dlogit = p[:, :, None] * (np.eye(self.n_actions)[None, :, :] - p[:, None, :])
        # logit_sb = sum_f phi_sf Theta_fb
        jac = np.einsum("sab,sf->safb", dlogit, self.features)
        return jac.reshape(p.shape[0], self.n_actions, self.n_params)


class TabularSoftmaxFamily(FeatureSoftmaxFamily):
    """One free logit per (s, a)."""

    def __init__(self, n_states: int, n_actions: int) -> None:
        super().__init__(features=np.eye(n_states), n_actions=n_actions)


def _gradient(
    mdp: TabularMdp,
    occupancy: np.ndarray,
    family: PolicyFamily,
    theta: np.ndarray,
) -> np.ndarray:
    # Occupancy is normalized by the discount mass, Q is not, so the product
    # is the gradient of the normalized return.
    _, q = exact_value(mdp, family.policy(theta))
    jac = family.jacobian(theta)
    return np.einsum("s,sap,sa->p", occupancy, jac, q)


def exact_policy_gradient(
    mdp: TabularMdp,
    family: PolicyFamily,
    theta: np.ndarray,
) -> np.ndarray:
    """Gradient of the normalized return of ``family.policy(theta)``."""
    d_pi = exact_occupancy(mdp, family.policy(theta))
    return _gradient(mdp, d_pi, family, theta)


def offpac_gradient_exact(
    mdp: TabularMdp,
    behavior: PolicyTable,
    family: PolicyFamily,
    theta: np.ndarray,
) -> np.ndarray:
    """Exact Off-PAC direction: occupancy of the behavior policy, Q of pi."""
    d_mu = exact_occupancy(mdp, behavior)
    return _gradient(mdp, d_mu, family, theta)


def normalized_return(mdp: TabularMdp, family: PolicyFamily, theta: np.ndarray) -> float:
    v, _ = exact_value(mdp, family.policy(theta))
    horizon = None if mdp.gamma < 1.0 else mdp.horizon
    return float(mdp.initial_dist @ v) / discount_mass(mdp.gamma, horizon)
