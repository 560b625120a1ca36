"""
opposd.critic.model — State-value critic V(s) and its updates.

    l_c = 1/|B| sum rho (R^lambda - V(s))^2

A critic round recomputes R^lambda once from the current (frozen) critic
and then takes ``n_steps`` Adam steps on uniformly drawn rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from opposd.critic.returns import dataset_lambda_returns
from opposd.data.dataset import Dataset, NormalizationStats
from opposd.data.propensity import importance_ratios
from opposd.mdp.env import Policy
from opposd.nn.adam import AdamState, adam_step
from opposd.nn.checkpoint import load_params, save_params
from opposd.nn.mlp import DenseMatrix, MlpParams, ShapeError, init_mlp, mlp_backward, mlp_forward

logger = logging.getLogger(__name__)


@dataclass
class CriticModel:
    params: MlpParams
    optimizer: AdamState
    normalization: NormalizationStats

    @classmethod
    def create(
        cls,
        state_dim: int,
        hidden: list[int],
        rng: np.random.Generator,
        learning_rate: float,
        normalization: NormalizationStats | None = None,
    ) -> CriticModel:
        params = init_mlp([state_dim, *hidden, 1], "linear", rng)
        return cls(
            params=params,
            optimizer=AdamState.for_params(params, learning_rate),
            normalization=normalization or NormalizationStats.identity(state_dim),
        )

    def predict(self, states: np.ndarray) -> np.ndarray:
        return mlp_forward(self.params, self.normalization.apply(states))[:, 0]


@dataclass
class CriticConfig:
    batch_size: int
    n_steps: int
    lam: float
    gamma: float


def critic_loss(
    model: CriticModel,
    states: np.ndarray,
    returns: np.ndarray,
    rho: np.ndarray | None = None,
) -> tuple[float, list[DenseMatrix]]:
    """Importance-weighted squared error and its parameter gradients.

    ``returns`` are treated as constants.
    """
    returns = np.asarray(returns, dtype=np.float64)
    rho = np.ones_like(returns) if rho is None else np.asarray(rho, dtype=np.float64)
    if returns.shape != rho.shape or returns.ndim != 1:
        raise ShapeError(f"returns {returns.shape} and rho {rho.shape} must be equal 1-D arrays")
    x = model.normalization.apply(states)
    values = mlp_forward(model.params, x)[:, 0]
    residual = returns - values
    n = residual.shape[0]
    loss = float(np.mean(rho * residual ** 2))
    grads, _ = mlp_backward(model.params, x, -2.0 * rho * residual / n)
    return loss, grads


def critic_update_round(
    model: CriticModel,
    dataset: Dataset,
    target_policy: Policy | None,
    config: CriticConfig,
    rng: np.random.Generator,
) -> float:
    """One round of ``config.n_steps`` steps; ``target_policy=None`` means rho = 1.

    Returns the mean loss over the round (nan when ``n_steps`` is 0).
    """
    if config.n_steps <= 0:
        return float("nan")
    n, horizon = dataset.n_trajectories, dataset.horizon
    returns = dataset_lambda_returns(dataset, model.predict, target_policy,
                                     config.lam, config.gamma)
    if target_policy is None:
        rho = np.ones((n, horizon))
    else:
        rho = importance_ratios(target_policy, dataset.all_steps()).reshape(n, horizon)

    losses = []
    for _ in range(config.n_steps):
        traj = rng.integers(n, size=config.batch_size)
        steps = rng.integers(horizon, size=config.batch_size)
        loss, grads = critic_loss(model, dataset.states[traj, steps],
                                  returns[traj, steps], rho[traj, steps])
        adam_step(model.optimizer, model.params, grads)
        losses.append(loss)
    return float(np.mean(losses))


def warm_start_critic(
    model: CriticModel,
    dataset: Dataset,
    config: CriticConfig,
    iterations: int,
    rng: np.random.Generator,
) -> float:
    """On-policy lambda-return regression (rho = 1) for ``iterations`` steps."""
    loss = float("nan")
    done = 0
    while done < iterations:
        steps = min(config.n_steps if config.n_steps > 0 else iterations, iterations - done)
        round_config = CriticConfig(config.batch_size, steps, config.lam, config.gamma)
        loss = critic_update_round(model, dataset, None, round_config, rng)
        done += steps
    logger.debug("Critic warm start: %d steps, last round loss %.4g", iterations, loss)
    return loss


def save_critic_model(model: CriticModel, stem: str | Path) -> None:
    save_params(stem, model.params, model.optimizer,
                extra={"normalization": model.normalization.to_dict()})


def load_critic_model(stem: str | Path) -> CriticModel:
    params, optimizer, extra = load_params(stem)
    if optimizer is None:
        optimizer = AdamState.for_params(params, learning_rate=0.0)
    return CriticModel(params, optimizer, NormalizationStats.from_dict(extra["normalization"]))
