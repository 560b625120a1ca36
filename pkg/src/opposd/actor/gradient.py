"""
opposd.actor.gradient — State-distribution corrected policy gradient.

Surrogate objective on an actor mini-batch B:

    J = 1/|B| sum (w(s) / z_w) rho(s, a) log pi(a|s) Q(s, a)
        + c * mean over non-absorbing rows of H(pi(.|s))

z_w is the mean of w over the batch. Off-PAC is the same with w = 1.
Gradients are returned in descent form (grad of -J), ready for Adam, so an
optimizer step increases J.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from opposd.actor.model import ActorModel
from opposd.data.dataset import TransitionBatch
from opposd.errors import NumericError
from opposd.nn.functional import entropy_of_policy, log_softmax, softmax
from opposd.nn.mlp import DenseMatrix, mlp_backward, mlp_logits


class RatioPredictor(Protocol):
    def predict(self, states: np.ndarray) -> np.ndarray: ...


@dataclass
class ActorGradient:
    grads: list[DenseMatrix]
    objective: float
    entropy: float
    z_w: float

    @property
    def grad_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(g * g) for g in self.grads)))


def actor_gradient(
    actor: ActorModel,
    batch: TransitionBatch,
    ratio_model: RatioPredictor | None,
    q_values: np.ndarray,
    rho: np.ndarray,
    entropy_coefficient: float,
    z_w: float | None = None,
) -> ActorGradient:
    """Descent-form gradient of the corrected surrogate on one batch."""
    n = len(batch)
    q_values = np.asarray(q_values, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    if ratio_model is None:
        w = np.ones(n)
    else:
        w = np.asarray(ratio_model.predict(batch.states), dtype=np.float64)
    if z_w is None:
        z_w = float(np.mean(w))
    if not z_w > 0.0:
        raise NumericError(f"ratio normalizer z_w must be > 0, got {z_w}")

    x = actor.features(batch.states)
    logits = mlp_logits(actor.params, x)
    log_p = log_softmax(logits)
    p = softmax(logits)
    rows = np.arange(n)
    coef = (w / z_w) * rho * q_values

    onehot = np.zeros_like(p)
    onehot[rows, batch.actions] = 1.0
    d_logits = coef[:, None] * (onehot - p) / n

    live = ~batch.absorbing
    n_live = int(live.sum())
    h, dh = entropy_of_policy(p)
    mean_entropy = float(h[live].mean()) if n_live else 0.0
    if n_live and entropy_coefficient:
        d_logits += entropy_coefficient * np.where(live[:, None], dh, 0.0) / n_live

    objective = float(np.mean(coef * log_p[rows, batch.actions])
                      + entropy_coefficient * mean_entropy)
    if not np.isfinite(objective) or not np.all(np.isfinite(d_logits)):
        raise NumericError("actor gradient is not finite")
    grads, _ = mlp_backward(actor.params, x, -d_logits, through_head=False)
    return ActorGradient(grads=grads, objective=objective, entropy=mean_entropy, z_w=z_w)


def offpac_actor_gradient(
    actor: ActorModel,
    batch: TransitionBatch,
    q_values: np.ndarray,
    rho: np.ndarray,
    entropy_coefficient: float,
) -> ActorGradient:
    """Off-PAC: the corrected gradient without the state ratio."""
    return actor_gradient(actor, batch, None, q_values, rho, entropy_coefficient, z_w=1.0)
