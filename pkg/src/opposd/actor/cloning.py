"""
opposd.actor.cloning — Behavior-cloning warm start.

Adam on the negative log-likelihood of logged actions, over steps that the
behavior policy actually took (in support, not absorbing).
"""

from __future__ import annotations

import logging

import numpy as np

from opposd.actor.model import ActorModel
from opposd.data.dataset import Dataset, DatasetError
from opposd.nn.adam import adam_step
from opposd.nn.functional import log_softmax, softmax
from opposd.nn.mlp import DenseMatrix, mlp_backward, mlp_logits

logger = logging.getLogger(__name__)


def cloning_loss(
    actor: ActorModel,
    states: np.ndarray,
    actions: np.ndarray,
) -> tuple[float, list[DenseMatrix]]:
    """Mean negative log-likelihood and its parameter gradients."""
    x = actor.features(states)
    logits = mlp_logits(actor.params, x)
    n = logits.shape[0]
    rows = np.arange(n)
    nll = -float(np.mean(log_softmax(logits)[rows, actions]))
    d_logits = softmax(logits)
    d_logits[rows, actions] -= 1.0
    grads, _ = mlp_backward(actor.params, x, d_logits / n, through_head=False)
    return nll, grads


def behavior_clone(
    actor: ActorModel,
    dataset: Dataset,
    iterations: int,
    batch_size: int,
    rng: np.random.Generator,
) -> float:
    """Returns the last mini-batch NLL (nan for zero iterations)."""
    valid = dataset.in_support & ~dataset.absorbing
    traj_idx, step_idx = np.nonzero(valid)
    if traj_idx.size == 0:
        raise DatasetError("No logged behavior steps to clone")
    loss = float("nan")
    for _ in range(iterations):
        pick = rng.integers(traj_idx.size, size=batch_size)
        loss, grads = cloning_loss(
            actor,
            dataset.states[traj_idx[pick], step_idx[pick]],
            dataset.actions[traj_idx[pick], step_idx[pick]],
        )
        adam_step(actor.optimizer, actor.params, grads)
    logger.debug("Behavior cloning: %d iterations, final NLL %.4f", iterations, loss)
    return loss
