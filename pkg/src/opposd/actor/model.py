"""
opposd.actor.model — Softmax policy network.

Inputs are normalized states, optionally multiplied by a fixed feature
projection (used to alias states that must share an action rule). With no
hidden layers and one-hot inputs the actor is a tabular softmax policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from opposd.data.dataset import NormalizationStats
from opposd.nn.adam import AdamState
from opposd.nn.checkpoint import load_params, save_params
from opposd.nn.functional import log_softmax
from opposd.nn.mlp import MlpParams, init_mlp, mlp_forward, mlp_logits


@dataclass
class ActorModel:
    params: MlpParams
    optimizer: AdamState
    normalization: NormalizationStats
    projection: np.ndarray | None = None

    @classmethod
    def create(
        cls,
        state_dim: int,
        n_actions: int,
        hidden: list[int],
        rng: np.random.Generator,
        learning_rate: float,
        normalization: NormalizationStats | None = None,
        projection: np.ndarray | None = None,
    ) -> ActorModel:
        n_inputs = state_dim if projection is None else projection.shape[1]
        params = init_mlp([n_inputs, *hidden, n_actions], "softmax", rng)
        return cls(
            params=params,
            optimizer=AdamState.for_params(params, learning_rate),
            normalization=normalization or NormalizationStats.identity(state_dim),
            projection=None if projection is None else np.asarray(projection, dtype=np.float64),
        )

    @property
    def n_actions(self) -> int:
        return self.params.n_outputs

    def features(self, states: np.ndarray) -> np.ndarray:
        x = self.normalization.apply(np.atleast_2d(states))
        return x if self.projection is None else x @ self.projection

    def action_probs(self, states: np.ndarray) -> np.ndarray:
        return mlp_forward(self.params, self.features(states))

    def log_probs(self, states: np.ndarray) -> np.ndarray:
        return log_softmax(mlp_logits(self.params, self.features(states)))


def save_actor_model(model: ActorModel, stem: str | Path) -> None:
    extra = {"normalization": model.normalization.to_dict()}
    if model.projection is not None:
        extra["projection"] = model.projection.tolist()
    save_params(stem, model.params, model.optimizer, extra=extra)


def load_actor_model(stem: str | Path) -> ActorModel:
    params, optimizer, extra = load_params(stem)
    if optimizer is None:
        optimizer = AdamState.for_params(params, learning_rate=0.0)
    projection = extra.get("projection")
    return ActorModel(
        params=params,
        optimizer=optimizer,
        normalization=NormalizationStats.from_dict(extra["normalization"]),
        projection=None if projection is None else np.array(projection, dtype=np.float64),
    )
