"""
opposd.ratio.model — Parametric state ratio w(s) and its update step.

w is a ReLU network with a softplus head, so w(s) > 0 everywhere. Inputs
are normalized with the dataset statistics; the same normalized states
feed the kernel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from opposd.data.dataset import Dataset, NormalizationStats, TransitionBatch
from opposd.data.propensity import importance_ratios
from opposd.data.sampler import DiscountedSampler, sample_minibatch_dgamma
from opposd.errors import ConfigError
from opposd.mdp.env import Policy
from opposd.nn.adam import AdamState, adam_step
from opposd.nn.checkpoint import load_params, save_params
from opposd.nn.mlp import DenseMatrix, MlpParams, init_mlp, mlp_backward, mlp_forward
from opposd.ratio.kernel import KernelConfig, median_bandwidth
from opposd.ratio.loss import RatioSide, SideGrads, average_loss, discounted_loss

logger = logging.getLogger(__name__)

LOSS_VARIANTS = ("average", "discounted")


@dataclass
class RatioModel:
    params: MlpParams
    optimizer: AdamState
    normalization: NormalizationStats
    kernel: KernelConfig

    @classmethod
    def create(
        cls,
        state_dim: int,
        hidden: list[int],
        rng: np.random.Generator,
        learning_rate: float,
        weight_decay: float = 0.0,
        normalization: NormalizationStats | None = None,
        kernel: KernelConfig | None = None,
    ) -> RatioModel:
        params = init_mlp([state_dim, *hidden, 1], "softplus", rng)
        return cls(
            params=params,
            optimizer=AdamState.for_params(params, learning_rate, weight_decay),
            normalization=normalization or NormalizationStats.identity(state_dim),
            kernel=kernel or KernelConfig(),
        )

    def features(self, states: np.ndarray) -> np.ndarray:
        return self.normalization.apply(states)

    def predict(self, states: np.ndarray) -> np.ndarray:
        """w(s) per row."""
        return mlp_forward(self.params, self.features(states))[:, 0]

    def fit_bandwidth(self, dataset: Dataset, rng: np.random.Generator) -> float:
        """Apply the median heuristic if the kernel asks for it."""
        if self.kernel.bandwidth_mode == "median":
            states = dataset.states[~dataset.absorbing]
            self.kernel.bandwidth = median_bandwidth(self.features(states), rng)
            logger.info("Median-heuristic kernel bandwidth: %.4g", self.kernel.bandwidth)
        return self.kernel.bandwidth


@dataclass
class RatioBatch:
    """Two independently drawn mini-batches with their importance ratios."""
    first: TransitionBatch
    second: TransitionBatch
    rho_first: np.ndarray
    rho_second: np.ndarray


@dataclass
class RatioConfig:
    batch_size: int
    gamma: float
    variant: str = "discounted"
    discounted_sampling: bool = True

    def __post_init__(self) -> None:
        if self.variant not in LOSS_VARIANTS:
            raise ConfigError(f"must be one of {LOSS_VARIANTS}", field="ratio.variant")
        if self.variant == "discounted" and not 0.0 < self.gamma < 1.0:
            raise ConfigError("the discounted ratio loss needs 0 < gamma < 1", field="gamma")

    def sampler(self, horizon: int) -> DiscountedSampler:
        gamma = self.gamma if self.discounted_sampling else 1.0
        return DiscountedSampler(gamma=gamma, horizon=horizon)


def make_ratio_batch(
    dataset: Dataset,
    policy: Policy,
    sampler: DiscountedSampler,
    batch_size: int,
    rng: np.random.Generator,
) -> RatioBatch:
    first = sample_minibatch_dgamma(dataset, sampler, batch_size, rng)
    second = sample_minibatch_dgamma(dataset, sampler, batch_size, rng)
    return RatioBatch(first, second, importance_ratios(policy, first),
                      importance_ratios(policy, second))


def _side(model: RatioModel, batch: TransitionBatch, rho: np.ndarray,
          with_init: bool) -> tuple[RatioSide, dict[str, np.ndarray]]:
    feats = {
        "w": model.features(batch.states),
        "w_next": model.features(batch.next_states),
        "w_init": model.features(batch.initial_states),
    }
    values = {k: mlp_forward(model.params, x)[:, 0] for k, x in feats.items()
              if with_init or k != "w_init"}
    side = RatioSide(
        w=values["w"],
        w_next=values["w_next"],
        w_init=values.get("w_init", np.ones(len(batch))),
        rho=rho,
        next_feats=feats["w_next"],
        init_feats=feats["w_init"],
    )
    return side, feats


def _pull_back(model: RatioModel, feats: dict[str, np.ndarray], grads: SideGrads,
               total: list[DenseMatrix], with_init: bool) -> None:
    pairs = [("w", grads.w), ("w_next", grads.w_next)]
    if with_init:
        pairs.append(("w_init", grads.w_init))
    for key, upstream in pairs:
        g, _ = mlp_backward(model.params, feats[key], upstream)
        for acc, gi in zip(total, g):
            acc += gi


def _loss_and_grads(model: RatioModel, batch: RatioBatch, gamma: float | None,
                    variant: str) -> tuple[float, list[DenseMatrix]]:
    with_init = variant == "discounted"
    side_a, feats_a = _side(model, batch.first, batch.rho_first, with_init)
    side_b, feats_b = _side(model, batch.second, batch.rho_second, with_init)
    if with_init:
        loss, g_a, g_b = discounted_loss(side_a, side_b, gamma, model.kernel.bandwidth)
    else:
        loss, g_a, g_b = average_loss(side_a, side_b, model.kernel.bandwidth)
    total = [np.zeros_like(p) for p in model.params.arrays()]
    _pull_back(model, feats_a, g_a, total, with_init)
    _pull_back(model, feats_b, g_b, total, with_init)
    return loss, total


def ratio_loss_discounted(model: RatioModel, batch: RatioBatch,
                          gamma: float) -> tuple[float, list[DenseMatrix]]:
    return _loss_and_grads(model, batch, gamma, "discounted")


def ratio_loss_average(model: RatioModel, batch: RatioBatch) -> tuple[float, list[DenseMatrix]]:
    return _loss_and_grads(model, batch, None, "average")


def ratio_loss(model: RatioModel, batch: RatioBatch,
               config: RatioConfig) -> tuple[float, list[DenseMatrix]]:
    if config.variant == "discounted":
        return ratio_loss_discounted(model, batch, config.gamma)
    return ratio_loss_average(model, batch)


def ratio_update_step(
    model: RatioModel,
    dataset: Dataset,
    target_policy: Policy,
    config: RatioConfig,
    rng: np.random.Generator,
) -> float:
    """One Adam step on a fresh pair of mini-batches; returns the loss."""
    batch = make_ratio_batch(dataset, target_policy, config.sampler(dataset.horizon),
                             config.batch_size, rng)
    loss, grads = ratio_loss(model, batch, config)
    adam_step(model.optimizer, model.params, grads)
    return loss


def fit_ratio(
    model: RatioModel,
    dataset: Dataset,
    target_policy: Policy,
    config: RatioConfig,
    iterations: int,
    rng: np.random.Generator,
) -> float:
    """``iterations`` update steps; returns the last loss (nan if none)."""
    loss = float("nan")
    for _ in range(iterations):
        loss = ratio_update_step(model, dataset, target_policy, config, rng)
    return loss


def save_ratio_model(model: RatioModel, stem: str | Path) -> None:
    save_params(stem, model.params, model.optimizer, extra={
        "kernel": model.kernel.to_dict(),
        "normalization": model.normalization.to_dict(),
    })


def load_ratio_model(stem: str | Path) -> RatioModel:
    params, optimizer, extra = load_params(stem)
    if optimizer is None:
        optimizer = AdamState.for_params(params, learning_rate=0.0)
    return RatioModel(
        params=params,
        optimizer=optimizer,
        normalization=NormalizationStats.from_dict(extra["normalization"]),
        kernel=KernelConfig(**extra["kernel"]),
    )
