"""
opposd.train.loop — Batch off-policy actor-critic training.

    warm start:   behavior cloning -> on-policy critic -> ratio fit to the
                  cloned actor (OPPOSD only) -> checkpoint 0
    per update:   n_ratio ratio steps -> one critic round (n_critic steps)
                  -> one actor step on lambda-return Q values
                  -> metrics row, checkpoint every ``checkpoint_interval``
                     and at the final update

Every random draw comes from one Generator seeded by ``config.seed``; its
state is stored in each checkpoint, so resuming reproduces an
uninterrupted run. Monte-Carlo evaluation draws from its own per-update
stream and never touches the training stream.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, TypeVar

import numpy as np

from opposd.actor.cloning import behavior_clone
from opposd.actor.gradient import actor_gradient, offpac_actor_gradient
from opposd.actor.model import ActorModel
from opposd.critic.model import CriticConfig, CriticModel, critic_update_round, warm_start_critic
from opposd.critic.returns import dataset_lambda_returns, masked_q
from opposd.data.collect import collect_dataset
from opposd.data.dataset import Dataset, NormalizationStats, compute_normalization
from opposd.data.propensity import importance_ratios
from opposd.data.sampler import DiscountedSampler, sample_minibatch_dgamma
from opposd.data.smoothing import epsilon_smooth
from opposd.errors import OpposdError
from opposd.mdp.env import Env, UniformPolicy
from opposd.nn.adam import adam_step
from opposd.nn.functional import entropy_of_policy
from opposd.oppe.montecarlo import onpolicy_mc_eval
from opposd.ratio.kernel import KernelConfig
from opposd.ratio.model import RatioConfig, RatioModel, fit_ratio
from opposd.train.checkpoint import CheckpointRecord, CheckpointStore
from opposd.train.config import TrainConfig, discount_variant_dispatch
from opposd.train.metrics import MetricsWriter

logger = logging.getLogger(__name__)

T = TypeVar("T")


class TrainError(OpposdError):
    """A training stage failed."""

    def __init__(self, message: str, stage: str, update_index: int):
        self.stage = stage
        self.update_index = update_index
        super().__init__(f"stage '{stage}' failed at actor update {update_index}: {message}")


def _stage(name: str, update_index: int, fn: Callable[[], T]) -> T:
    try:
        return fn()
    except TrainError:
        raise
    except OpposdError as e:
        raise TrainError(str(e), name, update_index) from e


@dataclass
class TrainResult:
    store: CheckpointStore
    metrics_path: Path
    actor: ActorModel
    critic: CriticModel
    ratio: RatioModel | None
    dataset: Dataset
    final_update: int


@dataclass
class _Models:
    actor: ActorModel
    critic: CriticModel
    ratio: RatioModel | None


def prepare_dataset(env: Env, config: TrainConfig, rng: np.random.Generator) -> Dataset:
    """Collect, smooth and normalize a dataset from a simulator."""
    if hasattr(env, "behavior_policy"):
        behavior = env.behavior_policy()
    else:
        behavior = UniformPolicy(env.n_actions)
    dataset = collect_dataset(env, behavior, config.n_trajectories, env.horizon, rng)
    if config.epsilon_smoothing > 0.0:
        dataset = epsilon_smooth(dataset, behavior, config.epsilon_smoothing, rng)
    dataset.normalization = compute_normalization(dataset)
    return dataset


def _critic_config(config: TrainConfig) -> CriticConfig:
    return CriticConfig(config.batch_critic, config.n_critic, config.lam, config.gamma)


def _build_models(dataset: Dataset, config: TrainConfig, rng: np.random.Generator) -> _Models:
    norm = dataset.normalization if config.normalize_states else NormalizationStats.identity(
        dataset.state_dim)
    actor = ActorModel.create(dataset.state_dim, dataset.n_actions, config.actor_hidden, rng,
                              config.lr_actor, norm, config.actor_projection)
    critic = CriticModel.create(dataset.state_dim, config.critic_hidden, rng,
                                config.lr_critic, norm)
    ratio = None
    if config.algorithm == "opposd":
        ratio = RatioModel.create(
            dataset.state_dim, config.ratio_hidden, rng, config.lr_ratio,
            config.weight_decay_ratio, norm,
            KernelConfig(bandwidth=config.bandwidth, bandwidth_mode=config.bandwidth_mode),
        )
    return _Models(actor, critic, ratio)


def _mc_row(models: _Models, env: Env | None, config: TrainConfig,
            update_index: int) -> dict[str, Any]:
    if env is None or config.mc_eval_interval <= 0 or update_index % config.mc_eval_interval:
        return {}
    eval_rng = np.random.default_rng((config.seed, 1, update_index))
    result = onpolicy_mc_eval(models.actor, env, config.mc_eval_episodes, eval_rng,
                              gamma=config.gamma)
    return {"mc_eval_mean": result.mean, "mc_eval_std": result.std}


def actor_update(
    models: _Models,
    dataset: Dataset,
    config: TrainConfig,
    actor_sampler: DiscountedSampler,
    rng: np.random.Generator,
):
    """One actor step; returns the ActorGradient that was applied."""
    actor = models.actor
    returns = dataset_lambda_returns(dataset, models.critic.predict, actor,
                                     config.lam, config.gamma)
    batch = sample_minibatch_dgamma(dataset, actor_sampler, config.batch_actor, rng)
    q = masked_q(returns[batch.traj_index, batch.timesteps], batch.in_support)
    rho = importance_ratios(actor, batch)
    if models.ratio is None:
        step = offpac_actor_gradient(actor, batch, q, rho, config.entropy_coefficient)
    else:
        step = actor_gradient(actor, batch, models.ratio, q, rho, config.entropy_coefficient)
    adam_step(actor.optimizer, actor.params, step.grads)
    return step


def train(
    source: Dataset | Env,
    config: TrainConfig,
    output_dir: str | Path,
    eval_env: Env | None = None,
    resume: CheckpointRecord | None = None,
) -> TrainResult:
    """Run warm starts and ``config.total_actor_updates`` actor updates.

    ``source`` is a logged dataset, or a simulator to collect one from
    (which then also serves Monte-Carlo evaluation unless ``eval_env`` is
    given). Output: ``<output_dir>/checkpoints`` and ``metrics.csv``.
    """
    output_dir = Path(output_dir)
    rng = np.random.default_rng(config.seed)
    if isinstance(source, Dataset):
        dataset = source
    else:
        dataset = _stage("collect", 0, lambda: prepare_dataset(source, config, rng))
        eval_env = eval_env or source

    plan = discount_variant_dispatch(config)
    ratio_config = RatioConfig(
        batch_size=config.batch_ratio,
        gamma=config.gamma,
        variant=plan.ratio_loss,
        discounted_sampling=plan.ratio_sampling_gamma < 1.0,
    )
    actor_sampler = DiscountedSampler(plan.actor_sampling_gamma, dataset.horizon)
    critic_config = _critic_config(config)

    store = CheckpointStore(output_dir / "checkpoints")
    metrics = MetricsWriter(output_dir / "metrics.csv", config.header())

    if resume is not None:
        state = store.load(resume)
        models = _Models(state.actor, state.critic, state.ratio)
        rng = state.rng
        start = state.update_index
        metrics.truncate_after(start)
        logger.info("Resuming from %s (update %d)", resume.checkpoint_id, start)
    else:
        models = _build_models(dataset, config, rng)
        start = 0
        row = _warm_start(models, dataset, config, ratio_config, rng)
        row.update(_mc_row(models, eval_env, config, 0))
        metrics.append(row)
        store.write(0, models.actor, models.critic, models.ratio, rng, row)
        logger.info("Warm start done: critic loss %s, ratio loss %s",
                    row.get("critic_loss"), row.get("ratio_loss"))

    for u in range(start + 1, config.total_actor_updates + 1):
        row: dict[str, Any] = {"actor_update": u}
        if models.ratio is not None and config.n_ratio > 0:
            row["ratio_loss"] = _stage("ratio", u, lambda: fit_ratio(
                models.ratio, dataset, models.actor, ratio_config, config.n_ratio, rng))
        row["critic_loss"] = _stage("critic", u, lambda: critic_update_round(
            models.critic, dataset, models.actor, critic_config, rng))
        step = _stage("actor", u, lambda: actor_update(
            models, dataset, config, actor_sampler, rng))
        row.update(entropy=step.entropy, grad_norm=step.grad_norm, z_w=step.z_w)
        row.update(_mc_row(models, eval_env, config, u))
        metrics.append(row)
        logger.debug("update %d: %s", u, row)

        if u % config.checkpoint_interval == 0 or u == config.total_actor_updates:
            store.write(u, models.actor, models.critic, models.ratio, rng, row)
            logger.info("Checkpoint at update %d (entropy %.4f, mc %s)",
                        u, step.entropy, row.get("mc_eval_mean", "n/a"))

    final = max(start, config.total_actor_updates)
    return TrainResult(store, metrics.path, models.actor, models.critic, models.ratio,
                       dataset, final)


def _warm_start(models: _Models, dataset: Dataset, config: TrainConfig,
                ratio_config: RatioConfig, rng: np.random.Generator) -> dict[str, Any]:
    row: dict[str, Any] = {"actor_update": 0}
    _stage("behavior_clone", 0, lambda: behavior_clone(
        models.actor, dataset, config.bc_iterations, config.batch_actor, rng))
    row["critic_loss"] = _stage("warm_start_critic", 0, lambda: warm_start_critic(
        models.critic, dataset, _critic_config(config), config.warm_start_critic, rng))
    if models.ratio is not None:
        ratio = models.ratio
        _stage("warm_start_ratio", 0, lambda: ratio.fit_bandwidth(dataset, rng))
        row["ratio_loss"] = _stage("warm_start_ratio", 0, lambda: fit_ratio(
            ratio, dataset, models.actor, ratio_config, config.warm_start_ratio, rng))
    probs = models.actor.action_probs(dataset.states[~dataset.absorbing])
    entropy, _ = entropy_of_policy(probs)
    row["entropy"] = float(entropy.mean())
    return row
