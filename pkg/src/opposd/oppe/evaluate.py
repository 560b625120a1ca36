"""
opposd.oppe.evaluate — Evaluate every checkpoint of a training run.

For each checkpoint the ratio model is refit to the checkpointed actor on
the evaluation dataset (starting from the checkpointed ratio model, or a
fresh one for Off-PAC runs), then the OPPE estimate is computed on that
same dataset. A simulator, when given, adds the Monte-Carlo ground truth.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from opposd.data.dataset import Dataset
from opposd.mdp.env import Env
from opposd.oppe.estimator import oppe_estimate
from opposd.oppe.montecarlo import onpolicy_mc_eval
from opposd.oppe.selection import (
    EvaluationRecord,
    SelectionError,
    UndefinedCorrelationError,
    correlation_report,
    select_best,
    write_evaluations,
    write_scatter,
)
from opposd.ratio.kernel import KernelConfig
from opposd.ratio.model import RatioConfig, RatioModel, fit_ratio
from opposd.train.checkpoint import CheckpointRecord, CheckpointStore
from opposd.train.config import TrainConfig, discount_variant_dispatch

logger = logging.getLogger(__name__)


@dataclass
class EvaluationSummary:
    records: list[EvaluationRecord]
    best: EvaluationRecord
    pearson_r: float | None
    evaluations_path: Path
    scatter_path: Path | None


def _ratio_config(config: TrainConfig) -> RatioConfig:
    plan = discount_variant_dispatch(config)
    return RatioConfig(
        batch_size=config.batch_ratio,
        gamma=config.gamma,
        variant=plan.ratio_loss,
        discounted_sampling=plan.ratio_sampling_gamma < 1.0,
    )


def _fresh_ratio(dataset: Dataset, config: TrainConfig, rng: np.random.Generator) -> RatioModel:
    model = RatioModel.create(
        dataset.state_dim, config.ratio_hidden, rng, config.lr_ratio,
        config.weight_decay_ratio, dataset.normalization,
        KernelConfig(bandwidth=config.bandwidth, bandwidth_mode=config.bandwidth_mode),
    )
    model.fit_bandwidth(dataset, rng)
    return model


def evaluate_checkpoint(
    store: CheckpointStore,
    record: CheckpointRecord,
    dataset: Dataset,
    config: TrainConfig,
    env: Env | None = None,
    mc_episodes: int = 20,
) -> EvaluationRecord:
    """Refit w on ``dataset`` for the checkpointed actor and estimate its return.

    Each checkpoint draws from its own stream seeded by (seed, 2, update index),
    so records do not depend on which other checkpoints were evaluated.
    """
    rng = np.random.default_rng((config.seed, 2, record.update_index))
    actor = store.load_actor(record)
    ratio = store.load_ratio(record)
    if ratio is None:
        ratio = _fresh_ratio(dataset, config, rng)
    fit_ratio(ratio, dataset, actor, _ratio_config(config), config.warm_start_ratio, rng)
    estimate = oppe_estimate(actor, dataset, ratio, config.gamma)

    out = EvaluationRecord(record.checkpoint_id, record.update_index, estimate)
    if env is not None:
        mc = onpolicy_mc_eval(actor, env, mc_episodes, rng, gamma=config.gamma)
        out.mc_estimate, out.mc_std, out.n_mc_episodes = mc.mean, mc.std, mc.n_episodes
    logger.info("%s: oppe=%.4f mc=%s", record.checkpoint_id, estimate,
                "n/a" if out.mc_estimate is None else f"{out.mc_estimate:.4f}")
    return out


def evaluate_checkpoints(
    checkpoint_dir: str | Path,
    dataset: Dataset,
    config: TrainConfig,
    output_dir: str | Path,
    env: Env | None = None,
    mc_episodes: int = 20,
) -> EvaluationSummary:
    """Evaluate all checkpoints, write evaluations.csv (+ scatter.csv) and select."""
    store = CheckpointStore(checkpoint_dir)
    checkpoints = store.records()
    if not checkpoints:
        raise SelectionError(f"No checkpoints found in {store.directory}")

    records = [
        evaluate_checkpoint(store, rec, dataset, config, env, mc_episodes)
        for rec in checkpoints
    ]
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    header = {
        "estimator": "self-normalized",
        "weighting": "d_gamma",
        "gamma": config.gamma,
        "refit_steps": config.warm_start_ratio,
        "n_eval_trajectories": dataset.n_trajectories,
    }
    evaluations_path = output_dir / "evaluations.csv"
    r = write_evaluations(evaluations_path, records, header)

    scatter_path = None
    try:
        report = correlation_report(records)
    except UndefinedCorrelationError as e:
        logger.info("No correlation report: %s", e)
    else:
        scatter_path = output_dir / "scatter.csv"
        write_scatter(scatter_path, report)
        logger.info("Pearson r between OPPE and Monte-Carlo estimates: %.4f", report.pearson_r)

    best = select_best(records)
    return EvaluationSummary(records, best, r, evaluations_path, scatter_path)
