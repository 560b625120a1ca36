"""
opposd.data.sampler — Mini-batch samplers over (trajectory, step) pairs.

The d_gamma sampler draws a trajectory uniformly and a step t with
probability gamma^t / sum_{u<H} gamma^u. gamma = 1 is the uniform sampler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from opposd.data.dataset import Dataset, DatasetError, TransitionBatch


@dataclass
class DiscountedSampler:
    gamma: float
    horizon: int
    weights: np.ndarray = field(init=False)
    cumulative: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise DatasetError(f"gamma must be in (0, 1], got {self.gamma}")
        raw = self.gamma ** np.arange(self.horizon, dtype=np.float64)
        self.weights = raw / raw.sum()
        self.cumulative = np.cumsum(self.weights)

    def sample_steps(self, size: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.uniform(size=size) * self.cumulative[-1]
        return np.minimum(np.searchsorted(self.cumulative, u, side="right"), self.horizon - 1)


def uniform_sampler(horizon: int) -> DiscountedSampler:
    return DiscountedSampler(gamma=1.0, horizon=horizon)


def sample_minibatch_dgamma(
    dataset: Dataset,
    sampler: DiscountedSampler,
    batch_size: int,
    rng: np.random.Generator,
) -> TransitionBatch:
    """I.i.d. draws: trajectory uniform, step t ~ gamma^t."""
    if batch_size < 1:
        raise DatasetError(f"batch_size must be >= 1, got {batch_size}")
    if sampler.horizon != dataset.horizon:
        raise DatasetError(
            f"Sampler horizon {sampler.horizon} does not match dataset horizon {dataset.horizon}"
        )
    traj = rng.integers(dataset.n_trajectories, size=batch_size)
    steps = sampler.sample_steps(batch_size, rng)
    return dataset.batch(traj, steps)
