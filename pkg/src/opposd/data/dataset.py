"""
opposd.data.dataset — Logged trajectories as fixed-horizon arrays.

A Dataset holds ``n`` trajectories of exactly ``horizon`` steps. Per-step
fields are stored as (n, horizon, ...) arrays:

    states, next_states     (n, H, state_dim)
    actions                 (n, H) int
    rewards                 (n, H)
    behavior_probs          (n, H)   mu~(a|s) > 0
    terminal                (n, H)   the episode ended on this step
    padded                  (n, H)   step added after termination
    absorbing               (n, H)   state is s_abs (all zeros)
    next_absorbing          (n, H)   next state is s_abs
    in_support              (n, H)   step was logged by mu (not injected)

Padded steps repeat the final state, carry reward 0 and keep sampling
actions. Once a trajectory is absorbing it stays absorbing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, NamedTuple

import numpy as np

from opposd.errors import OpposdError

STD_FLOOR = 1e-6

STEP_FIELDS = (
    "states", "actions", "rewards", "next_states", "behavior_probs",
    "terminal", "padded", "absorbing", "next_absorbing", "in_support",
)
BOOL_FIELDS = ("terminal", "padded", "absorbing", "next_absorbing", "in_support")


class DatasetError(OpposdError):
    """Invalid dataset or dataset operation."""
    pass


class Transition(NamedTuple):
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    behavior_prob: float
    timestep: int
    is_absorbing: bool


@dataclass
class NormalizationStats:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.maximum(np.asarray(self.std, dtype=np.float64), STD_FLOOR)

    @classmethod
    def identity(cls, dim: int) -> NormalizationStats:
        return cls(np.zeros(dim), np.ones(dim))

    def apply(self, states: np.ndarray) -> np.ndarray:
        return (np.asarray(states, dtype=np.float64) - self.mean) / self.std

    def to_dict(self) -> dict[str, list[float]]:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> NormalizationStats:
        return cls(np.array(data["mean"], dtype=np.float64),
                   np.array(data["std"], dtype=np.float64))


@dataclass
class TransitionBatch:
    """Struct-of-arrays mini-batch with row provenance."""
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    behavior_probs: np.ndarray
    terminal: np.ndarray
    padded: np.ndarray
    absorbing: np.ndarray
    next_absorbing: np.ndarray
    in_support: np.ndarray
    initial_states: np.ndarray
    traj_index: np.ndarray
    timesteps: np.ndarray

    def __len__(self) -> int:
        return int(self.actions.shape[0])


@dataclass
class Dataset:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    behavior_probs: np.ndarray
    terminal: np.ndarray
    padded: np.ndarray
    absorbing: np.ndarray
    next_absorbing: np.ndarray
    in_support: np.ndarray
    n_actions: int
    smoothing_epsilon: float = 0.0
    normalization: NormalizationStats | None = None
    sentinel_ok: bool = False
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.states.ndim != 3:
            raise DatasetError(f"states must be (n, H, state_dim), got {self.states.shape}")
        n, h, d = self.states.shape
        if n == 0:
            raise DatasetError("Dataset is empty (0 trajectories)")
        for name in STEP_FIELDS:
            arr = getattr(self, name)
            expected = (n, h, d) if name in ("states", "next_states") else (n, h)
            if arr.shape != expected:
                raise DatasetError(f"{name} must have shape {expected}, got {arr.shape}")
        if not 0.0 <= self.smoothing_epsilon < 1.0:
            raise DatasetError(f"smoothing_epsilon must be in [0, 1), got {self.smoothing_epsilon}")
        if np.any(self.behavior_probs <= 0.0):
            raise DatasetError("Every logged action needs a positive behavior probability")
        if self.normalization is None:
            self.normalization = NormalizationStats.identity(d)

    @property
    def n_trajectories(self) -> int:
        return self.states.shape[0]

    @property
    def horizon(self) -> int:
        return self.states.shape[1]

    @property
    def state_dim(self) -> int:
        return self.states.shape[2]

    @property
    def initial_states(self) -> np.ndarray:
        return self.states[:, 0]

    def batch(self, traj_index: np.ndarray, timesteps: np.ndarray) -> TransitionBatch:
        i = np.asarray(traj_index, dtype=np.int64)
        t = np.asarray(timesteps, dtype=np.int64)
        return TransitionBatch(
            **{name: getattr(self, name)[i, t] for name in STEP_FIELDS},
            initial_states=self.states[i, 0],
            traj_index=i,
            timesteps=t,
        )

    def all_steps(self) -> TransitionBatch:
        """Every (trajectory, step) pair, trajectory-major."""
        i, t = np.meshgrid(np.arange(self.n_trajectories), np.arange(self.horizon),
                           indexing="ij")
        return self.batch(i.ravel(), t.ravel())

    def trajectory(self, index: int) -> list[Transition]:
        return [
            Transition(
                state=self.states[index, t],
                action=int(self.actions[index, t]),
                reward=float(self.rewards[index, t]),
                next_state=self.next_states[index, t],
                behavior_prob=float(self.behavior_probs[index, t]),
                timestep=t,
                is_absorbing=bool(self.absorbing[index, t]),
            )
            for t in range(self.horizon)
        ]

    def episode_returns(self, gamma: float = 1.0) -> np.ndarray:
        """Discounted return of each logged trajectory."""
        discounts = gamma ** np.arange(self.horizon)
        return self.rewards @ discounts

    def select(self, traj_index: np.ndarray) -> Dataset:
        """Sub-dataset of the given trajectories (same metadata)."""
        idx = np.asarray(traj_index, dtype=np.int64)
        return replace(self, **{name: getattr(self, name)[idx].copy() for name in STEP_FIELDS})

    def copy(self) -> Dataset:
        return self.select(np.arange(self.n_trajectories))


def empty_steps(n: int, horizon: int, state_dim: int) -> dict[str, np.ndarray]:
    """Zero-initialized per-step arrays for building a Dataset."""
    out: dict[str, np.ndarray] = {
        "states": np.zeros((n, horizon, state_dim)),
        "next_states": np.zeros((n, horizon, state_dim)),
        "actions": np.zeros((n, horizon), dtype=np.int64),
        "rewards": np.zeros((n, horizon)),
        "behavior_probs": np.ones((n, horizon)),
    }
    for name in BOOL_FIELDS:
        out[name] = np.zeros((n, horizon), dtype=bool)
    return out


def compute_normalization(dataset: Dataset) -> NormalizationStats:
    """Per-dimension mean and std over all non-absorbing states."""
    states = dataset.states[~dataset.absorbing]
    if states.shape[0] == 0:
        raise DatasetError("No non-absorbing states to normalize over")
    return NormalizationStats(states.mean(axis=0), states.std(axis=0))
