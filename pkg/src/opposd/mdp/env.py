"""
opposd.mdp.env — Batched environments and policies.

Every environment steps a whole batch at once:

    reset(n, rng)                  -> states (n, state_dim)
    step(states, actions, rng)     -> (next_states, rewards, done)

A policy is anything with ``action_probs(states) -> (B, A)``. Tabular
environments emit one-hot states; the all-zero vector is the absorbing
sentinel s_abs used by epsilon-smoothing.
"""

from __future__ import annotations

import logging
from typing import Protocol, runtime_checkable

import numpy as np

from opposd.mdp.tabular import MdpError, PolicyTable, TabularMdp

logger = logging.getLogger(__name__)


@runtime_checkable
class Env(Protocol):
    name: str
    state_dim: int
    n_actions: int
    horizon: int
    gamma: float
    sentinel_ok: bool

    def reset(self, n: int, rng: np.random.Generator) -> np.ndarray: ...

    def step(
        self, states: np.ndarray, actions: np.ndarray, rng: np.random.Generator,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]: ...


@runtime_checkable
class Policy(Protocol):
    n_actions: int

    def action_probs(self, states: np.ndarray) -> np.ndarray: ...


class UniformPolicy:
    def __init__(self, n_actions: int) -> None:
        self.n_actions = n_actions

    def action_probs(self, states: np.ndarray) -> np.ndarray:
        n = np.atleast_2d(states).shape[0]
        return np.full((n, self.n_actions), 1.0 / self.n_actions)


class TabularPolicy:
    """Lookup policy over one-hot states; s_abs (all zeros) plays uniformly."""

    def __init__(self, table: PolicyTable) -> None:
        self.table = table
        self.n_actions = table.n_actions

    def action_probs(self, states: np.ndarray) -> np.ndarray:
        states = np.atleast_2d(states)
        if states.shape[1] != self.table.n_states:
            raise MdpError(
                f"TabularPolicy over {self.table.n_states} states got "
                f"state dimension {states.shape[1]}"
            )
        idx = np.argmax(states, axis=1)
        probs = self.table.probs[idx].copy()
        sentinel = ~np.any(states != 0.0, axis=1)
        probs[sentinel] = 1.0 / self.n_actions
        return probs


def sample_actions(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One categorical draw per row by inverse CDF."""
    cdf = np.cumsum(probs, axis=1)
    u = rng.uniform(size=(probs.shape[0], 1)) * cdf[:, -1:]
    return np.minimum((u > cdf).sum(axis=1), probs.shape[1] - 1)


def one_hot(indices: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((len(indices), n))
    out[np.arange(len(indices)), indices] = 1.0
    return out


class TabularEnv:
    """Finite MDP behind the batched interface.

    ``done`` is raised on the step that enters an absorbing zero-reward
    state (as reported by ``TabularMdp.absorbing_states``).
    """
    sentinel_ok = True

    def __init__(self, mdp: TabularMdp, name: str = "tabular",
                 behavior: PolicyTable | None = None) -> None:
        if mdp.horizon is None:
            raise MdpError("TabularEnv needs an MDP with a finite horizon")
        self.mdp = mdp
        self.name = name
        self.behavior = behavior
        self.state_dim = mdp.n_states
        self.n_actions = mdp.n_actions
        self.horizon = int(mdp.horizon)
        self.gamma = mdp.gamma
        self._terminal = mdp.absorbing_states()
        self._cdf = np.cumsum(mdp.transition, axis=2)

    def state_index(self, states: np.ndarray) -> np.ndarray:
        states = np.atleast_2d(states)
        if np.any(~np.any(states != 0.0, axis=1)):
            raise MdpError("TabularEnv cannot step from the absorbing sentinel")
        return np.argmax(states, axis=1)

    def reset(self, n: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.choice(self.mdp.n_states, size=n, p=self.mdp.initial_dist)
        return one_hot(idx, self.mdp.n_states)

    def step(
        self,
        states: np.ndarray,
        actions: np.ndarray,
        rng: np.random.Generator,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = self.state_index(states)
        a = np.asarray(actions).reshape(-1)
        rewards = self.mdp.reward[s, a]
        cdf = self._cdf[s, a]
        u = rng.uniform(size=(len(s), 1)) * cdf[:, -1:]
        nxt = np.minimum((u > cdf).sum(axis=1), self.mdp.n_states - 1)
        return one_hot(nxt, self.mdp.n_states), rewards, self._terminal[nxt]

    def behavior_policy(self) -> Policy:
        if self.behavior is None:
            return UniformPolicy(self.n_actions)
        return TabularPolicy(self.behavior)


def rollout_returns(
    env: Env,
    policy: Policy,
    n_episodes: int,
    rng: np.random.Generator,
    gamma: float | None = None,
    horizon: int | None = None,
) -> np.ndarray:
    """Discounted return of ``n_episodes`` independent episodes."""
    gamma = env.gamma if gamma is None else gamma
    horizon = env.horizon if horizon is None else horizon
    states = env.reset(n_episodes, rng)
    alive = np.ones(n_episodes, dtype=bool)
    returns = np.zeros(n_episodes)
    discount = 1.0
    for _ in range(horizon):
        if not np.any(alive):
            break
        actions = sample_actions(policy.action_probs(states), rng)
        next_states, rewards, done = env.step(states, actions, rng)
        returns += np.where(alive, discount * rewards, 0.0)
        alive &= ~done
        states = np.where(alive[:, None], next_states, states)
        discount *= gamma
    return returns
