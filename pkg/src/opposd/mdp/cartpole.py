"""
opposd.mdp.cartpole — Classic cart-pole balancing, vectorized over a batch.

State (x, x_dot, theta, theta_dot); actions 0 = push left, 1 = push right.
Euler integration with tau = 0.02. An episode ends when |theta| exceeds
12 degrees or |x| exceeds 2.4; every step, the terminating one included,
yields reward 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from opposd.mdp.tabular import MdpError


class CartPoleState(NamedTuple):
    x: float
    x_dot: float
    theta: float
    theta_dot: float


@dataclass(frozen=True)
class CartPoleConfig:
    gravity: float = 9.8
    masscart: float = 1.0
    masspole: float = 0.1
    length: float = 0.5
    force_mag: float = 10.0
    tau: float = 0.02
    theta_threshold: float = 12 * 2 * math.pi / 360
    x_threshold: float = 2.4
    reset_scale: float = 0.05

    @property
    def total_mass(self) -> float:
        return self.masscart + self.masspole

    @property
    def polemass_length(self) -> float:
        return self.masspole * self.length


def cartpole_step(
    states: np.ndarray,
    actions: np.ndarray,
    config: CartPoleConfig = CartPoleConfig(),
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Advance a (B, 4) batch by one step.

    Returns:
        (next_states, rewards, done)
    """
    states = np.asarray(states, dtype=np.float64)
    if states.ndim == 1:
        states = states[None, :]
    if states.shape[1] != 4:
        raise MdpError(f"CartPole states must be (B, 4), got {states.shape}")
    actions = np.asarray(actions).reshape(-1)
    if np.any((actions != 0) & (actions != 1)):
        raise MdpError(f"CartPole actions must be 0 or 1, got {np.unique(actions)}")

    x, x_dot, theta, theta_dot = states.T
    force = np.where(actions == 1, config.force_mag, -config.force_mag)
    costheta = np.cos(theta)
    sintheta = np.sin(theta)

    temp = (force + config.polemass_length * theta_dot ** 2 * sintheta) / config.total_mass
    thetaacc = (config.gravity * sintheta - costheta * temp) / (
        config.length * (4.0 / 3.0 - config.masspole * costheta ** 2 / config.total_mass)
    )
    xacc = temp - config.polemass_length * thetaacc * costheta / config.total_mass

    x = x + config.tau * x_dot
    x_dot = x_dot + config.tau * xacc
    theta = theta + config.tau * theta_dot
    theta_dot = theta_dot + config.tau * thetaacc

    next_states = np.stack([x, x_dot, theta, theta_dot], axis=1)
    done = (
        (x < -config.x_threshold) | (x > config.x_threshold)
        | (theta < -config.theta_threshold) | (theta > config.theta_threshold)
    )
    return next_states, np.ones(states.shape[0]), done


def cartpole_reset(
    n: int,
    rng: np.random.Generator,
    config: CartPoleConfig = CartPoleConfig(),
) -> np.ndarray:
    """(n, 4) initial states, each coordinate uniform in [-0.05, 0.05]."""
    return rng.uniform(-config.reset_scale, config.reset_scale, size=(n, 4))


def cartpole_step_one(
    state: CartPoleState,
    action: int,
    config: CartPoleConfig = CartPoleConfig(),
) -> tuple[CartPoleState, float, bool]:
    """Single-state form of cartpole_step."""
    next_states, rewards, done = cartpole_step(
        np.asarray(state, dtype=np.float64), np.array([action]), config
    )
    return CartPoleState(*next_states[0].tolist()), float(rewards[0]), bool(done[0])


def cartpole_reset_one(
    rng: np.random.Generator,
    config: CartPoleConfig = CartPoleConfig(),
) -> CartPoleState:
    return CartPoleState(*cartpole_reset(1, rng, config)[0].tolist())


class CartPoleEnv:
    """Batched cart-pole environment.

    There is no absorbing sentinel: a zero vector is a legal cart-pole
    state, so epsilon-smoothing is unavailable here.
    """
    name = "cartpole"
    state_dim = 4
    n_actions = 2
    sentinel_ok = False

    def __init__(self, config: CartPoleConfig | None = None, horizon: int = 200,
                 gamma: float = 1.0) -> None:
        self.config = config or CartPoleConfig()
        self.horizon = horizon
        self.gamma = gamma

    def reset(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return cartpole_reset(n, rng, self.config)

    def step(
        self,
        states: np.ndarray,
        actions: np.ndarray,
        rng: np.random.Generator,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return cartpole_step(states, actions, self.config)
