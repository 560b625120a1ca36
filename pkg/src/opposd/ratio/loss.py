"""
opposd.ratio.loss — Closed-form kernel losses for the state ratio w.

Both losses compare two independent mini-batches A and B (cross pairs
only). Every term, the K(s0, s0) and mixed s'/s0 terms included, is
divided by the same scalar sum K(s'_A, s'_B). That scalar does not depend
on w, so it rescales the loss without moving its minimizer.

Discounted (0 < gamma < 1), with Delta = w(s) rho - w(s') and
u = 1 - w(s0):

    D(w) = [ gamma^2            sum Delta_A K(s'_A, s'_B) Delta_B
           + (1-gamma)^2        sum u_A K(s0_A, s0_B) u_B
           + gamma (1-gamma)    sum Delta_A K(s'_A, s0_B) u_B
           + gamma (1-gamma)    sum u_A K(s0_A, s'_B) Delta_B ] / sum K(s'_A, s'_B)

Average (gamma = 1), with in-batch self-normalized weights
w~ = w / mean_batch(w(s)):

    D(w) = sum Delta~_A K(s'_A, s'_B) Delta~_B / sum K(s'_A, s'_B)

The functions here work on w values and return the loss together with
dD/dw at states, next states and initial states of both batches; the
model wrapper pulls those back through the network.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from opposd.errors import NumericError
from opposd.ratio.kernel import kernel_matrix


@dataclass
class RatioSide:
    """One mini-batch reduced to what the loss needs.

    Attributes:
        w: w(s) per row
        w_next: w(s') per row
        w_init: w(s0) per row (trajectory start state)
        rho: pi(a|s) / mu~(a|s) per row
        next_feats: kernel inputs for s'
        init_feats: kernel inputs for s0
    """
    w: np.ndarray
    w_next: np.ndarray
    w_init: np.ndarray
    rho: np.ndarray
    next_feats: np.ndarray
    init_feats: np.ndarray

    def __len__(self) -> int:
        return int(self.w.shape[0])


@dataclass
class SideGrads:
    """dD/dw evaluated at one batch's states, next states and start states."""
    w: np.ndarray
    w_next: np.ndarray
    w_init: np.ndarray


def delta(w_values: np.ndarray, rho_values: np.ndarray, w_next_values: np.ndarray) -> np.ndarray:
    """Delta(w; s, a, s') = w(s) rho(s, a) - w(s')."""
    w_values = np.asarray(w_values, dtype=np.float64)
    rho_values = np.asarray(rho_values, dtype=np.float64)
    w_next_values = np.asarray(w_next_values, dtype=np.float64)
    if not (w_values.shape == rho_values.shape == w_next_values.shape):
        raise ValueError(
            f"delta needs equal lengths, got {w_values.shape}, {rho_values.shape}, "
            f"{w_next_values.shape}"
        )
    return w_values * rho_values - w_next_values


def _check_sides(a: RatioSide, b: RatioSide) -> None:
    if len(a) == 0 or len(b) == 0:
        raise ValueError("ratio loss needs two non-empty mini-batches")


def _finite_loss(loss: float) -> float:
    if not np.isfinite(loss):
        raise NumericError(f"ratio loss is not finite ({loss!r})")
    return float(loss)


def discounted_loss(
    a: RatioSide,
    b: RatioSide,
    gamma: float,
    bandwidth: float,
) -> tuple[float, SideGrads, SideGrads]:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"discounted ratio loss needs 0 < gamma < 1, got {gamma}")
    _check_sides(a, b)
    k_nn = kernel_matrix(a.next_feats, b.next_feats, bandwidth)
    k_00 = kernel_matrix(a.init_feats, b.init_feats, bandwidth)
    k_n0 = kernel_matrix(a.next_feats, b.init_feats, bandwidth)
    k_0n = kernel_matrix(a.init_feats, b.next_feats, bandwidth)
    z = k_nn.sum()

    d_a = delta(a.w, a.rho, a.w_next)
    d_b = delta(b.w, b.rho, b.w_next)
    u_a = 1.0 - a.w_init
    u_b = 1.0 - b.w_init
    g2, c2, gc = gamma ** 2, (1.0 - gamma) ** 2, gamma * (1.0 - gamma)

    loss = (
        g2 * d_a @ k_nn @ d_b
        + c2 * u_a @ k_00 @ u_b
        + gc * (d_a @ k_n0 @ u_b + u_a @ k_0n @ d_b)
    ) / z
    loss = _finite_loss(loss)

    dd_a = (g2 * k_nn @ d_b + gc * k_n0 @ u_b) / z
    du_a = (c2 * k_00 @ u_b + gc * k_0n @ d_b) / z
    dd_b = (g2 * k_nn.T @ d_a + gc * k_0n.T @ u_a) / z
    du_b = (c2 * k_00.T @ u_a + gc * k_n0.T @ d_a) / z

    grads_a = SideGrads(w=dd_a * a.rho, w_next=-dd_a, w_init=-du_a)
    grads_b = SideGrads(w=dd_b * b.rho, w_next=-dd_b, w_init=-du_b)
    return loss, grads_a, grads_b


def _normalized_delta_grads(
    side: RatioSide, g: np.ndarray,
) -> SideGrads:
    """Pull dD/dDelta~ back through Delta~ = (w rho - w') / mean(w)."""
    n = len(side)
    z = side.w.mean()
    numer = side.w * side.rho - side.w_next
    shared = float(g @ numer) / (z * z * n)
    return SideGrads(
        w=g * side.rho / z - shared,
        w_next=-g / z,
        w_init=np.zeros(n),
    )


def average_loss(
    a: RatioSide,
    b: RatioSide,
    bandwidth: float,
) -> tuple[float, SideGrads, SideGrads]:
    _check_sides(a, b)
    k_nn = kernel_matrix(a.next_feats, b.next_feats, bandwidth)
    z = k_nn.sum()
    d_a = delta(a.w, a.rho, a.w_next) / a.w.mean()
    d_b = delta(b.w, b.rho, b.w_next) / b.w.mean()
    loss = _finite_loss(d_a @ k_nn @ d_b / z)
    g_a = k_nn @ d_b / z
    g_b = k_nn.T @ d_a / z
    return loss, _normalized_delta_grads(a, g_a), _normalized_delta_grads(b, g_b)


def expected_residual(
    w: np.ndarray,
    rho: np.ndarray,
    w_next: np.ndarray,
    w_init: np.ndarray,
    f_next: np.ndarray,
    f_init: np.ndarray,
    gamma: float,
) -> float:
    """Empirical L(w, f) = gamma E[Delta f(s')] + (1 - gamma) E[(1 - w(s0)) f(s0)].

    Zero in expectation at the true ratio for every test function f.
    For gamma = 1 only the first term remains.
    """
    main = gamma * np.mean(delta(w, rho, w_next) * f_next)
    if gamma >= 1.0:
        return float(main)
    return float(main + (1.0 - gamma) * np.mean((1.0 - w_init) * f_init))
